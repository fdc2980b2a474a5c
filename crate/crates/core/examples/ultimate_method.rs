//! The gauge ultimate method against RMP in the overparametrized regime,
//! with the inner certificates ε̂ₖ of each outer step.
use greedy_geometry::experiments::traced_run;
use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};
use greedy_geometry::solvers::{Method, SolverConfig};

fn main() -> greedy_geometry::Result<()> {
    let inst = gen_synthetic(&GeneratorSpec {
        n: 20,
        d: 120,
        sparsity: 4,
        noise_sigma: 0.5,
        seed: 4,
    })?
    .with_lambda(0.2)?;
    for method in [Method::Rmp, Method::Ultimate] {
        let cfg = SolverConfig {
            max_iter: 3000,
            tol: 1e-8,
            inner_cap: 2000,
            ..SolverConfig::new(method)
        };
        let (trace, _) = traced_run(&inst, &cfg)?;
        println!("{method}: gap 1e-8 after {:?} outer iterations", trace.first_below(1e-8));
        if method == Method::Ultimate {
            for r in trace.records.iter().skip(1).take(8) {
                println!(
                    "  k={:2}  G={:.8}  eps_hat={:.1e}  inner={}",
                    r.iter,
                    r.obj_g,
                    r.eps_hat.unwrap_or(f64::NAN),
                    r.inner_iters.unwrap_or(0)
                );
            }
        }
    }
    Ok(())
}
