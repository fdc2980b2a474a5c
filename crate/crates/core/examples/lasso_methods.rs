//! All LASSO methods on one instance, with iteration counts to a fixed gap.
use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};
use greedy_geometry::experiments::traced_run;
use greedy_geometry::solvers::{Method, SolverConfig};

fn main() -> greedy_geometry::Result<()> {
    let inst = gen_synthetic(&GeneratorSpec {
        n: 40,
        d: 80,
        sparsity: 5,
        noise_sigma: 0.5,
        seed: 9,
    })?;
    let inst = inst.with_lambda(0.05 * inst.lambda_max())?;
    for method in [Method::Proxgrad, Method::ProxcdGs, Method::Rmp, Method::Ultimate] {
        let cfg = SolverConfig {
            max_iter: 5000,
            tol: 1e-8,
            inner_cap: 500,
            ..SolverConfig::new(method)
        };
        let (trace, _) = traced_run(&inst, &cfg)?;
        let last = trace.last();
        println!(
            "{method:>10}: {:5} iterations, G = {:.10}, support {}",
            last.iter, last.obj_g, last.support
        );
    }
    Ok(())
}
