//! From zero, RMP and proximal GS coordinate descent with L = L₁ produce the
//! same iterates on small-λ instances.
use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};
use greedy_geometry::solvers::{run, CoordinateStep, Method, SolverConfig};

fn main() -> greedy_geometry::Result<()> {
    let inst = gen_synthetic(&GeneratorSpec {
        n: 50,
        d: 30,
        sparsity: 8,
        noise_sigma: 0.5,
        seed: 2,
    })?
    .with_lambda(0.001)?;
    let mut cfg = SolverConfig {
        max_iter: 100,
        tol: 1e-300,
        keep_iterates: true,
        prox_l: CoordinateStep::L1,
        ..SolverConfig::new(Method::Rmp)
    };
    let rmp = run(&inst, &cfg, &vec![0.0; 30], None)?;
    cfg.method = Method::ProxcdGs;
    let prox = run(&inst, &cfg, &vec![0.0; 30], None)?;
    let dev = rmp
        .iterates
        .iter()
        .zip(&prox.iterates)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    println!("largest iterate difference over 100 steps: {dev:e}");
    Ok(())
}
