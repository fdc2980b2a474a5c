//! When does proximal GS coordinate descent settle on the final LASSO support?
use greedy_geometry::experiments::{support_stats, traced_run};
use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};
use greedy_geometry::solvers::{Method, SolverConfig};

fn main() -> greedy_geometry::Result<()> {
    let base = gen_synthetic(&GeneratorSpec {
        n: 50,
        d: 100,
        sparsity: 6,
        noise_sigma: 0.5,
        seed: 5,
    })?;
    for frac in [0.1, 0.2, 0.3] {
        let inst = base.with_lambda(frac * base.lambda_max())?;
        let cfg = SolverConfig {
            max_iter: 5000,
            tol: 1e-10,
            keep_iterates: true,
            ..SolverConfig::new(Method::ProxcdGs)
        };
        let (trace, alpha_ref) = traced_run(&inst, &cfg)?;
        let stats = support_stats(&trace, &alpha_ref)?;
        println!(
            "lambda = {frac} lambda_max: support of size {} from iteration {}",
            stats.final_support.len(),
            stats.identification_iter
        );
    }
    Ok(())
}
