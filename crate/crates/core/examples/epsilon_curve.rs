//! ε-curves of GD over a dimension sweep at n = 50. Iteration counts peak
//! around d = n.
use greedy_geometry::experiments::{epsilon_curve, SweepAxis};
use greedy_geometry::problems::GeneratorSpec;
use greedy_geometry::solvers::{Method, SolverConfig};

fn main() -> greedy_geometry::Result<()> {
    let template = GeneratorSpec {
        n: 50,
        d: 0,
        sparsity: 8,
        noise_sigma: 0.5,
        seed: 1,
    };
    let dims = [10.0, 25.0, 50.0, 100.0, 500.0];
    let curve = epsilon_curve(
        &template,
        0.0,
        &SolverConfig::new(Method::Gd),
        SweepAxis::Dimension,
        &dims,
        10_000,
    )?;
    for (d, k) in curve.at_eps(1e-6).expect("on the grid") {
        println!("d={d:4}: k(1e-6) = {k}");
    }
    Ok(())
}
