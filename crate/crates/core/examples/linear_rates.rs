//! GD and Gauss-Southwell on least squares, with the certified linear-rate
//! envelopes printed next to the observed gaps.
use greedy_geometry::experiments::{bound_overlay, traced_run, OverlayMode};
use greedy_geometry::geometry::{estimate, EstimateOptions};
use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};
use greedy_geometry::solvers::{Method, SolverConfig};

fn main() -> greedy_geometry::Result<()> {
    let inst = gen_synthetic(&GeneratorSpec {
        n: 50,
        d: 25,
        sparsity: 8,
        noise_sigma: 0.5,
        seed: 3,
    })?;
    let opts = EstimateOptions {
        sdp: true,
        ..Default::default()
    };
    let c = estimate(&inst.p, &opts)?;
    for method in [Method::Gd, Method::Gscd] {
        let cfg = SolverConfig {
            max_iter: 300,
            tol: 1e-14,
            ..SolverConfig::new(method)
        };
        let (trace, _) = traced_run(&inst, &cfg)?;
        let overlay = bound_overlay(&trace, &inst.p, &c, OverlayMode::Global, &opts)?;
        println!("{method}: rate {:.5}", overlay.rate);
        let gaps = trace.gaps().expect("reference is set");
        for k in (0..gaps.len()).step_by(50) {
            println!("  {k:4}  gap {:.3e}  bound {:.3e}", gaps[k], overlay.values[k]);
        }
    }
    Ok(())
}
