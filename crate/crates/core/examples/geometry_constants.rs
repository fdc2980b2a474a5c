//! Closed-form, SDP and deterministic estimates of the constants for an
//! underparametrized and an overparametrized Gaussian design.
use greedy_geometry::geometry::{estimate, EstimateOptions, EstimateReport};
use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};

fn main() -> greedy_geometry::Result<()> {
    for (n, d) in [(40, 10), (10, 40)] {
        let inst = gen_synthetic(&GeneratorSpec {
            n,
            d,
            sparsity: 3,
            noise_sigma: 0.5,
            seed: 1,
        })?;
        let opts = EstimateOptions {
            sdp: true,
            sigma: Some(1.0),
            ..Default::default()
        };
        let g = estimate(&inst.p, &opts)?;
        println!("{}", EstimateReport::new(n, d, None, &g).to_json());
        println!(
            "certified mu1 {:.3e}, GS rate {:.4}, GD rate {:.4}",
            g.mu1_certified(),
            1.0 - g.mu1_certified() / g.l1_smooth,
            1.0 - g.mu2_certified() / g.l2_smooth
        );
    }
    Ok(())
}
