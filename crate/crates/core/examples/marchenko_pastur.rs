//! Extreme eigenvalues of PᵀP/n against their Marchenko-Pastur limits as n grows.
use greedy_geometry::geometry::mp_limits;
use greedy_geometry::linalg::sym_eig_extremes;
use greedy_geometry::problems::{gen_synthetic, GeneratorSpec};

fn main() -> greedy_geometry::Result<()> {
    let ratio = 0.25;
    let (lo, hi) = mp_limits(ratio, 1.0);
    println!("limits: [{lo:.4}, {hi:.4}]");
    for n in [40, 160, 640] {
        let d = (ratio * n as f64) as usize;
        let inst = gen_synthetic(&GeneratorSpec {
            n,
            d,
            sparsity: 1,
            noise_sigma: 0.0,
            seed: n as u64,
        })?;
        let (emin, emax) = sym_eig_extremes(&inst.p.gram().scale(1.0 / n as f64))?;
        println!("n={n:4} d={d:4}: [{emin:.4}, {emax:.4}]");
    }
    Ok(())
}
