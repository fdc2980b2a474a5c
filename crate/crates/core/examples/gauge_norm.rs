//! The gauge of the signed columns of P as a norm on ℝⁿ, and its dual.
use greedy_geometry::linalg::{dot, Matrix};
use greedy_geometry::solvers::{gauge_value, support_function};

fn main() -> greedy_geometry::Result<()> {
    let p = Matrix::from_rows(&[vec![1.0, 0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0, -1.0]])?;
    let x = [3.0, 1.0];
    let z = [0.5, -1.0];
    let gx = gauge_value(&p, &x, 1e-10)?;
    let sz = support_function(&p, &z);
    println!("gauge(x) = {gx:.8}");
    println!("support(z) = {sz:.8}");
    println!("<x, z> = {:.4} <= {:.4}", dot(&x, &z), gx * sz);
    Ok(())
}
