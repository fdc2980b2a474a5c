//! One regularized matching pursuit step, checked against its scalar dual.
use greedy_geometry::solvers::{rmp_dual, rmp_objective, rmp_step_raw};

fn main() {
    let alpha = [0.8, 0.0, -0.3, 0.0];
    let grad = [0.4, -1.1, 0.2, 0.7];
    let (lambda, l1) = (0.3, 2.0);
    let out = rmp_step_raw(&alpha, &grad, lambda, l1);
    let primal = rmp_objective(&alpha, &grad, lambda, l1, &out.beta);
    let dual = rmp_dual(&alpha, &grad, lambda, l1, out.z_star);
    println!("case {:?}", out.case);
    println!("beta {:?}", out.beta);
    println!("z* {:.6}  primal {primal:.10}  dual {dual:.10}", out.z_star);
}
