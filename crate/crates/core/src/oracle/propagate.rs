//! Fixed-step RK4 propagation of `dU/dt = −i·G(t)·U`, `U(0) = I`.

use num_complex::Complex64;

use crate::model::MultiToneHamiltonian;
use crate::operator::{Operator, OperatorError};
use crate::series::OperatorSeries;

pub const MIN_STEPS: usize = 16;
/// Default resolution: steps per unit of `max ω · t`.
pub const STEPS_PER_UNIT: f64 = 4096.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub u: Operator,
    pub steps: usize,
    /// `‖U_steps − U_{2·steps}‖_F`.
    pub est_error: f64,
}

/// `max(16, ⌈4096 · max ω · t⌉)`.
pub fn default_steps(model: &MultiToneHamiltonian, t: f64) -> usize {
    let n = (STEPS_PER_UNIT * model.max_omega() * t.abs()).ceil();
    if n.is_finite() && n > MIN_STEPS as f64 {
        n as usize
    } else {
        MIN_STEPS
    }
}

fn rk4<G: Fn(f64) -> Operator>(generator: G, dim: usize, t: f64, steps: usize) -> Operator {
    let minus_i = Complex64::new(0.0, -1.0);
    let h = t / steps as f64;
    let rhs = |s: f64, u: &Operator| (&generator(s) * u).scale(minus_i);
    let mut u = Operator::identity(dim);
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = rhs(s, &u);
        let k2 = rhs(s + 0.5 * h, &(&u + &k1.scale_real(0.5 * h)));
        let k3 = rhs(s + 0.5 * h, &(&u + &k2.scale_real(0.5 * h)));
        let k4 = rhs(s + h, &(&u + &k3.scale_real(h)));
        let mut incr = &(&k1 + &k4) + &(&k2 + &k3).scale_real(2.0);
        incr = incr.scale_real(h / 6.0);
        u += &incr;
    }
    u
}

fn with_estimate<G: Fn(f64) -> Operator + Copy>(generator: G, dim: usize, t: f64, steps: usize) -> PropagationResult {
    let steps = steps.max(MIN_STEPS);
    let u = rk4(generator, dim, t, steps);
    let fine = rk4(generator, dim, t, 2 * steps);
    PropagationResult { est_error: u.distance(&fine), u, steps }
}

/// Exact interaction-picture propagator from 0 to `t` (`steps` is raised to 16 if smaller).
pub fn propagate_exact(model: &MultiToneHamiltonian, t: f64, steps: usize) -> PropagationResult {
    with_estimate(|s| model.evaluate_hi(s), model.dim(), t, steps)
}

/// Propagator generated by a (possibly non-Hermitian) series `S(t)`.
pub fn propagate_series(series: &OperatorSeries, t: f64, steps: usize) -> PropagationResult {
    with_estimate(|s| series.eval(s), series.dim(), t, steps)
}

/// `‖U − V‖_F / √dim`.
pub fn fidelity_distance(u: &Operator, v: &Operator) -> Result<f64, OperatorError> {
    let diff = u.try_sub(v)?;
    Ok(diff.frobenius_norm() / (u.dim() as f64).sqrt())
}
