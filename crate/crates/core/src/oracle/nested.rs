//! Nested-quadrature evaluation of the effective-Hamiltonian integrals.
//!
//! Works only from pointwise `H_I(t)` samples: the running integrals
//! `I_1(s) = ∫₀ˢ H_I`, `I_k(s) = ∫₀ˢ H_I·I_{k−1}` are carried on composite
//! Gauss–Legendre panels through a cumulative integration matrix, and the panel
//! count doubles until the result settles.

use num_complex::Complex64;
use thiserror::Error;

use super::quadrature::PanelRule;
use crate::model::MultiToneHamiltonian;
use crate::operator::Operator;

const PANEL_NODES: usize = 16;
const MAX_PANELS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle order {0} outside 2..=4")]
    Order(usize),
    #[error("oracle tolerance {0} below 1e-12")]
    Tolerance(f64),
    #[error("time {0} must be finite and non-negative")]
    Time(f64),
    #[error("refinement budget exhausted at {panels} panels (last change {change:.3e})")]
    Budget { best: Operator, change: f64, panels: usize },
}

/// Order-`n` effective Hamiltonian at `t` by nested quadrature; `2 ≤ n ≤ 4`.
pub fn quad_oracle(model: &MultiToneHamiltonian, n: usize, t: f64, tol: f64) -> Result<Operator, OracleError> {
    if !(2..=4).contains(&n) {
        return Err(OracleError::Order(n));
    }
    if !(tol >= 1e-12) {
        return Err(OracleError::Tolerance(tol));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(OracleError::Time(t));
    }
    let prefactor = match (n - 1) % 4 {
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    let ht = model.evaluate_hi(t);
    let rule = PanelRule::new(PANEL_NODES);
    let mut panels = initial_panels(model, t);
    let mut previous = (&ht * &nested_integral(model, &rule, n - 1, t, panels)).scale(prefactor);
    loop {
        panels *= 2;
        let current = (&ht * &nested_integral(model, &rule, n - 1, t, panels)).scale(prefactor);
        let change = current.distance(&previous);
        if change < tol {
            return Ok(current);
        }
        if panels >= MAX_PANELS {
            return Err(OracleError::Budget { best: current, change, panels });
        }
        previous = current;
    }
}

/// Roughly one panel per fastest period, at least one.
fn initial_panels(model: &MultiToneHamiltonian, t: f64) -> usize {
    let periods = model.max_omega() * t / std::f64::consts::TAU;
    (periods.ceil() as usize).clamp(1, MAX_PANELS / 2)
}

/// `I_depth(t)` on `panels` equal panels of `[0, t]`.
fn nested_integral(model: &MultiToneHamiltonian, rule: &PanelRule, depth: usize, t: f64, panels: usize) -> Operator {
    let dim = model.dim();
    let width = t / panels as f64;
    let half = 0.5 * width;
    let p = rule.len();

    let mut samples = Vec::with_capacity(panels * p);
    for j in 0..panels {
        let start = j as f64 * width;
        for &x in &rule.nodes {
            samples.push(model.evaluate_hi(start + half * (x + 1.0)));
        }
    }

    // integrand[k] holds the current integrand at every node.
    let mut integrand = samples.clone();
    let mut end = Operator::zeros(dim);
    for level in 0..depth {
        let mut running = Operator::zeros(dim);
        let mut at_nodes = Vec::with_capacity(integrand.len());
        for j in 0..panels {
            let block = &integrand[j * p..(j + 1) * p];
            for row in &rule.cumulative {
                let mut acc = running.clone();
                for (s, f) in row.iter().zip(block) {
                    acc += &f.scale_real(s * half);
                }
                at_nodes.push(acc);
            }
            for (w, f) in rule.weights.iter().zip(block) {
                running += &f.scale_real(w * half);
            }
        }
        end = running;
        if level + 1 < depth {
            integrand = samples.iter().zip(&at_nodes).map(|(h, acc)| h * acc).collect();
        }
    }
    end
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{make_standard_operator, StandardOp};
    use std::f64::consts::PI;

    fn scalar(g: f64, w: f64) -> MultiToneHamiltonian {
        MultiToneHamiltonian::from_pairs(vec![(Operator::from_real_rows(&[&[g]]).unwrap(), w)]).unwrap()
    }

    #[test]
    fn zero_time_is_zero() {
        let m = scalar(1.0, 1.0);
        assert!(quad_oracle(&m, 2, 0.0, 1e-12).unwrap().is_zero());
    }

    #[test]
    fn scalar_second_order_closed_form() {
        // −i(2g²/ω) sin 2ωt at g = ω = 1, t = π/4.
        let got = quad_oracle(&scalar(1.0, 1.0), 2, PI / 4.0, 1e-12).unwrap();
        assert!((got.get(0, 0) - Complex64::new(0.0, -2.0)).norm() < 1e-11);
    }

    #[test]
    fn scalar_higher_orders_closed_form() {
        // Scalar nesting gives (∫H)^{n−1}/(n−1)! with ∫H = 2 sin t.
        let m = scalar(1.0, 1.0);
        let t: f64 = 1.3;
        let h = 2.0 * t.cos();
        let k = 2.0 * t.sin();
        let third = quad_oracle(&m, 3, t, 1e-12).unwrap().get(0, 0);
        assert!((third - Complex64::new(-h * k * k / 2.0, 0.0)).norm() < 1e-10);
        let fourth = quad_oracle(&m, 4, t, 1e-12).unwrap().get(0, 0);
        assert!((fourth - Complex64::new(0.0, h * k * k * k / 6.0)).norm() < 1e-10);
    }

    #[test]
    fn oracle_orders_integrand_in_time() {
        // Noncommuting tones: compare with a low-order rule on a fine grid.
        let sx = make_standard_operator(StandardOp::SigmaX, 2).unwrap();
        let sz = make_standard_operator(StandardOp::SigmaZ, 2).unwrap();
        let m = MultiToneHamiltonian::from_pairs(vec![(sx.scale_real(0.3), 2.0), (sz.scale_real(0.5), 3.5)]).unwrap();
        let t = 0.6;
        let direct = quad_oracle(&m, 3, t, 1e-12).unwrap();
        // Simpson for I_1, trapezoid for I_2.
        let n = 400;
        let hstep = t / n as f64;
        let grid: Vec<Operator> = (0..=n).map(|k| m.evaluate_hi(k as f64 * hstep)).collect();
        let mut i1 = vec![Operator::zeros(2)];
        for k in 1..=n {
            let prev = i1[k - 1].clone();
            let mid = m.evaluate_hi((k as f64 - 0.5) * hstep);
            let inc = (&(&grid[k - 1] + &mid.scale_real(4.0)) + &grid[k]).scale_real(hstep / 6.0);
            i1.push(&prev + &inc);
        }
        let mut i2 = Operator::zeros(2);
        for k in 1..=n {
            let a = &grid[k - 1] * &i1[k - 1];
            let b = &grid[k] * &i1[k];
            i2 += &(&a + &b).scale_real(0.5 * hstep);
        }
        let approx = (&grid[n] * &i2).scale(Complex64::new(-1.0, 0.0));
        assert!(direct.distance(&approx) < 1e-4, "{}", direct.distance(&approx));
    }

    #[test]
    fn argument_checks() {
        let m = scalar(1.0, 1.0);
        assert_eq!(quad_oracle(&m, 1, 1.0, 1e-10), Err(OracleError::Order(1)));
        assert_eq!(quad_oracle(&m, 5, 1.0, 1e-10), Err(OracleError::Order(5)));
        assert_eq!(quad_oracle(&m, 2, 1.0, 1e-13), Err(OracleError::Tolerance(1e-13)));
        assert!(matches!(quad_oracle(&m, 2, -1.0, 1e-10), Err(OracleError::Time(_))));
    }
}
