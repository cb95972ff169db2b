//! Defect metrics and the left/right ordering gap of the second-order product.

use crate::builder::BuildError;
use crate::model::MultiToneHamiltonian;
use crate::operator::Operator;
use crate::series::{OperatorSeries, SeriesConfig};

/// `‖A − A†‖_F / max(1, ‖A‖_F)`.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    let diff = a - &a.adjoint();
    diff.frobenius_norm() / a.frobenius_norm().max(1.0)
}

/// `‖U†U − I‖_F`.
pub fn unitarity_defect(u: &Operator) -> f64 {
    let gram = &u.adjoint() * u;
    gram.distance(&Operator::identity(u.dim()))
}

/// Closed forms of both sides of the ordering identity
///
/// ```text
/// L(t) = H_I(t) · ∫₀ᵗdt₁ ∫₀^{t₁}dt₂ H_I(t₁) H_I(t₂)
/// R(t) = ∫₀ᵗdt₁ ∫₀^{t₁}dt₂ H_I(t₂) H_I(t₁) · H_I(t)
/// ```
///
/// built once and evaluated at any `t`.
#[derive(Debug, Clone)]
pub struct Eq6Evaluator {
    left: OperatorSeries,
    right: OperatorSeries,
}

impl Eq6Evaluator {
    pub fn new(model: &MultiToneHamiltonian) -> Result<Self, BuildError> {
        Self::with_config(model, &SeriesConfig::default())
    }

    pub fn with_config(model: &MultiToneHamiltonian, cfg: &SeriesConfig) -> Result<Self, BuildError> {
        let hi = model.to_operator_series();
        let inner = hi.integrate0t(&cfg.tone)?;
        let left_inner = hi.mul(&inner, cfg)?.integrate0t(&cfg.tone)?;
        let right_inner = inner.mul(&hi, cfg)?.integrate0t(&cfg.tone)?;
        Ok(Self { left: hi.mul(&left_inner, cfg)?, right: right_inner.mul(&hi, cfg)? })
    }

    pub fn left(&self) -> &OperatorSeries {
        &self.left
    }

    pub fn right(&self) -> &OperatorSeries {
        &self.right
    }

    pub fn gap(&self, t: f64) -> f64 {
        self.left.eval(t).distance(&self.right.eval(t))
    }
}

/// `‖L(t) − R(t)‖_F`.
pub fn eq6_gap(model: &MultiToneHamiltonian, t: f64) -> Result<f64, BuildError> {
    Ok(Eq6Evaluator::new(model)?.gap(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{make_standard_operator, StandardOp};
    use crate::oracle::quadrature::adaptive_gauss_kronrod;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn sop(kind: StandardOp) -> Operator {
        make_standard_operator(kind, 2).unwrap()
    }

    fn noncommuting() -> MultiToneHamiltonian {
        MultiToneHamiltonian::from_pairs(vec![
            (sop(StandardOp::SigmaPlus).scale_real(0.2), 5.0),
            (sop(StandardOp::SigmaZ).scale_real(0.2), 12.0),
        ])
        .unwrap()
    }

    #[test]
    fn hermiticity_examples() {
        let sx = sop(StandardOp::SigmaX);
        assert_eq!(hermiticity_defect(&sx), 0.0);
        let isx = sx.scale(Complex64::new(0.0, 1.0));
        assert!((hermiticity_defect(&isx) - 2.0).abs() < 1e-15);
        assert!(hermiticity_defect(&sop(StandardOp::SigmaPlus)) > 0.0);
    }

    #[test]
    fn unitarity_examples() {
        assert_eq!(unitarity_defect(&Operator::identity(4)), 0.0);
        let two = Operator::identity(2).scale_real(2.0);
        assert!((unitarity_defect(&two) - 3.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn eq6_vanishes_for_scalar_and_single_hermitian_tone() {
        let scalar = MultiToneHamiltonian::from_pairs(vec![(Operator::from_real_rows(&[&[0.7]]).unwrap(), 1.0)]).unwrap();
        let sx = MultiToneHamiltonian::from_pairs(vec![(sop(StandardOp::SigmaX), 3.0)]).unwrap();
        let e1 = Eq6Evaluator::new(&scalar).unwrap();
        let e2 = Eq6Evaluator::new(&sx).unwrap();
        for k in 0..30 {
            let t = 0.37 * k as f64;
            assert!(e1.gap(t) < 1e-12);
            assert!(e2.gap(t) < 1e-12);
        }
    }

    #[test]
    fn eq6_positive_for_noncommuting_pair() {
        assert!(eq6_gap(&noncommuting(), 0.5).unwrap() > 1e-6);
    }

    #[test]
    fn eq6_sides_match_quadrature() {
        let m = noncommuting();
        let e = Eq6Evaluator::new(&m).unwrap();
        let t = 0.5;
        let h = |s: f64| m.evaluate_hi(s);
        // Entrywise double integrals of H(t1)H(t2) and H(t2)H(t1) over t2 < t1.
        let double = |i: usize, j: usize, swap: bool| {
            adaptive_gauss_kronrod(
                |t1| {
                    adaptive_gauss_kronrod(
                        |t2| {
                            let (a, b) = if swap { (h(t2), h(t1)) } else { (h(t1), h(t2)) };
                            (&a * &b).get(i, j)
                        },
                        0.0,
                        t1,
                        1e-13,
                    )
                    .unwrap()
                },
                0.0,
                t,
                1e-12,
            )
            .unwrap()
        };
        let build = |swap: bool| {
            let data = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| double(i, j, swap)).collect();
            Operator::from_vec(2, data).unwrap()
        };
        let left = &h(t) * &build(false);
        let right = &build(true) * &h(t);
        assert!(e.left().eval(t).distance(&left) < 1e-10);
        assert!(e.right().eval(t).distance(&right) < 1e-10);
    }

    fn hermitian3() -> impl Strategy<Value = Operator> {
        proptest::collection::vec(-1.0..1.0f64, 18).prop_map(|v| {
            let data: Vec<Complex64> = v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
            let a = Operator::from_vec(3, data).unwrap();
            &a + &a.adjoint()
        })
    }

    proptest! {
        #[test]
        fn hermiticity_defect_zero_iff_hermitian(a in hermitian3(), k in 0usize..9, bump in 0.01..1.0f64) {
            prop_assert!(hermiticity_defect(&a) <= 1e-15);
            let mut data = a.as_slice().to_vec();
            data[k] += Complex64::new(0.0, bump);
            if k % 4 != 0 {
                data[k] += Complex64::new(bump, 0.0);
            }
            let b = Operator::from_vec(3, data).unwrap();
            prop_assert!(hermiticity_defect(&b) > 0.0);
        }

        #[test]
        fn hermiticity_defect_unitary_invariance(a in hermitian3(), gen in hermitian3(), skew in 0.0..1.0f64) {
            let mut data = a.as_slice().to_vec();
            data[1] += Complex64::new(skew, 0.0);
            let x = Operator::from_vec(3, data).unwrap();
            let u = gen.scale(Complex64::new(0.0, -1.0)).matrix_exponential().unwrap();
            let conj = &(&u * &x) * &u.adjoint();
            prop_assert!((hermiticity_defect(&conj) - hermiticity_defect(&x)).abs() < 1e-12);
        }
    }
}
