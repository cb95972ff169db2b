//! Exact calculus on finite sums `Σ c·t^k·e^{iΩt}`.
//!
//! Every time dependence produced by the builders lives in this class: tones
//! multiply by adding frequencies and powers, and definite integrals from 0
//! close over it through integration by parts. Values are kept in canonical
//! form (terms sorted by frequency then power, equal slots merged, cancelled
//! terms pruned) so two equal polynomials compare equal term by term.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneConfig {
    /// Frequencies closer than this are one slot; `|Ω| ≤ tol_zero` is zero frequency.
    pub tol_zero: f64,
    /// Terms with `|c| < drop_tol · max|c|` are pruned.
    pub drop_tol: f64,
    pub max_power: u32,
}

impl Default for ToneConfig {
    fn default() -> Self {
        Self { tol_zero: 1e-9, drop_tol: 1e-14, max_power: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ToneError {
    #[error("power {power} exceeds the configured maximum {max}")]
    PowerOverflow { power: u32, max: u32 },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// One term `coeff · t^power · e^{i·freq·t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToneMono {
    pub coeff: Complex64,
    pub power: u32,
    pub freq: f64,
}

impl ToneMono {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeff * t.powi(self.power as i32) * Complex64::new(0.0, self.freq * t).exp()
    }
}

/// Canonical finite sum of [`ToneMono`] terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TonePoly {
    terms: Vec<ToneMono>,
}

fn cmp_slot(a: &ToneMono, b: &ToneMono) -> Ordering {
    a.freq.total_cmp(&b.freq).then(a.power.cmp(&b.power))
}

impl TonePoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(c, 0, 0.0)
    }

    pub fn monomial(coeff: Complex64, power: u32, freq: f64) -> Self {
        Self::from_terms(vec![ToneMono { coeff, power, freq }])
    }

    /// `e^{iΩt}`.
    pub fn tone(freq: f64) -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 0, freq)
    }

    /// Canonicalizes arbitrary terms with the default configuration.
    pub fn from_terms(terms: Vec<ToneMono>) -> Self {
        Self::from_terms_with(terms, &ToneConfig::default())
    }

    pub fn from_terms_with(mut terms: Vec<ToneMono>, cfg: &ToneConfig) -> Self {
        for t in &mut terms {
            if t.freq.abs() <= cfg.tol_zero {
                t.freq = 0.0;
            }
        }
        terms.sort_by(cmp_slot);

        // Cluster frequencies: a term joins the running cluster when it is within
        // tol_zero of the cluster's first frequency.
        let mut clustered: Vec<ToneMono> = Vec::with_capacity(terms.len());
        let mut anchor = f64::NAN;
        let mut start = 0;
        for t in terms {
            if !(anchor.is_finite() && (t.freq - anchor).abs() <= cfg.tol_zero) {
                anchor = t.freq;
                start = clustered.len();
            }
            let mut t = t;
            t.freq = anchor;
            match clustered[start..].iter_mut().find(|m| m.power == t.power) {
                Some(m) => m.coeff += t.coeff,
                None => clustered.push(t),
            }
        }
        // Zero frequency wins when a cluster straddles it.
        for t in &mut clustered {
            if t.freq.abs() <= cfg.tol_zero {
                t.freq = 0.0;
            }
        }
        clustered.sort_by(cmp_slot);
        let mut merged: Vec<ToneMono> = Vec::with_capacity(clustered.len());
        for t in clustered {
            match merged.last_mut() {
                Some(m) if m.freq == t.freq && m.power == t.power => m.coeff += t.coeff,
                _ => merged.push(t),
            }
        }

        let scale = merged.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        let cutoff = cfg.drop_tol * scale;
        merged.retain(|t| t.coeff.norm() > cutoff && t.coeff.norm() > 0.0);
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[ToneMono] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_with(other, &ToneConfig::default())
    }

    pub fn add_with(&self, other: &Self, cfg: &ToneConfig) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms_with(terms, cfg)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| ToneMono { coeff: t.coeff * c, ..*t }).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ToneError> {
        self.mul_with(other, &ToneConfig::default())
    }

    /// Product; frequencies and powers add monomial by monomial.
    pub fn mul_with(&self, other: &Self, cfg: &ToneConfig) -> Result<Self, ToneError> {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let power = a.power + b.power;
                if power > cfg.max_power {
                    return Err(ToneError::PowerOverflow { power, max: cfg.max_power });
                }
                terms.push(ToneMono { coeff: a.coeff * b.coeff, power, freq: a.freq + b.freq });
            }
        }
        Ok(Self::from_terms_with(terms, cfg))
    }

    pub fn integrate0t(&self) -> Result<Self, ToneError> {
        self.integrate0t_with(&ToneConfig::default())
    }

    /// Exact `∫₀ᵗ p(s) ds`, lower-limit constants included.
    pub fn integrate0t_with(&self, cfg: &ToneConfig) -> Result<Self, ToneError> {
        self.integrate_impl(cfg, true)
    }

    pub fn antiderivative(&self) -> Result<Self, ToneError> {
        self.antiderivative_with(&ToneConfig::default())
    }

    /// Antiderivative without lower-limit constants: oscillating terms integrate
    /// to oscillating terms only, zero-frequency `t^k` to `t^{k+1}/(k+1)`.
    ///
    /// Equals `integrate0t` minus its constant term.
    pub fn antiderivative_with(&self, cfg: &ToneConfig) -> Result<Self, ToneError> {
        self.integrate_impl(cfg, false)
    }

    fn integrate_impl(&self, cfg: &ToneConfig, lower_limit: bool) -> Result<Self, ToneError> {
        let mut out = Vec::with_capacity(self.len() * 2);
        for m in &self.terms {
            if m.freq == 0.0 {
                let power = m.power + 1;
                if power > cfg.max_power {
                    return Err(ToneError::PowerOverflow { power, max: cfg.max_power });
                }
                out.push(ToneMono { coeff: m.coeff / f64::from(power), power, freq: 0.0 });
                continue;
            }
            // ∫₀ᵗ s^k e^{iΩs} ds = t^k e^{iΩt}/(iΩ) − (k/(iΩ)) ∫₀ᵗ s^{k−1} e^{iΩs} ds
            let i_omega = Complex64::new(0.0, m.freq);
            let mut c = m.coeff / i_omega;
            let mut k = m.power;
            loop {
                out.push(ToneMono { coeff: c, power: k, freq: m.freq });
                if k == 0 {
                    if lower_limit {
                        out.push(ToneMono { coeff: -c, power: 0, freq: 0.0 });
                    }
                    break;
                }
                c = -c * f64::from(k) / i_omega;
                k -= 1;
            }
        }
        if out.iter().any(|t| !(t.coeff.re.is_finite() && t.coeff.im.is_finite())) {
            return Err(ToneError::NonFinite);
        }
        Ok(Self::from_terms_with(out, cfg))
    }

    /// `d/dt (t^k e^{iΩt}) = (k t^{k−1} + iΩ t^k) e^{iΩt}`.
    pub fn differentiate(&self) -> Self {
        self.differentiate_with(&ToneConfig::default())
    }

    pub fn differentiate_with(&self, cfg: &ToneConfig) -> Self {
        let mut out = Vec::with_capacity(self.len() * 2);
        for m in &self.terms {
            if m.power > 0 {
                out.push(ToneMono { coeff: m.coeff * f64::from(m.power), power: m.power - 1, freq: m.freq });
            }
            if m.freq != 0.0 {
                out.push(ToneMono { coeff: m.coeff * Complex64::new(0.0, m.freq), power: m.power, freq: m.freq });
            }
        }
        Self::from_terms_with(out, cfg)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|m| m.eval(t)).sum()
    }

    /// Sub-polynomial with `|freq| ≤ tol_zero`.
    pub fn secular(&self, tol_zero: f64) -> Self {
        Self { terms: self.terms.iter().filter(|m| m.freq.abs() <= tol_zero).copied().collect() }
    }

    /// Complement of [`TonePoly::secular`].
    pub fn oscillatory(&self, tol_zero: f64) -> Self {
        Self { terms: self.terms.iter().filter(|m| m.freq.abs() > tol_zero).copied().collect() }
    }

    /// Coefficient of the zero-frequency, power-0 term.
    pub fn constant_term(&self, tol_zero: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|m| m.freq.abs() <= tol_zero && m.power == 0)
            .map(|m| m.coeff)
            .sum()
    }

    /// True when a zero-frequency term with power ≥ 1 is present.
    pub fn has_secular_growth(&self, tol_zero: f64) -> bool {
        self.terms.iter().any(|m| m.freq.abs() <= tol_zero && m.power >= 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::quadrature::adaptive_gauss_kronrod;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mono(coeff: Complex64, power: u32, freq: f64) -> ToneMono {
        ToneMono { coeff, power, freq }
    }

    fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_power: u32, coeff: f64) -> TonePoly {
        // A small frequency pool so that slots collide and merge.
        let pool = [-3.0, -1.5, 0.0, 0.7, 2.0, 4.5];
        TonePoly::from_terms(
            (0..n)
                .map(|_| {
                    mono(
                        c(rng.gen_range(-coeff..coeff), rng.gen_range(-coeff..coeff)),
                        rng.gen_range(0..=max_power),
                        pool[rng.gen_range(0..pool.len())],
                    )
                })
                .collect(),
        )
    }

    fn close(a: &TonePoly, b: &TonePoly, tol: f64) -> bool {
        let scale = a.max_abs_coeff().max(b.max_abs_coeff()).max(1e-300);
        let diff = a.add(&b.scale(c(-1.0, 0.0)));
        diff.terms().iter().all(|m| m.coeff.norm() <= tol * scale)
    }

    fn naive_eval(terms: &[ToneMono], t: f64) -> Complex64 {
        let mut acc = c(0.0, 0.0);
        for m in terms {
            let mut p = c(1.0, 0.0);
            for _ in 0..m.power {
                p *= t;
            }
            acc += m.coeff * p * c((m.freq * t).cos(), (m.freq * t).sin());
        }
        acc
    }

    #[test]
    fn product_examples() {
        let w = 1.7;
        let one = TonePoly::tone(w).mul(&TonePoly::tone(-w)).unwrap();
        assert_eq!(one, TonePoly::constant(c(1.0, 0.0)));

        let t = TonePoly::monomial(c(1.0, 0.0), 1, 0.0);
        let t_e2 = TonePoly::monomial(c(1.0, 0.0), 1, 2.0);
        assert_eq!(t.mul(&t_e2).unwrap(), TonePoly::monomial(c(1.0, 0.0), 2, 2.0));

        let p = TonePoly::from_terms(vec![mono(c(2.0, 0.0), 0, 3.0), mono(c(1.0, 0.0), 0, 0.0)]);
        let q = TonePoly::tone(-3.0);
        let expected = TonePoly::from_terms(vec![mono(c(2.0, 0.0), 0, 0.0), mono(c(1.0, 0.0), 0, -3.0)]);
        assert_eq!(p.mul(&q).unwrap(), expected);
    }

    #[test]
    fn product_power_overflow() {
        let p = TonePoly::monomial(c(1.0, 0.0), 9, 0.0);
        assert_eq!(p.mul(&p), Err(ToneError::PowerOverflow { power: 18, max: 16 }));
        let top = TonePoly::monomial(c(1.0, 0.0), 16, 0.0);
        assert!(top.integrate0t().is_err());
        // Oscillating terms do not raise the power.
        assert!(TonePoly::monomial(c(1.0, 0.0), 16, 1.0).integrate0t().is_ok());
    }

    #[test]
    fn integral_examples() {
        let w = 2.5;
        let iw = c(0.0, w);
        let expected = TonePoly::from_terms(vec![mono(1.0 / iw, 0, w), mono(-1.0 / iw, 0, 0.0)]);
        assert_eq!(TonePoly::tone(w).integrate0t().unwrap(), expected);

        assert_eq!(
            TonePoly::constant(c(1.0, 0.0)).integrate0t().unwrap(),
            TonePoly::monomial(c(1.0, 0.0), 1, 0.0)
        );

        let p = TonePoly::monomial(c(1.0, 0.0), 1, 2.0);
        let closed = p.integrate0t().unwrap().eval(1.3);
        let quad = adaptive_gauss_kronrod(|s| p.eval(s), 0.0, 1.3, 1e-13).unwrap();
        assert!((closed - quad).norm() < 1e-10, "{closed} vs {quad}");
    }

    #[test]
    fn tiny_frequency_is_zero_frequency() {
        let p = TonePoly::tone(1e-12);
        assert_eq!(p.terms()[0].freq, 0.0);
        assert_eq!(p.integrate0t().unwrap(), TonePoly::monomial(c(1.0, 0.0), 1, 0.0));
    }

    #[test]
    fn derivative_examples() {
        let t = TonePoly::monomial(c(1.0, 0.0), 1, 0.0);
        assert_eq!(t.differentiate(), TonePoly::constant(c(1.0, 0.0)));
        let w = 0.8;
        assert_eq!(TonePoly::tone(w).differentiate(), TonePoly::monomial(c(0.0, w), 0, w));
    }

    #[test]
    fn eval_examples() {
        let p = TonePoly::from_terms(vec![mono(c(1.0, 0.0), 0, 0.0), mono(c(1.0, 0.0), 0, PI)]);
        assert!(p.eval(1.0).norm() < 1e-15);
        assert_abs_diff_eq!(TonePoly::monomial(c(1.0, 0.0), 2, 0.0).eval(3.0).re, 9.0, epsilon = 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = random_poly(&mut rng, 20, 4, 5.0);
            let t = rng.gen_range(-3.0..3.0);
            let got = p.eval(t);
            let want = naive_eval(p.terms(), t);
            let scale = p.terms().iter().map(|m| m.coeff.norm() * t.abs().powi(m.power as i32)).sum::<f64>();
            assert!((got - want).norm() <= 1e-13 * scale.max(1e-300));
        }
    }

    #[test]
    fn secular_examples() {
        let p = TonePoly::from_terms(vec![mono(c(3.0, 0.0), 0, 0.0), mono(c(1.0, 0.0), 0, 5.0)]);
        assert_eq!(p.secular(1e-9), TonePoly::constant(c(3.0, 0.0)));
        let q = TonePoly::from_terms(vec![mono(c(1.0, 0.0), 0, 5.0), mono(c(-1.0, 0.0), 0, -5.0)]);
        assert!(q.secular(1e-9).is_zero());
        let r = TonePoly::from_terms(vec![mono(c(2.0, 0.0), 1, 0.0), mono(c(1.0, 0.0), 1, 0.5)]);
        assert_eq!(r.secular(1e-9), TonePoly::monomial(c(2.0, 0.0), 1, 0.0));
        assert!(r.has_secular_growth(1e-9));
        assert_eq!(r.secular(1e-9).add(&r.oscillatory(1e-9)), r);
    }

    #[test]
    fn antiderivative_drops_only_the_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = random_poly(&mut rng, 8, 3, 2.0);
            let full = p.integrate0t().unwrap();
            let anti = p.antiderivative().unwrap();
            let k = full.constant_term(1e-9);
            let diff = full.add(&anti.scale(c(-1.0, 0.0)));
            assert!(close(&diff, &TonePoly::constant(k), 1e-13));
            assert_eq!(anti.constant_term(1e-9), c(0.0, 0.0));
        }
    }

    #[test]
    fn quadrature_oracle_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let p = random_poly(&mut rng, 6, 3, 10.0);
            let t = rng.gen_range(0.0..20.0);
            let closed = p.integrate0t().unwrap().eval(t);
            let quad = adaptive_gauss_kronrod(|s| p.eval(s), 0.0, t, 1e-12).unwrap();
            // Absolute 1e-9 on modest magnitudes; scale guards large t^k terms.
            let scale = p.terms().iter().map(|m| m.coeff.norm() * t.powi(m.power as i32 + 1)).sum::<f64>();
            assert!((closed - quad).norm() < 1e-9f64.max(1e-13 * scale), "t={t} {closed} {quad}");
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly(max_terms: usize, max_power: u32) -> impl Strategy<Value = TonePoly> {
            let freq = prop_oneof![Just(0.0), Just(1.0), Just(-1.0), Just(2.5), -5.0f64..5.0];
            proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0..=max_power, freq), 0..=max_terms)
                .prop_map(|v| TonePoly::from_terms(v.into_iter().map(|(re, im, k, f)| mono(c(re, im), k, f)).collect()))
        }

        proptest! {
            #[test]
            fn canonicalization_idempotent(p in arb_poly(12, 5)) {
                prop_assert_eq!(TonePoly::from_terms(p.terms().to_vec()), p);
            }

            #[test]
            fn product_commutative_and_associative(p in arb_poly(4, 3), q in arb_poly(4, 3), r in arb_poly(4, 3)) {
                prop_assert!(close(&p.mul(&q).unwrap(), &q.mul(&p).unwrap(), 1e-13));
                let left = p.mul(&q).unwrap().mul(&r).unwrap();
                let right = p.mul(&q.mul(&r).unwrap()).unwrap();
                prop_assert!(close(&left, &right, 1e-12));
            }

            #[test]
            fn integral_round_trip(p in arb_poly(10, 6)) {
                // Low frequencies give integral coefficients ~ k!/Ω^{k+1}; round-off scales with them.
                let integral = p.integrate0t().unwrap();
                let back = integral.differentiate();
                let omega = p.terms().iter().map(|m| m.freq.abs()).fold(1.0, f64::max);
                let scale = p.max_abs_coeff().max(integral.max_abs_coeff() * omega * 6.0);
                let diff = back.add(&p.scale(c(-1.0, 0.0)));
                prop_assert!(diff.terms().iter().all(|m| m.coeff.norm() <= 1e-13 * scale), "{:?} vs {:?}", back, p);
            }

            #[test]
            fn integral_vanishes_at_zero(p in arb_poly(10, 6)) {
                // Zero up to round-off in summing the power-0 coefficients.
                let integral = p.integrate0t().unwrap();
                let v = integral.eval(0.0);
                let scale = integral.terms().iter().filter(|m| m.power == 0).map(|m| m.coeff.norm()).sum::<f64>();
                prop_assert!(v.norm() <= 1e-14 * scale.max(1e-300));
            }

            #[test]
            fn secular_partition(p in arb_poly(10, 4)) {
                prop_assert_eq!(p.secular(1e-9).add(&p.oscillatory(1e-9)), p);
            }
        }
    }
}
