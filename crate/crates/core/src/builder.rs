//! Closed-form effective Hamiltonians and Dyson terms.
//!
//! With ħ = 1 and `H_I(t)` from [`MultiToneHamiltonian`]:
//!
//! ```text
//! H_eff^(n)(t) = (1/i)^{n−1} H_I(t) ∫₀ᵗ H_I(t₁) ∫₀^{t₁} H_I(t₂) ⋯ dt_{n−1} ⋯ dt₁
//! U^(n)(t)     = (1/i)^n ∫₀ᵗ H_I(t₁) ∫₀^{t₁} ⋯ H_I(t_n) dt_n ⋯ dt₁
//! ```
//!
//! so that `H_eff^(n) = i · dU^(n)/dt` holds exactly. Every integral is done in
//! closed form by the tone algebra, so the results are [`OperatorSeries`]
//! values that can be evaluated, differentiated, or split into secular and
//! oscillating parts.
//!
//! Secular extraction uses the lower-limit-free antiderivative at every
//! nesting level. The definite integrals leave behind products of the
//! initial-time constants (for instance `C·D` at third order with
//! `C = Σ[h†,h]/ω`, `D = Σ(h − h†)/ω`) which are not Hermitian in general and
//! describe the switch-on transient rather than the time-independent
//! generator. At second order both conventions give the same operator,
//! `Σ_m [h_m, h_m†]/ω_m`. The zero-frequency part of the definite series is
//! still reported as [`EffectiveOrderResult::transient_secular`].

use std::env;

use num_complex::Complex64;
use thiserror::Error;

use crate::diagnostics::hermiticity_defect;
use crate::model::{FrequencyReport, MultiToneHamiltonian};
use crate::operator::Operator;
use crate::series::{OperatorSeries, SeriesConfig, SeriesError};
use crate::tone::ToneConfig;

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 6;
pub const MAX_DYSON_ORDER: usize = 6;
pub const DEFAULT_GRID_POINTS: usize = 64;
pub const MAX_TERMS_ENV: &str = "EFFHAM_MAX_TERMS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("order {order} outside the supported range {min}..={max}")]
    OrderRange { order: usize, min: usize, max: usize },
    #[error("RWA commutator form requires distinct frequencies without ambiguous three-sums; use secular extraction instead")]
    NotDistinct,
}

impl BuildError {
    /// Numerical-guard failures, as opposed to caller mistakes.
    pub fn is_guard(&self) -> bool {
        matches!(self, BuildError::Series(_))
    }
}

/// How nested integrals treat their lower limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `∫₀ᵗ`, all lower-limit constants kept.
    Definite,
    /// Antiderivatives without constants (transients dropped).
    Markovian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub series: SeriesConfig,
    pub grid_points: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self { series: SeriesConfig::default(), grid_points: DEFAULT_GRID_POINTS }
    }
}

impl BuildConfig {
    /// Default configuration with the term guard taken from `EFFHAM_MAX_TERMS` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(n) = env::var(MAX_TERMS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            cfg.series.max_terms = n;
        }
        cfg
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.series.max_terms = max_terms;
        self
    }

    pub fn with_tol_zero(mut self, tol_zero: f64) -> Self {
        self.series.tone.tol_zero = tol_zero;
        self
    }

    pub fn tone(&self) -> &ToneConfig {
        &self.series.tone
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveOrderResult {
    pub order: usize,
    /// Definite-integral series `H_eff^(n)(t)`.
    pub series: OperatorSeries,
    /// Time-independent secular generator (zero-frequency, power-0 part of the
    /// lower-limit-free series).
    pub secular: Operator,
    /// Zero-frequency, power-0 part of the definite series, transients included.
    pub transient_secular: Operator,
    pub secular_growth_flag: bool,
    /// Maximum hermiticity defect of `series` on the evaluation grid.
    pub max_hermiticity_defect_on_grid: f64,
    pub grid: Vec<f64>,
}

/// `n` points from 0 to `tmax` inclusive.
pub fn time_grid(tmax: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| tmax * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Default grid span `10 / min ω`.
pub fn default_tmax(model: &MultiToneHamiltonian) -> f64 {
    10.0 / model.min_omega()
}

fn minus_i_pow(k: usize) -> Complex64 {
    // (1/i)^k = (−i)^k
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn check_order(order: usize, min: usize, max: usize) -> Result<(), BuildError> {
    if order < min || order > max {
        return Err(BuildError::OrderRange { order, min, max });
    }
    Ok(())
}

/// Builder bound to one model; caches the symbolic `H_I(t)`.
#[derive(Debug, Clone)]
pub struct EffectiveBuilder<'a> {
    model: &'a MultiToneHamiltonian,
    hi: OperatorSeries,
    cfg: BuildConfig,
}

impl<'a> EffectiveBuilder<'a> {
    pub fn new(model: &'a MultiToneHamiltonian) -> Self {
        Self::with_config(model, BuildConfig::default())
    }

    pub fn with_config(model: &'a MultiToneHamiltonian, cfg: BuildConfig) -> Self {
        Self { model, hi: model.to_operator_series(), cfg }
    }

    pub fn model(&self) -> &MultiToneHamiltonian {
        self.model
    }

    pub fn config(&self) -> &BuildConfig {
        &self.cfg
    }

    pub fn hi_series(&self) -> &OperatorSeries {
        &self.hi
    }

    fn integrate(&self, s: &OperatorSeries, conv: Convention) -> Result<OperatorSeries, SeriesError> {
        match conv {
            Convention::Definite => s.integrate0t(self.cfg.tone()),
            Convention::Markovian => s.antiderivative(self.cfg.tone()),
        }
    }

    /// `∫ H_I(t₁) ∫ H_I(t₂) ⋯` with `depth` nested integrals; `depth ≥ 1`.
    pub fn nested_integral(&self, depth: usize, conv: Convention) -> Result<OperatorSeries, BuildError> {
        assert!(depth >= 1);
        let mut acc = self.integrate(&self.hi, conv)?;
        for _ in 1..depth {
            let inner = self.hi.mul(&acc, &self.cfg.series)?;
            acc = self.integrate(&inner, conv)?;
        }
        Ok(acc)
    }

    /// Order-`n` term under the given integration convention.
    pub fn heff_n_with(&self, n: usize, conv: Convention) -> Result<OperatorSeries, BuildError> {
        check_order(n, MIN_ORDER, MAX_ORDER)?;
        let nested = self.nested_integral(n - 1, conv)?;
        let product = self.hi.mul(&nested, &self.cfg.series)?;
        Ok(product.scale(minus_i_pow(n - 1)))
    }

    pub fn heff_n_timedep(&self, n: usize) -> Result<OperatorSeries, BuildError> {
        self.heff_n_with(n, Convention::Definite)
    }

    /// `(1/i) H_I(t) ∫₀ᵗ H_I(t′) dt′`.
    pub fn heff2_timedep(&self) -> Result<OperatorSeries, BuildError> {
        let integral = self.hi.integrate0t(self.cfg.tone())?;
        let product = self.hi.mul(&integral, &self.cfg.series)?;
        Ok(product.scale(minus_i_pow(1)))
    }

    /// `(1/i)² H_I(t) ∫₀ᵗ H_I(t₁) ∫₀^{t₁} H_I(t₂) dt₂ dt₁`.
    pub fn heff3_timedep(&self) -> Result<OperatorSeries, BuildError> {
        let inner = self.hi.integrate0t(self.cfg.tone())?;
        let middle = self.hi.mul(&inner, &self.cfg.series)?.integrate0t(self.cfg.tone())?;
        let product = self.hi.mul(&middle, &self.cfg.series)?;
        Ok(product.scale(minus_i_pow(2)))
    }

    /// `Σ_m [h_m, h_m†] / ω_m`; requires a passing frequency report.
    pub fn heff2_rwa(&self, report: &FrequencyReport) -> Result<Operator, BuildError> {
        if !report.passes() {
            return Err(BuildError::NotDistinct);
        }
        let mut out = Operator::zeros(self.model.dim());
        for tone in self.model.tones() {
            let h = tone.h();
            let h_dag = h.adjoint();
            let comm = &(h * &h_dag) - &(&h_dag * h);
            out += &comm.scale_real(1.0 / tone.omega());
        }
        Ok(out)
    }

    pub fn heff_secular(&self, n: usize) -> Result<EffectiveOrderResult, BuildError> {
        let tmax = default_tmax(self.model);
        self.heff_secular_on(n, &time_grid(tmax, self.cfg.grid_points))
    }

    /// Secular extraction with the hermiticity defect sampled on `grid`.
    pub fn heff_secular_on(&self, n: usize, grid: &[f64]) -> Result<EffectiveOrderResult, BuildError> {
        let tol = self.cfg.tone().tol_zero;
        let series = self.heff_n_with(n, Convention::Definite)?;
        let markovian = self.heff_n_with(n, Convention::Markovian)?;
        let secular = markovian.secular(tol);
        let transient_secular = series.secular(tol);
        let max_defect = grid.iter().map(|&t| hermiticity_defect(&series.eval(t))).fold(0.0, f64::max);
        Ok(EffectiveOrderResult {
            order: n,
            secular,
            transient_secular,
            secular_growth_flag: markovian.has_secular_growth(tol),
            max_hermiticity_defect_on_grid: max_defect,
            series,
            grid: grid.to_vec(),
        })
    }

    /// `U^(n)(t)`, built recursively as `(1/i) ∫₀ᵗ H_I U^(n−1)`.
    pub fn dyson_term(&self, n: usize) -> Result<OperatorSeries, BuildError> {
        Ok(self.dyson_terms(n)?.pop().expect("at least one term"))
    }

    /// `[U^(1), …, U^(n_max)]`.
    pub fn dyson_terms(&self, n_max: usize) -> Result<Vec<OperatorSeries>, BuildError> {
        check_order(n_max, 1, MAX_DYSON_ORDER)?;
        let minus_i = minus_i_pow(1);
        let mut terms = Vec::with_capacity(n_max);
        let mut current = self.hi.integrate0t(self.cfg.tone())?.scale(minus_i);
        terms.push(current.clone());
        for _ in 1..n_max {
            let product = self.hi.mul(&current, &self.cfg.series)?;
            current = product.integrate0t(self.cfg.tone())?.scale(minus_i);
            terms.push(current.clone());
        }
        Ok(terms)
    }

    /// `I + Σ_{n=1..N} U^(n)(t)`.
    pub fn dyson_truncated(&self, order: usize, t: f64) -> Result<Operator, BuildError> {
        let terms = self.dyson_terms(order)?;
        Ok(truncated_sum(self.model.dim(), &terms, t))
    }
}

/// `I + Σ terms(t)` for precomputed Dyson terms.
pub fn truncated_sum(dim: usize, terms: &[OperatorSeries], t: f64) -> Operator {
    let mut out = Operator::identity(dim);
    for term in terms {
        out += &term.eval(t);
    }
    out
}

pub fn heff2_timedep(model: &MultiToneHamiltonian) -> Result<OperatorSeries, BuildError> {
    EffectiveBuilder::new(model).heff2_timedep()
}

pub fn heff2_rwa(model: &MultiToneHamiltonian, report: &FrequencyReport) -> Result<Operator, BuildError> {
    EffectiveBuilder::new(model).heff2_rwa(report)
}

pub fn heff3_timedep(model: &MultiToneHamiltonian) -> Result<OperatorSeries, BuildError> {
    EffectiveBuilder::new(model).heff3_timedep()
}

pub fn heff_n_timedep(model: &MultiToneHamiltonian, n: usize) -> Result<OperatorSeries, BuildError> {
    EffectiveBuilder::new(model).heff_n_timedep(n)
}

pub fn heff_secular(model: &MultiToneHamiltonian, n: usize, tol_zero: f64) -> Result<EffectiveOrderResult, BuildError> {
    EffectiveBuilder::with_config(model, BuildConfig::default().with_tol_zero(tol_zero)).heff_secular(n)
}

pub fn dyson_term(model: &MultiToneHamiltonian, n: usize) -> Result<OperatorSeries, BuildError> {
    EffectiveBuilder::new(model).dyson_term(n)
}

pub fn dyson_truncated(model: &MultiToneHamiltonian, order: usize, t: f64) -> Result<Operator, BuildError> {
    EffectiveBuilder::new(model).dyson_truncated(order, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::unitarity_defect;
    use crate::operator::{make_standard_operator, StandardOp};
    use crate::oracle::quadrature::adaptive_gauss_kronrod;
    use crate::series::collapsed_relative_gap;
    use std::f64::consts::PI;

    fn sop(kind: StandardOp) -> Operator {
        make_standard_operator(kind, 2).unwrap()
    }

    fn scalar_model(g: f64, w: f64) -> MultiToneHamiltonian {
        MultiToneHamiltonian::from_pairs(vec![(Operator::from_real_rows(&[&[g]]).unwrap(), w)]).unwrap()
    }

    fn noncommuting(g: f64) -> MultiToneHamiltonian {
        MultiToneHamiltonian::from_pairs(vec![
            (sop(StandardOp::SigmaPlus).scale_real(g), 5.0),
            (sop(StandardOp::SigmaZ).scale_real(g), 12.0),
        ])
        .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn heff2_scalar_closed_form() {
        // H = 2g cos ωt, ∫H = 2g sin(ωt)/ω, so (1/i)H∫H = −i(2g²/ω) sin 2ωt.
        let m = scalar_model(1.0, 1.0);
        let s = heff2_timedep(&m).unwrap();
        let v = s.eval(PI / 4.0).get(0, 0);
        assert!((v - c(0.0, -2.0)).norm() < 1e-14);

        // Quadrature oracle on the same integrand at a generic time.
        let t = 0.83;
        let h = |x: f64| m.evaluate_hi(x).get(0, 0);
        let integral = adaptive_gauss_kronrod(h, 0.0, t, 1e-14).unwrap();
        let want = c(0.0, -1.0) * h(t) * integral;
        assert!((s.eval(t).get(0, 0) - want).norm() < 1e-12);
    }

    #[test]
    fn builders_vanish_at_zero() {
        let m = noncommuting(0.7);
        let b = EffectiveBuilder::new(&m);
        for n in 2..=5 {
            assert!(b.heff_n_timedep(n).unwrap().eval(0.0).frobenius_norm() < 1e-13, "order {n}");
        }
        assert!(b.heff2_timedep().unwrap().eval(0.0).frobenius_norm() < 1e-14);
        assert!(b.heff3_timedep().unwrap().eval(0.0).frobenius_norm() < 1e-14);
        for n in 1..=6 {
            assert!(b.dyson_term(n).unwrap().eval(0.0).frobenius_norm() < 1e-13);
            assert!(b.dyson_truncated(n, 0.0).unwrap().distance(&Operator::identity(2)) < 1e-13);
        }
    }

    #[test]
    fn single_tone_secular_is_commutator_over_omega() {
        let m = MultiToneHamiltonian::from_pairs(vec![(sop(StandardOp::SigmaPlus), 5.0)]).unwrap();
        let s = heff2_timedep(&m).unwrap();
        let want = sop(StandardOp::SigmaZ).scale_real(0.2);
        assert!(s.secular(1e-9).distance(&want) < 1e-15);

        // Long-time average of the closed form approaches the same matrix.
        let n = 4000;
        let tmax = 2.0 * PI / 5.0 * 200.0;
        let mut avg = Operator::zeros(2);
        for k in 0..n {
            avg += &s.eval(tmax * (k as f64 + 0.5) / n as f64);
        }
        assert!(avg.scale_real(1.0 / n as f64).distance(&want) < 1e-3);

        let r = heff_secular(&m, 2, 1e-9).unwrap();
        assert!(r.secular.distance(&want) < 1e-15);
        assert!(hermiticity_defect(&r.secular) < 1e-13);
        assert!(!r.secular_growth_flag);
    }

    #[test]
    fn rwa_jaynes_cummings_form() {
        let g = 0.3;
        let delta = 2.0;
        let a = make_standard_operator(StandardOp::Annihilate, 3).unwrap();
        let h = sop(StandardOp::SigmaPlus).tensor_product(&a).unwrap().scale_real(g);
        let m = MultiToneHamiltonian::from_pairs(vec![(h, delta)]).unwrap();
        let report = m.frequency_report(1e-9, 1e-3).unwrap();
        let rwa = heff2_rwa(&m, &report).unwrap();

        let sp = sop(StandardOp::SigmaPlus);
        let sm = sop(StandardOp::SigmaMinus);
        let ad = a.adjoint();
        let first = (&sp * &sm).tensor_product(&(&a * &ad)).unwrap();
        let second = (&sm * &sp).tensor_product(&(&ad * &a)).unwrap();
        let want = (&first - &second).scale_real(g * g / delta);
        assert!(rwa.distance(&want) < 1e-15);
        assert!(hermiticity_defect(&rwa) < 1e-13);
    }

    #[test]
    fn rwa_edge_cases() {
        let m = scalar_model(0.4, 2.0);
        let report = m.frequency_report(1e-9, 1e-3).unwrap();
        assert!(heff2_rwa(&m, &report).unwrap().is_zero());

        let degenerate = MultiToneHamiltonian::from_pairs(vec![(sop(StandardOp::SigmaPlus), 3.0), (sop(StandardOp::SigmaZ), 3.0)]).unwrap();
        let report = degenerate.frequency_report(1e-9, 1e-3).unwrap();
        assert_eq!(heff2_rwa(&degenerate, &report), Err(BuildError::NotDistinct));
        // The secular route still works and keeps the cross terms.
        assert!(heff_secular(&degenerate, 2, 1e-9).is_ok());
    }

    #[test]
    fn heff3_scalar_matches_nested_quadrature() {
        let m = scalar_model(1.0, 1.0);
        let t = 0.9;
        let s = heff3_timedep(&m).unwrap();
        let h = |x: f64| m.evaluate_hi(x).get(0, 0);
        let inner = |x: f64| adaptive_gauss_kronrod(h, 0.0, x, 1e-14).unwrap();
        let middle = adaptive_gauss_kronrod(|x| h(x) * inner(x), 0.0, t, 1e-13).unwrap();
        let want = c(-1.0, 0.0) * h(t) * middle;
        assert!((s.eval(t).get(0, 0) - want).norm() < 1e-9);
    }

    #[test]
    fn heff3_noncommuting_is_not_hermitian() {
        let m = noncommuting(1.0);
        let s = heff3_timedep(&m).unwrap();
        assert!(hermiticity_defect(&s.eval(0.3)) > 1e-3);
    }

    #[test]
    fn general_order_matches_dedicated_builders() {
        let m = noncommuting(0.6);
        let b = EffectiveBuilder::new(&m);
        let h2 = b.heff2_timedep().unwrap();
        let h3 = b.heff3_timedep().unwrap();
        let n2 = b.heff_n_timedep(2).unwrap();
        let n3 = b.heff_n_timedep(3).unwrap();
        for k in 0..20 {
            let t = 0.173 * k as f64;
            assert!(h2.eval(t).distance(&n2.eval(t)) < 1e-12);
            assert!(h3.eval(t).distance(&n3.eval(t)) < 1e-12);
        }
    }

    #[test]
    fn order_four_scalar_matches_quadrature() {
        let m = scalar_model(1.0, 1.0);
        let t = 0.7;
        let s = heff_n_timedep(&m, 4).unwrap();
        // For a scalar H the nested integral is (∫H)^3/3!.
        let h = |x: f64| m.evaluate_hi(x).get(0, 0);
        let k1 = adaptive_gauss_kronrod(h, 0.0, t, 1e-14).unwrap();
        let want = c(0.0, 1.0) * h(t) * k1 * k1 * k1 / 6.0;
        assert!((s.eval(t).get(0, 0) - want).norm() < 1e-8);
    }

    #[test]
    fn order_range_errors() {
        let m = scalar_model(1.0, 1.0);
        let b = EffectiveBuilder::new(&m);
        assert!(matches!(b.heff_n_timedep(1), Err(BuildError::OrderRange { .. })));
        assert!(matches!(b.heff_n_timedep(7), Err(BuildError::OrderRange { .. })));
        assert!(matches!(b.dyson_term(0), Err(BuildError::OrderRange { .. })));
        assert!(matches!(b.dyson_term(7), Err(BuildError::OrderRange { .. })));
    }

    #[test]
    fn term_guard_is_enforced() {
        let m = noncommuting(1.0);
        let b = EffectiveBuilder::with_config(&m, BuildConfig::default().with_max_terms(50));
        let err = b.heff_n_timedep(5).unwrap_err();
        assert!(err.is_guard(), "{err}");
    }

    #[test]
    fn dyson_first_order_scalar() {
        // U^(1) = −i (2g/ω) sin ωt; zero at ωt = π.
        let m = scalar_model(1.0, 2.0);
        let u1 = dyson_term(&m, 1).unwrap();
        assert!(u1.eval(PI / 2.0).get(0, 0).norm() < 1e-15);
        let t = 0.4;
        assert!((u1.eval(t).get(0, 0) - c(0.0, -(2.0f64 * t).sin())).norm() < 1e-15);
    }

    #[test]
    fn dyson_recursion_identity() {
        let m = noncommuting(0.8);
        let b = EffectiveBuilder::new(&m);
        let terms = b.dyson_terms(5).unwrap();
        let hi = b.hi_series();
        for n in 2..=5 {
            let du = terms[n - 1].differentiate(&ToneConfig::default());
            for k in 0..20 {
                let t = 0.211 * k as f64;
                let want = (&hi.eval(t) * &terms[n - 2].eval(t)).scale(c(0.0, -1.0));
                assert!(du.eval(t).distance(&want) < 1e-11 * want.frobenius_norm().max(1.0), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn heff_is_i_times_dyson_derivative() {
        let m = noncommuting(0.5);
        let b = EffectiveBuilder::new(&m);
        let tone = ToneConfig::default();
        for n in 2..=5 {
            let heff = b.heff_n_timedep(n).unwrap();
            let rhs = b.dyson_term(n).unwrap().differentiate(&tone).scale(c(0.0, 1.0));
            let gap = collapsed_relative_gap(&heff.collapse(1e-9), &rhs.collapse(1e-9), 1e-9);
            assert!(gap < 1e-11, "n={n} gap={gap}");
        }
    }

    #[test]
    fn truncated_dyson_defects() {
        let m = scalar_model(1.0, 1.0);
        assert!(unitarity_defect(&dyson_truncated(&m, 2, 0.8).unwrap()) > 1e-3);
        let weak = scalar_model(1e-3, 1.0);
        assert!(unitarity_defect(&dyson_truncated(&weak, 4, 1.0).unwrap()) < 1e-11);
    }

    #[test]
    fn scaling_homogeneity() {
        let m = noncommuting(0.9);
        let lambda = 0.37;
        let ms = m.scaled(lambda);
        for n in 2..=4 {
            let a = heff_n_timedep(&m, n).unwrap();
            let b = heff_n_timedep(&ms, n).unwrap();
            let scaled = a.scale(c(lambda.powi(n as i32), 0.0));
            let gap = collapsed_relative_gap(&scaled.collapse(1e-9), &b.collapse(1e-9), 1e-9);
            assert!(gap < 1e-12, "n={n} gap={gap}");
        }
    }

    #[test]
    fn zero_model_baselines() {
        let m = MultiToneHamiltonian::from_pairs(vec![(Operator::zeros(2), 1.0), (Operator::zeros(2), 2.0)]).unwrap();
        let b = EffectiveBuilder::new(&m);
        for n in 2..=4 {
            assert!(b.heff_n_timedep(n).unwrap().is_zero());
            assert!(b.heff_secular(n).unwrap().secular.is_zero());
        }
        assert!(b.dyson_term(3).unwrap().is_zero());
        assert_eq!(b.dyson_truncated(3, 1.3).unwrap(), Operator::identity(2));
    }

    #[test]
    fn third_order_secular_conventions() {
        // Resonant triple 1 + 1 − 2 = 0 with generic complex couplings.
        let h1 = Operator::from_rows(vec![
            vec![c(0.1, 0.2), c(0.5, -0.3), c(0.0, 0.4)],
            vec![c(-0.2, 0.1), c(0.3, 0.0), c(0.6, 0.2)],
            vec![c(0.4, -0.1), c(0.0, 0.3), c(-0.5, 0.1)],
        ])
        .unwrap();
        let h2 = Operator::from_rows(vec![
            vec![c(0.3, 0.0), c(-0.1, 0.2), c(0.2, 0.2)],
            vec![c(0.0, -0.4), c(0.1, 0.1), c(0.0, 0.0)],
            vec![c(0.5, 0.0), c(-0.3, 0.3), c(0.2, -0.2)],
        ])
        .unwrap();
        let m = MultiToneHamiltonian::from_pairs(vec![(h1, 1.0), (h2, 2.0)]).unwrap();
        assert!(m.frequency_report(1e-9, 1e-3).unwrap().passes());
        let r = heff_secular(&m, 3, 1e-9).unwrap();
        assert!(r.secular.frobenius_norm() > 1e-3);
        assert!(hermiticity_defect(&r.secular) < 1e-10);
        assert!(!r.secular_growth_flag);
        // Transient products from the lower limits break Hermiticity.
        assert!(hermiticity_defect(&r.transient_secular) > 1e-3);
    }

    #[test]
    fn scalar_secular_vanishes() {
        let r = heff_secular(&scalar_model(0.8, 1.5), 2, 1e-9).unwrap();
        assert!(r.secular.frobenius_norm() < 1e-15);
    }

    #[test]
    fn fourth_order_flags_secular_growth() {
        let m = MultiToneHamiltonian::from_pairs(vec![(sop(StandardOp::SigmaPlus), 1.0)]).unwrap();
        let r = heff_secular(&m, 4, 1e-9).unwrap();
        assert!(r.secular_growth_flag);
    }

    #[test]
    fn env_override() {
        // Read path only; the variable is not set in the test environment.
        let cfg = BuildConfig::from_env();
        assert!(cfg.series.max_terms > 0);
    }
}
