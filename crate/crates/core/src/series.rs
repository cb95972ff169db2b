//! Operator-valued functions of time `Σ_e A_e · p_e(t)` with scalar
//! [`TonePoly`] coefficients.
//!
//! Entries are keyed by operator "slot": pushing an operator numerically equal
//! (relative Frobenius distance ≤ 1e−12) to an existing one adds the scalar
//! polynomials instead of growing the list.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::Operator;
use crate::tone::{ToneConfig, ToneError, TonePoly};

pub const SLOT_MERGE_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error(transparent)]
    Tone(#[from] ToneError),
    #[error("term-count guard: product would hold {count} monomials (limit {limit})")]
    TermGuard { count: usize, limit: usize },
    #[error("series dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub tone: ToneConfig,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { tone: ToneConfig::default(), max_terms: DEFAULT_MAX_TERMS }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeries {
    dim: usize,
    entries: Vec<(Operator, TonePoly)>,
}

/// Slot lookup keyed by the bit pattern of the operator norm; positive
/// doubles order like their bits, so a norm window is a bit range.
#[derive(Default)]
struct SlotIndex {
    by_norm: BTreeMap<u64, Vec<usize>>,
}

impl SlotIndex {
    fn find(&self, op: &Operator, norm: f64, entries: &[(Operator, TonePoly)]) -> Option<usize> {
        let lo = (norm * (1.0 - 2.0 * SLOT_MERGE_TOL)).to_bits();
        let hi = (norm * (1.0 + 2.0 * SLOT_MERGE_TOL)).to_bits();
        self.by_norm
            .range(lo..=hi)
            .flat_map(|(_, v)| v.iter().copied())
            .find(|&i| op.distance(&entries[i].0) <= SLOT_MERGE_TOL * norm.max(entries[i].0.frobenius_norm()))
    }

    fn insert(&mut self, norm: f64, idx: usize) {
        self.by_norm.entry(norm.to_bits()).or_default().push(idx);
    }
}

impl OperatorSeries {
    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    /// Constant series `op · 1`.
    pub fn constant(op: Operator) -> Self {
        let dim = op.dim();
        Self::from_raw(dim, vec![(op, TonePoly::constant(Complex64::new(1.0, 0.0)))])
    }

    /// Builds a merged series from arbitrary entries.
    pub fn from_raw(dim: usize, entries: Vec<(Operator, TonePoly)>) -> Self {
        Self::merge_with(dim, entries, &ToneConfig::default())
    }

    fn merge_with(dim: usize, raw: Vec<(Operator, TonePoly)>, cfg: &ToneConfig) -> Self {
        let mut entries: Vec<(Operator, TonePoly)> = Vec::with_capacity(raw.len());
        let mut index = SlotIndex::default();
        for (op, poly) in raw {
            assert_eq!(op.dim(), dim, "series entry dimension mismatch");
            if poly.is_zero() {
                continue;
            }
            let norm = op.frobenius_norm();
            if norm == 0.0 {
                continue;
            }
            match index.find(&op, norm, &entries) {
                Some(i) => entries[i].1 = entries[i].1.add_with(&poly, cfg),
                None => {
                    index.insert(norm, entries.len());
                    entries.push((op, poly));
                }
            }
        }
        entries.retain(|(_, p)| !p.is_zero());
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(Operator, TonePoly)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn monomial_count(&self) -> usize {
        self.entries.iter().map(|(_, p)| p.len()).sum()
    }

    pub fn eval(&self, t: f64) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for (op, poly) in &self.entries {
            out += &op.scale(poly.eval(t));
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|(op, p)| (op.clone(), p.scale(c))).filter(|(_, p)| !p.is_zero()).collect(),
        }
    }

    /// Multiplies every operator by `lambda`, leaving the time dependence alone.
    pub fn scale_operators(&self, lambda: f64) -> Self {
        Self::from_raw(self.dim, self.entries.iter().map(|(op, p)| (op.scale_real(lambda), p.clone())).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let mut raw = self.entries.clone();
        raw.extend(other.entries.iter().cloned());
        Ok(Self::from_raw(self.dim, raw))
    }

    /// `self(t) · other(t)`, expanded entry by entry.
    pub fn mul(&self, other: &Self, cfg: &SeriesConfig) -> Result<Self, SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let left: usize = self.entries.iter().map(|(_, p)| p.len()).sum();
        let right: usize = other.entries.iter().map(|(_, p)| p.len()).sum();
        let count = left.saturating_mul(right);
        if count > cfg.max_terms {
            return Err(SeriesError::TermGuard { count, limit: cfg.max_terms });
        }
        let mut raw = Vec::with_capacity(self.entries.len() * other.entries.len());
        for (a, p) in &self.entries {
            for (b, q) in &other.entries {
                let op = a * b;
                if op.is_zero() {
                    continue;
                }
                raw.push((op, p.mul_with(q, &cfg.tone)?));
            }
        }
        Ok(Self::merge_with(self.dim, raw, &cfg.tone))
    }

    fn map_polys(&self, cfg: &ToneConfig, f: impl Fn(&TonePoly) -> Result<TonePoly, ToneError>) -> Result<Self, SeriesError> {
        let mut raw = Vec::with_capacity(self.entries.len());
        for (op, p) in &self.entries {
            raw.push((op.clone(), f(p)?));
        }
        Ok(Self::merge_with(self.dim, raw, cfg))
    }

    /// Entrywise `∫₀ᵗ`.
    pub fn integrate0t(&self, cfg: &ToneConfig) -> Result<Self, SeriesError> {
        self.map_polys(cfg, |p| p.integrate0t_with(cfg))
    }

    /// Entrywise antiderivative without lower-limit constants.
    pub fn antiderivative(&self, cfg: &ToneConfig) -> Result<Self, SeriesError> {
        self.map_polys(cfg, |p| p.antiderivative_with(cfg))
    }

    pub fn differentiate(&self, cfg: &ToneConfig) -> Self {
        self.map_polys(cfg, |p| Ok(p.differentiate_with(cfg))).expect("differentiation cannot fail")
    }

    /// `Σ_e A_e · [zero-frequency, power-0 coefficient of p_e]`.
    pub fn secular(&self, tol_zero: f64) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for (op, p) in &self.entries {
            let c = p.constant_term(tol_zero);
            if c.re != 0.0 || c.im != 0.0 {
                out += &op.scale(c);
            }
        }
        out
    }

    /// True when some zero-frequency term grows as `t^k`, `k ≥ 1`.
    pub fn has_secular_growth(&self, tol_zero: f64) -> bool {
        self.entries.iter().any(|(_, p)| p.has_secular_growth(tol_zero))
    }

    /// Regroups the series as `Σ_{(Ω,k)} M_{Ω,k} t^k e^{iΩt}`, sorted by
    /// frequency then power. Two series describing the same function have the
    /// same collapsed form up to rounding, whatever their slot structure.
    pub fn collapse(&self, tol_zero: f64) -> Vec<CollapsedTerm> {
        let mut items: Vec<(f64, u32, usize, Complex64)> = Vec::new();
        for (idx, (_, p)) in self.entries.iter().enumerate() {
            for m in p.terms() {
                let f = if m.freq.abs() <= tol_zero { 0.0 } else { m.freq };
                items.push((f, m.power, idx, m.coeff));
            }
        }
        items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out: Vec<CollapsedTerm> = Vec::new();
        let mut anchor = f64::NAN;
        let mut start = 0;
        for (f, k, idx, c) in items {
            if !(anchor.is_finite() && (f - anchor).abs() <= tol_zero) {
                anchor = f;
                start = out.len();
            }
            let contrib = self.entries[idx].0.scale(c);
            match out[start..].iter_mut().find(|t| t.power == k) {
                Some(t) => t.op += &contrib,
                None => out.push(CollapsedTerm { freq: anchor, power: k, op: contrib }),
            }
        }
        out.sort_by(|a, b| a.freq.total_cmp(&b.freq).then(a.power.cmp(&b.power)));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedTerm {
    pub freq: f64,
    pub power: u32,
    pub op: Operator,
}

/// Largest coefficient mismatch between two collapsed series, relative to the
/// largest coefficient norm on either side. Slots present on one side only
/// count with their full norm.
pub fn collapsed_relative_gap(a: &[CollapsedTerm], b: &[CollapsedTerm], tol_zero: f64) -> f64 {
    let scale = a.iter().chain(b).map(|t| t.op.frobenius_norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    let mut used = vec![false; b.len()];
    for ta in a {
        let hit = b
            .iter()
            .enumerate()
            .find(|(j, tb)| !used[*j] && tb.power == ta.power && (tb.freq - ta.freq).abs() <= tol_zero);
        match hit {
            Some((j, tb)) => {
                used[j] = true;
                worst = worst.max(ta.op.distance(&tb.op));
            }
            None => worst = worst.max(ta.op.frobenius_norm()),
        }
    }
    for (j, tb) in b.iter().enumerate() {
        if !used[j] {
            worst = worst.max(tb.op.frobenius_norm());
        }
    }
    worst / scale
}
