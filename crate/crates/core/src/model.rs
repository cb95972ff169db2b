//! Multi-tone interaction-picture Hamiltonians
//! `H_I(t) = Σ_m (h_m e^{iω_m t} + h_m† e^{−iω_m t})`, with ħ = 1.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::operator::Operator;
use crate::series::OperatorSeries;
use crate::tone::TonePoly;

/// Energy and frequency share units.
pub const HBAR: f64 = 1.0;

pub const DEFAULT_TOL_ZERO: f64 = 1e-9;
pub const DEFAULT_GAP_MIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a model needs at least one tone")]
    NoTones,
    #[error("tone {index}: frequency must be positive and finite, got {omega}")]
    BadFrequency { index: usize, omega: f64 },
    #[error("tone {index}: operator dimension {found} does not match model dimension {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("tol_zero ({tol_zero}) must be smaller than gap_min ({gap_min})")]
    Thresholds { tol_zero: f64, gap_min: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneTerm {
    h: Operator,
    omega: f64,
}

impl ToneTerm {
    pub fn new(h: Operator, omega: f64) -> Self {
        Self { h, omega }
    }

    pub fn h(&self) -> &Operator {
        &self.h
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiToneHamiltonian {
    dim: usize,
    tones: Vec<ToneTerm>,
}

impl MultiToneHamiltonian {
    /// Validates the tone list. Degenerate frequencies are accepted here and
    /// flagged by [`MultiToneHamiltonian::frequency_report`].
    pub fn new(tones: Vec<ToneTerm>) -> Result<Self, ModelError> {
        let first = tones.first().ok_or(ModelError::NoTones)?;
        let dim = first.h.dim();
        for (index, tone) in tones.iter().enumerate() {
            if !(tone.omega.is_finite() && tone.omega > 0.0) {
                return Err(ModelError::BadFrequency { index, omega: tone.omega });
            }
            if tone.h.dim() != dim {
                return Err(ModelError::DimensionMismatch { index, expected: dim, found: tone.h.dim() });
            }
        }
        Ok(Self { dim, tones })
    }

    pub fn from_pairs(pairs: Vec<(Operator, f64)>) -> Result<Self, ModelError> {
        Self::new(pairs.into_iter().map(|(h, w)| ToneTerm::new(h, w)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tones(&self) -> &[ToneTerm] {
        &self.tones
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.tones.iter().map(|t| t.omega).collect()
    }

    pub fn min_omega(&self) -> f64 {
        self.tones.iter().map(|t| t.omega).fold(f64::INFINITY, f64::min)
    }

    pub fn max_omega(&self) -> f64 {
        self.tones.iter().map(|t| t.omega).fold(0.0, f64::max)
    }

    /// Model with every `h_m` multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            dim: self.dim,
            tones: self.tones.iter().map(|t| ToneTerm::new(t.h.scale_real(lambda), t.omega)).collect(),
        }
    }

    /// `H_I(t)`. Each entry is `z + conj(z')` paired with its transpose
    /// partner, so the result is Hermitian up to the sum's own rounding.
    pub fn evaluate_hi(&self, t: f64) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for tone in &self.tones {
            let phase = Complex64::new(0.0, tone.omega * t).exp();
            let term = tone.h.scale(phase);
            out += &term;
            out += &term.adjoint();
        }
        out
    }

    /// Symbolic form: `(h_m, e^{iω_m t})` and `(h_m†, e^{−iω_m t})` per tone, in tone order.
    pub fn to_operator_series(&self) -> OperatorSeries {
        let mut entries = Vec::with_capacity(2 * self.tones.len());
        for tone in &self.tones {
            entries.push((tone.h.clone(), TonePoly::tone(tone.omega)));
            entries.push((tone.h.adjoint(), TonePoly::tone(-tone.omega)));
        }
        OperatorSeries::from_raw(self.dim, entries)
    }

    /// Checks pairwise distinctness and classifies every signed three-frequency
    /// sum `±ω_a ± ω_b ± ω_c` over index multisets with repetition.
    pub fn frequency_report(&self, tol_zero: f64, gap_min: f64) -> Result<FrequencyReport, ModelError> {
        if !(tol_zero < gap_min) {
            return Err(ModelError::Thresholds { tol_zero, gap_min });
        }
        let omegas = self.omegas();
        let n = omegas.len();

        let mut min_gap: Option<f64> = None;
        for a in 0..n {
            for b in a + 1..n {
                let g = (omegas[a] - omegas[b]).abs();
                min_gap = Some(min_gap.map_or(g, |m| m.min(g)));
            }
        }
        let pairwise_distinct = min_gap.is_none_or(|g| g >= gap_min);

        let mut seen = BTreeSet::new();
        let mut three_sum_classes = Vec::new();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for signs in 0..8u8 {
                        let s = |bit: u8| if signs & (1 << bit) == 0 { 1i8 } else { -1i8 };
                        let mut triple = [(s(2), a), (s(1), b), (s(0), c)];
                        triple.sort();
                        if !seen.insert(triple) {
                            continue;
                        }
                        let sum: f64 = triple.iter().map(|&(sg, i)| f64::from(sg) * omegas[i]).sum();
                        let class = SumClass::classify(sum, tol_zero, gap_min);
                        three_sum_classes.push(ThreeSum { triple, sum, class });
                    }
                }
            }
        }
        let ambiguous_count = three_sum_classes.iter().filter(|s| s.class == SumClass::Ambiguous).count();
        Ok(FrequencyReport { pairwise_distinct, min_pair_gap: min_gap, three_sum_classes, ambiguous_count, tol_zero, gap_min })
    }

    /// `max ‖[H_I(t₁), H_I(t₂)]‖_F / max(1, ‖H_I(t₁)‖_F‖H_I(t₂)‖_F)` over the pairs.
    pub fn commutation_probe(&self, time_pairs: &[(f64, f64)]) -> f64 {
        time_pairs
            .iter()
            .map(|&(t1, t2)| {
                let a = self.evaluate_hi(t1);
                let b = self.evaluate_hi(t2);
                let comm = &(&a * &b) - &(&b * &a);
                comm.frobenius_norm() / (a.frobenius_norm() * b.frobenius_norm()).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumClass {
    Zero,
    Nonzero,
    Ambiguous,
}

impl SumClass {
    pub fn classify(sum: f64, tol_zero: f64, gap_min: f64) -> Self {
        let a = sum.abs();
        if a <= tol_zero {
            SumClass::Zero
        } else if a >= gap_min {
            SumClass::Nonzero
        } else {
            SumClass::Ambiguous
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeSum {
    /// Sorted `(sign, tone index)` triple.
    pub triple: [(i8, usize); 3],
    pub sum: f64,
    pub class: SumClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub pairwise_distinct: bool,
    /// `None` for single-tone models.
    pub min_pair_gap: Option<f64>,
    pub three_sum_classes: Vec<ThreeSum>,
    pub ambiguous_count: usize,
    pub tol_zero: f64,
    pub gap_min: f64,
}

impl FrequencyReport {
    /// Distinct frequencies and no ambiguous three-sums.
    pub fn passes(&self) -> bool {
        self.pairwise_distinct && self.ambiguous_count == 0
    }

    pub fn resonant_count(&self) -> usize {
        self.three_sum_classes.iter().filter(|s| s.class == SumClass::Zero).count()
    }
}
