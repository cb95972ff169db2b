//! Built-in reference models.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::MultiToneHamiltonian;
use crate::operator::{make_standard_operator, Operator, StandardOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown built-in model `{0}` (expected one of: jc_detuned, raman_lambda, commuting_diag, noncommuting_two_tone, scalar_single_tone)")]
pub struct UnknownModel(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZooModel {
    JcDetuned,
    RamanLambda,
    CommutingDiag,
    NoncommutingTwoTone,
    ScalarSingleTone,
}

impl ZooModel {
    pub const ALL: [ZooModel; 5] = [
        ZooModel::JcDetuned,
        ZooModel::RamanLambda,
        ZooModel::CommutingDiag,
        ZooModel::NoncommutingTwoTone,
        ZooModel::ScalarSingleTone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ZooModel::JcDetuned => "jc_detuned",
            ZooModel::RamanLambda => "raman_lambda",
            ZooModel::CommutingDiag => "commuting_diag",
            ZooModel::NoncommutingTwoTone => "noncommuting_two_tone",
            ZooModel::ScalarSingleTone => "scalar_single_tone",
        }
    }

    pub fn build(self) -> MultiToneHamiltonian {
        match self {
            ZooModel::JcDetuned => jc_detuned(0.05, 1.0),
            ZooModel::RamanLambda => raman_lambda(0.05, 0.05, 1.0, 0.3),
            ZooModel::CommutingDiag => commuting_diag(),
            ZooModel::NoncommutingTwoTone => noncommuting_two_tone(0.2),
            ZooModel::ScalarSingleTone => scalar_single_tone(1.0),
        }
    }
}

impl fmt::Display for ZooModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ZooModel {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ZooModel::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| UnknownModel(s.to_string()))
    }
}

pub fn make_model(name: &str) -> Result<MultiToneHamiltonian, UnknownModel> {
    Ok(name.parse::<ZooModel>()?.build())
}

fn std_op(kind: StandardOp, dim: usize) -> Operator {
    make_standard_operator(kind, dim).expect("valid standard operator")
}

fn pairs(p: Vec<(Operator, f64)>) -> MultiToneHamiltonian {
    MultiToneHamiltonian::from_pairs(p).expect("valid built-in model")
}

/// `g·(σ₊ ⊗ a)` on a qubit times a 5-level oscillator, detuned by `delta`.
pub fn jc_detuned(g: f64, delta: f64) -> MultiToneHamiltonian {
    let h = std_op(StandardOp::SigmaPlus, 2).tensor_product(&std_op(StandardOp::Annihilate, 5)).expect("dim 10");
    pairs(vec![(h.scale_real(g), delta)])
}

/// Λ system with ground levels 0, 1 and excited level 2, each leg driven off
/// resonance: `g₁|e⟩⟨g₁|` at `Δ` and `g₂|e⟩⟨g₂|` at `Δ + δ`.
pub fn raman_lambda(g1: f64, g2: f64, delta: f64, split: f64) -> MultiToneHamiltonian {
    pairs(vec![
        (std_op(StandardOp::Projector(2, 0), 3).scale_real(g1), delta),
        (std_op(StandardOp::Projector(2, 1), 3).scale_real(g2), delta + split),
    ])
}

pub fn commuting_diag() -> MultiToneHamiltonian {
    let d1 = Operator::from_real_rows(&[&[0.3, 0.0, 0.0], &[0.0, -0.2, 0.0], &[0.0, 0.0, 0.1]]).expect("3x3");
    let d2 = Operator::from_real_rows(&[&[0.1, 0.0, 0.0], &[0.0, 0.25, 0.0], &[0.0, 0.0, -0.15]]).expect("3x3");
    pairs(vec![(d1, 1.0), (d2, 2.3)])
}

/// `g σ₊` at ω = 5 and `g σ_z` at ω = 12.
pub fn noncommuting_two_tone(g: f64) -> MultiToneHamiltonian {
    pairs(vec![
        (std_op(StandardOp::SigmaPlus, 2).scale_real(g), 5.0),
        (std_op(StandardOp::SigmaZ, 2).scale_real(g), 12.0),
    ])
}

pub fn scalar_single_tone(g: f64) -> MultiToneHamiltonian {
    pairs(vec![(Operator::from_real_rows(&[&[g]]).expect("1x1"), 1.0)])
}
