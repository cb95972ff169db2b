//! Effective Hamiltonians of multi-tone interaction-picture models.
//!
//! The pipeline runs from a [`MultiToneHamiltonian`] (built in code, from the
//! [`zoo`], or compiled from a `.ham` description via [`dsl`]) through the
//! closed-form [`builder`] to the [`diagnostics`] and the independent
//! numerical references in [`oracle`].

pub mod builder;
pub mod diagnostics;
pub mod dsl;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod report;
pub mod series;
pub mod tone;
pub mod zoo;

pub use builder::{BuildConfig, BuildError, EffectiveBuilder, EffectiveOrderResult};
pub use diagnostics::{eq6_gap, hermiticity_defect, unitarity_defect};
pub use model::{FrequencyReport, ModelError, MultiToneHamiltonian, ToneTerm};
pub use operator::{make_standard_operator, Operator, OperatorError, StandardOp};
pub use series::{OperatorSeries, SeriesConfig, SeriesError};
pub use tone::{ToneConfig, ToneError, ToneMono, TonePoly};
pub use zoo::{make_model, ZooModel};
pub use report::{run_report, ModelSource, Report, ReportError, ReportOptions};
