//! Fixed-length fingerprint templates built from minutia pairs.
//!
//! Each ordered pair of minutiae contributes a phase term that depends only
//! on the pair's distance `R` and direction `φ` (and, optionally, the
//! orientation difference of its endpoints). Summing those terms on a fixed
//! grid gives a complex matrix that is translation invariant by
//! construction and transforms by a per-row phase under rotation.
//!
//! Modules:
//! - [`minutiae`]: minutia sets, the text file format, pair geometry.
//! - [`spectral`]: grids, the `L` and `M` spectral functions, rotation and
//!   scaling phase laws.
//! - [`template_io`]: lossless text serialization of templates.
//! - [`matching`]: complex Pearson score, fusion, rotation search.
//! - [`baseline`]: the single-minutia log-polar spectral function.
//! - [`eval`]: genuine/impostor protocol, ROC, EER, angle histograms.
//! - [`synth`]: seeded synthetic databases.
//! - [`cost`]: analytic verification cost.

pub mod baseline;
pub mod cost;
pub mod error;
pub mod eval;
pub mod matching;
pub mod minutiae;
mod seeding;
pub mod spectral;
pub mod synth;
pub mod template_io;

pub use num_complex::Complex64;

pub use baseline::{baseline_match, compute_g, BaselineGrid, BaselineMatch, BaselineTemplate};
pub use cost::{verification_cost, CostBreakdown, CostModel};
pub use error::{Error, Result};
pub use eval::{roc_and_eer, Database, EvalReport, Evaluator, Roc, RocPoint};
pub use matching::{
    complex_pearson, fused_score, match_with_rotation, score, MatchResult, Matcher, RotationPreset, TemplatePair,
};
pub use minutiae::{
    admissible_pairs, pair_geometry, parse_minutiae, parse_minutiae_file, Minutia, MinutiaSet, PairGeometry,
};
pub use spectral::{
    compute_l, compute_m, compute_template, default_grid, transform_template, Family, GridPair, GridSpec,
    RadialProfile, SpectralTemplate, Variant,
};
pub use synth::{generate_finger, perturb, synth_database, NoiseModel, SynthProfile};
