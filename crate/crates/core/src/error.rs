//! Error types shared by all factorization and invariant computations.

use thiserror::Error;

/// Errors reported by factorization, invariant and approximation routines.
///
/// Numerical preconditions (invertibility margins, winding rounding gaps,
/// section stability) are checked explicitly and reported with the measured
/// quantity, so a caller can distinguish "the input is bad" from "the grid
/// or degree cap is too small".
#[derive(Debug, Error)]
pub enum Error {
    /// A function that must be invertible came too close to singular.
    #[error("near-singular input in {context}: margin {margin:.3e} below threshold {threshold:.3e}")]
    NearSingular {
        context: &'static str,
        margin: f64,
        threshold: f64,
    },

    /// A raw winding number did not round to an integer within the gap.
    #[error("ambiguous winding along axis {axis}: raw value {raw} is {gap:.3} away from an integer")]
    AmbiguousWinding { axis: usize, raw: f64, gap: f64 },

    /// A continuous logarithm was requested for a function with nonzero winding.
    #[error("continuous logarithm does not exist: winding vector {winding:?} is nonzero")]
    NonzeroWinding { winding: Vec<i32> },

    /// Adjacent samples differ in phase by more than the unwrapping limit.
    #[error("phase jump {jump:.3} rad between adjacent nodes exceeds {limit:.3}; grid too coarse")]
    PhaseJumpTooLarge { jump: f64, limit: f64 },

    /// The eigenvalue range of the input touches the forbidden set of the
    /// requested analytic function (branch cut or pole).
    #[error("eigenvalue range violates the domain of {function}: margin {margin:.3e}")]
    SpectrumViolation { function: &'static str, margin: f64 },

    /// An iterative approximation could not reach the requested tolerance.
    #[error("no convergence in {context}: achieved {achieved:.3e}, requested {requested:.3e}")]
    NoConvergence {
        context: &'static str,
        achieved: f64,
        requested: f64,
    },

    /// The sampling grid cannot resolve the requested degree.
    #[error("grid {grid:?} too coarse for degree {degree} (need more than 2*degree points per axis)")]
    GridTooCoarse { grid: Vec<usize>, degree: usize },

    /// A sample that must be invertible is singular.
    #[error("singular sample at node {node:?} (smallest singular value {sigma_min:.3e})")]
    SingularSample { node: Vec<usize>, sigma_min: f64 },

    /// A map that must take unitary values does not.
    #[error("sample at node {node:?} is not unitary: defect {defect:.3e} exceeds {tolerance:.3e}")]
    NotUnitary {
        node: Vec<usize>,
        defect: f64,
        tolerance: f64,
    },

    /// The input is not the identity on the required subtorus slice.
    #[error("input is not normalized on the x3 = 0 subtorus: defect {defect:.3e}")]
    NotNormalizedOnSubtorus { defect: f64 },

    /// The determinant of a matrix polynomial vanishes identically.
    #[error("matrix polynomial is identically singular")]
    IdenticallySingular,

    /// Kernel dimensions of Toeplitz sections disagree between section sizes.
    #[error("Toeplitz sections unstable: sizes {small} and {large} disagree ({detail})")]
    UnstableSections {
        small: usize,
        large: usize,
        detail: String,
    },

    /// A trigonometric approximant is too far from the target to preserve
    /// its invariants.
    #[error("approximation too coarse: sup-error {sup_error:.3e} exceeds {limit:.3e}")]
    ApproximationTooCoarse { sup_error: f64, limit: f64 },

    /// A certificate could not be decided because the degree integral did
    /// not round cleanly.
    #[error("inconclusive certificate: raw degree {raw} is {gap:.3} away from an integer")]
    Inconclusive { raw: f64, gap: f64 },
}

impl Error {
    /// Stable machine-readable kind tag, used in CLI reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NearSingular { .. } => "near_singular",
            Error::AmbiguousWinding { .. } => "ambiguous_winding",
            Error::NonzeroWinding { .. } => "nonzero_winding",
            Error::PhaseJumpTooLarge { .. } => "phase_jump_too_large",
            Error::SpectrumViolation { .. } => "spectrum_violation",
            Error::NoConvergence { .. } => "no_convergence",
            Error::GridTooCoarse { .. } => "grid_too_coarse",
            Error::SingularSample { .. } => "singular_sample",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotNormalizedOnSubtorus { .. } => "not_normalized_on_subtorus",
            Error::IdenticallySingular => "identically_singular",
            Error::UnstableSections { .. } => "unstable_sections",
            Error::ApproximationTooCoarse { .. } => "approximation_too_coarse",
            Error::Inconclusive { .. } => "inconclusive",
        }
    }

    /// True for outcomes that signal a borderline input rather than a bug:
    /// the CLI maps these to a dedicated exit code.
    pub fn is_borderline(&self) -> bool {
        matches!(
            self,
            Error::NearSingular { .. }
                | Error::Inconclusive { .. }
                | Error::AmbiguousWinding { .. }
                | Error::UnstableSections { .. }
        )
    }
}
