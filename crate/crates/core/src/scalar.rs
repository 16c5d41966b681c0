use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar backing every state, formula and solver in the crate.
///
/// The associated constants carry the tolerance policy for the type: the
/// values for `f64` are the ones the invariants are stated against; the `f32`
/// values are scaled to single precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Constructive invariants (Hermiticity, trace, normalization).
    const EXACT_TOL: Self;
    /// Lower bound tolerated on eigenvalues and Bell weights.
    const PSD_TOL: Self;
    /// Branch probabilities below this are reported as zero-probability.
    const PROB_FLOOR: Self;
    /// Absolute bracket width at which bisection stops.
    const ROOT_TOL: Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f64 {
    const EXACT_TOL: Self = 1e-12;
    const PSD_TOL: Self = 1e-10;
    const PROB_FLOOR: Self = 1e-14;
    const ROOT_TOL: Self = 1e-12;
}

impl Real for f32 {
    const EXACT_TOL: Self = 1e-5;
    const PSD_TOL: Self = 1e-4;
    const PROB_FLOOR: Self = 1e-7;
    const ROOT_TOL: Self = 1e-6;
}
