//! Bell-label bookkeeping for arbitrary Bell-diagonal inputs.
//!
//! A Bell state is written as bits (x, z). With pair labels p, s, t:
//! step 1 passes iff x_s = x_p and leaves (x_p, z_p ^ z_s); the Hadamards
//! map that to (x', z') = (z_p ^ z_s, x_p); step 2 passes iff x' = x_t and,
//! after the heralded correction, every class leaves (x', z' ^ z_t).

use crate::error::Result;
use crate::model::{BellCoeffs, BellKind};
use crate::optics::OutcomeClass;
use crate::scalar::Real;

use super::{nonzero, ClassBranch, FailBranches, StepResult};

fn class_of(step1: bool, step2: bool) -> OutcomeClass {
    match (step1, step2) {
        (true, true) => OutcomeClass::BothSuccess,
        (false, true) => OutcomeClass::Fail1Success2,
        (true, false) => OutcomeClass::Success1Fail2,
        (false, false) => OutcomeClass::BothFail,
    }
}

fn slot(class: OutcomeClass) -> usize {
    OutcomeClass::ALL
        .iter()
        .position(|&c| c == class)
        .expect("listed class")
}

/// Unnormalized polarization weights after step 1: `[success, failure]`.
pub fn step1_labels<T: Real>(pol: &BellCoeffs<T>, spa: &BellCoeffs<T>) -> [BellCoeffs<T>; 2] {
    let mut out = [[T::zero(); 4]; 2];
    for p in BellKind::ALL {
        for s in BellKind::ALL {
            let (xp, zp) = p.bits();
            let (xs, zs) = s.bits();
            let w = pol.get(p) * spa.get(s);
            let k = BellKind::from_bits(xp, zp ^ zs).index();
            out[usize::from(xs != xp)][k] += w;
        }
    }
    out.map(BellCoeffs::from_array)
}

/// Unnormalized polarization weights per class, in `OutcomeClass::ALL`
/// order. The four weight vectors sum to the product of the input sums.
pub fn two_step_labels<T: Real>(
    pol: &BellCoeffs<T>,
    spa: &BellCoeffs<T>,
    time: &BellCoeffs<T>,
) -> [BellCoeffs<T>; 4] {
    let mut out = [[T::zero(); 4]; 4];
    for p in BellKind::ALL {
        for s in BellKind::ALL {
            for t in BellKind::ALL {
                let (xp, zp) = p.bits();
                let (xs, zs) = s.bits();
                let (xt, zt) = t.bits();
                let w = pol.get(p) * spa.get(s) * time.get(t);
                let (x1, z1) = (zp ^ zs, xp);
                let class = class_of(xs == xp, x1 == xt);
                let k = BellKind::from_bits(x1, z1 ^ zt).index();
                out[slot(class)][k] += w;
            }
        }
    }
    out.map(BellCoeffs::from_array)
}

/// Joint probability and normalized Bell weights per class, in
/// `OutcomeClass::ALL` order. Coefficients are all zero for a class whose
/// probability is below the zero-probability floor.
pub fn label_classes<T: Real>(
    pol: &BellCoeffs<T>,
    spa: &BellCoeffs<T>,
    time: &BellCoeffs<T>,
) -> [StepResult<T>; 4] {
    two_step_labels(pol, spa, time).map(|w| {
        let probability = w.sum();
        let coeffs = if probability > T::PROB_FLOOR {
            w.normalized()
        } else {
            BellCoeffs::default()
        };
        StepResult {
            probability,
            coeffs,
        }
    })
}

/// Failure branches for arbitrary Bell-diagonal inputs, conditioned the
/// same way as [`super::fail_branches`]: step-2 branches are conditional on
/// the step-1 outcome.
pub fn label_fail_branches<T: Real>(
    pol: &BellCoeffs<T>,
    spa: &BellCoeffs<T>,
    time: &BellCoeffs<T>,
) -> Result<FailBranches<T>> {
    let [ok, bad] = step1_labels(pol, spa);
    let p_ok = nonzero(ok.sum(), "P1 = 0")?;
    let p_bad = nonzero(bad.sum(), "P_fail1 = 0")?;
    let w = two_step_labels(pol, spa, time);
    let branch = |i: usize, given: T, what: &'static str| -> Result<ClassBranch<T>> {
        let joint = nonzero(w[i].sum(), what)?;
        Ok(ClassBranch {
            class: OutcomeClass::ALL[i],
            joint_probability: joint,
            conditional: StepResult {
                probability: joint / given,
                coeffs: w[i].normalized(),
            },
        })
    };
    Ok(FailBranches {
        step1_failure: StepResult {
            probability: p_bad,
            coeffs: bad.normalized(),
        },
        fail1_success2: branch(slot(OutcomeClass::Fail1Success2), p_bad, "P'_fail1 = 0")?,
        success1_fail2: branch(slot(OutcomeClass::Success1Fail2), p_ok, "P_fail2 = 0")?,
        both_fail: branch(slot(OutcomeClass::BothFail), p_bad, "P_fail3 = 0")?,
    })
}
