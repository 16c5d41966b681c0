//! Closed-form probabilities and Bell weights for both purification steps,
//! the failure branches, criteria solvers and figure tables.
//!
//! The simple model has bit-flip-only spatial and time-bin pairs; the
//! general model has Werner pairs in every DOF. Coefficients are always in
//! the order (Phi+, Phi-, Psi+, Psi-).

mod criteria;
mod figures;
mod labels;

pub use criteria::*;
pub use figures::{figure_data, grid, FigureTable, FIGURES};
pub use labels::{label_classes, label_fail_branches, step1_labels, two_step_labels};

use crate::error::{Error, Result};
use crate::model::{BellCoeffs, NoiseModel};
use crate::optics::OutcomeClass;
use crate::scalar::Real;

/// Probability of a branch together with the Bell weights it leaves behind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResult<T> {
    pub probability: T,
    pub coeffs: BellCoeffs<T>,
}

/// A heralded outcome class: its joint probability over both steps and the
/// conditional step result (probability given the preceding branch).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassBranch<T> {
    pub class: OutcomeClass,
    pub joint_probability: T,
    pub conditional: StepResult<T>,
}

/// Failure branches, conditioned on the preceding step-1 outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailBranches<T> {
    /// Step 1 fails (before step 2).
    pub step1_failure: StepResult<T>,
    pub fail1_success2: ClassBranch<T>,
    pub success1_fail2: ClassBranch<T>,
    pub both_fail: ClassBranch<T>,
}

fn check_unit<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v.to_f64().unwrap_or(f64::NAN),
            range: "[0, 1]",
        })
    }
}

fn check2<T: Real>(pp: T, ps: T) -> Result<()> {
    check_unit("p_p", pp)?;
    check_unit("p_s", ps)
}

fn check3<T: Real>(pp: T, ps: T, pt: T) -> Result<()> {
    check2(pp, ps)?;
    check_unit("p_t", pt)
}

fn nonzero<T: Real>(den: T, what: &'static str) -> Result<T> {
    if den.abs() > T::PROB_FLOOR {
        Ok(den)
    } else {
        Err(Error::Degenerate(what))
    }
}

fn over<T: Real>(num: [T; 4], den: T) -> BellCoeffs<T> {
    BellCoeffs::from_array(num.map(|x| x / den))
}

fn c<T: Real>(x: f64) -> T {
    T::lit(x)
}

pub fn step1_simple<T: Real>(pp: T, ps: T) -> Result<StepResult<T>> {
    check2(pp, ps)?;
    let one = T::one();
    let den = nonzero(
        c::<T>(4.0) * pp * ps - ps - c::<T>(2.0) * pp + c(2.0),
        "P1 = 0",
    )?;
    let f1 = c::<T>(3.0) * pp * ps;
    let f2 = (one - pp) * ps;
    let f3 = (one - pp) * (one - ps);
    Ok(StepResult {
        probability: den / c(3.0),
        coeffs: over([f1, f2, f3, f3], den),
    })
}

pub fn step2_simple<T: Real>(pp: T, ps: T, pt: T) -> Result<StepResult<T>> {
    check3(pp, ps, pt)?;
    let one = T::one();
    let four = c::<T>(4.0);
    let p1_den = nonzero(
        c::<T>(2.0) - c::<T>(2.0) * pp - ps + four * pp * ps,
        "P1 = 0",
    )?;
    let d = nonzero(
        one - pt * ps + pp * (four * pt * ps - one),
        "P2 = 0",
    )?;
    let probability = (one - pp - ps * pt + four * pp * ps * pt) / p1_den;
    Ok(StepResult {
        probability,
        coeffs: over(
            [
                c::<T>(3.0) * pp * ps * pt,
                (one - pp) * (one - ps) * pt,
                (one - pp) * (one - pt) * ps,
                (one - pp) * (one - ps) * (one - pt),
            ],
            d,
        ),
    })
}

pub fn step1_general<T: Real>(pp: T, ps: T) -> Result<StepResult<T>> {
    check2(pp, ps)?;
    let one = T::one();
    let two = c::<T>(2.0);
    let d = nonzero(
        c::<T>(8.0) * pp * ps - two * pp - two * ps + c(5.0),
        "P1n = 0",
    )?;
    let f1 = c::<T>(10.0) * pp * ps - pp - ps + one;
    let f2 = c::<T>(3.0) * pp + c::<T>(3.0) * ps - c::<T>(6.0) * pp * ps;
    let f3 = two * (one - pp) * (one - ps);
    Ok(StepResult {
        probability: d / c(9.0),
        coeffs: over([f1, f2, f3, f3], d),
    })
}

pub fn step2_general<T: Real>(pp: T, ps: T, pt: T) -> Result<StepResult<T>> {
    check3(pp, ps, pt)?;
    let one = T::one();
    let two = c::<T>(2.0);
    let four = c::<T>(4.0);
    let d1 = nonzero(
        c::<T>(8.0) * pp * ps - two * pp - two * ps + c(5.0),
        "P1n = 0",
    )?;
    let cross = two * pt * (four * pp - one) * (four * ps - one);
    let d2 = nonzero(
        c::<T>(7.0) - ps - pp + four * pp * ps + cross,
        "P2n = 0",
    )?;
    let probability = (c::<T>(7.0) - ps + pp * (four * ps - one) + cross) / (c::<T>(3.0) * d1);
    let f1 = two * (one - pp) * (one - ps) + pt * (one - ps - pp + c::<T>(28.0) * pp * ps);
    // Sign-corrected numerator; the printed form has the opposite sign.
    let f2 = one + c::<T>(10.0) * pp * ps - pp - ps
        + pt * (c::<T>(5.0) - c::<T>(5.0) * ps - c::<T>(5.0) * pp - four * pp * ps);
    let f3 = (one - pt) * (ps + pp + two - four * pp * ps);
    Ok(StepResult {
        probability,
        coeffs: over([f1, f2, f3, f3], d2),
    })
}

/// `(4 p_p - 1) / (1 + 2 p_p)`: below this `p_s` the step-1 failure branch
/// keeps Phi+ weight above one half.
pub fn residual_entanglement_bound<T: Real>(pp: T) -> T {
    (c::<T>(4.0) * pp - T::one()) / (T::one() + c::<T>(2.0) * pp)
}

pub fn fail1<T: Real>(pp: T, ps: T) -> Result<StepResult<T>> {
    check2(pp, ps)?;
    let one = T::one();
    let den = nonzero(
        one + ps + c::<T>(2.0) * pp - c::<T>(4.0) * pp * ps,
        "P_fail1 = 0",
    )?;
    let b = (one - pp) * ps;
    Ok(StepResult {
        probability: den / c(3.0),
        coeffs: over(
            [c::<T>(3.0) * pp * (one - ps), (one - pp) * (one - ps), b, b],
            den,
        ),
    })
}

pub fn fail_branches<T: Real>(pp: T, ps: T, pt: T) -> Result<FailBranches<T>> {
    check3(pp, ps, pt)?;
    let one = T::one();
    let two = c::<T>(2.0);
    let three = c::<T>(3.0);
    let four = c::<T>(4.0);
    let step1_failure = fail1(pp, ps)?;
    let step1_success = step1_simple(pp, ps)?;

    let f1_den = nonzero(one + ps - two * pp * (two * ps - one), "P_fail1 = 0")?;
    let dd = nonzero(
        one - pp + pt * (four * pp - one) * (one - ps),
        "P'_fail1 = 0",
    )?;
    let fail1_success2 = StepResult {
        probability: dd / f1_den,
        coeffs: over(
            [
                three * pt * pp * (one - ps),
                pt * ps * (one - pp),
                (one - pt) * (one - ps) * (one - pp),
                ps * (one - pt) * (one - pp),
            ],
            dd,
        ),
    };

    let s1_den = nonzero(two - ps - two * pp * (one - two * ps), "P1 = 0")?;
    let e = nonzero(
        one - ps + pt * ps - pp + four * pp * ps * (one - pt),
        "P_fail2 = 0",
    )?;
    let fail2 = StepResult {
        probability: e / s1_den,
        coeffs: over(
            [
                three * (one - pt) * pp * ps,
                (one - pp) * (one - ps) * (one - pt),
                (one - pp) * ps * pt,
                (one - pp) * (one - ps) * pt,
            ],
            e,
        ),
    };

    let g = nonzero(
        pp * (three - four * ps) - pt * (four * pp - one) * (one - ps) + ps,
        "P_fail3 = 0",
    )?;
    let fail3 = StepResult {
        probability: g / f1_den,
        coeffs: over(
            [
                three * pp * (one - pt) * (one - ps),
                (one - pp) * (one - pt) * ps,
                (one - pp) * (one - ps) * pt,
                (one - pp) * ps * pt,
            ],
            g,
        ),
    };

    Ok(FailBranches {
        step1_failure,
        fail1_success2: ClassBranch {
            class: OutcomeClass::Fail1Success2,
            joint_probability: step1_failure.probability * fail1_success2.probability,
            conditional: fail1_success2,
        },
        success1_fail2: ClassBranch {
            class: OutcomeClass::Success1Fail2,
            joint_probability: step1_success.probability * fail2.probability,
            conditional: fail2,
        },
        both_fail: ClassBranch {
            class: OutcomeClass::BothFail,
            joint_probability: step1_failure.probability * fail3.probability,
            conditional: fail3,
        },
    })
}

/// Failure branches under either noise model: the closed forms for
/// `BitFlipOnly`, the label map for `FullWerner`.
pub fn fail_branches_for<T: Real>(
    model: NoiseModel,
    pp: T,
    ps: T,
    pt: T,
) -> Result<FailBranches<T>> {
    match model {
        NoiseModel::BitFlipOnly => fail_branches(pp, ps, pt),
        NoiseModel::FullWerner => {
            check3(pp, ps, pt)?;
            label_fail_branches(&BellCoeffs::werner(pp), &model.coeffs(ps), &model.coeffs(pt))
        }
    }
}

/// All four simple-model classes in `OutcomeClass::ALL` order.
pub fn simple_classes<T: Real>(pp: T, ps: T, pt: T) -> Result<[ClassBranch<T>; 4]> {
    let s1 = step1_simple(pp, ps)?;
    let s2 = step2_simple(pp, ps, pt)?;
    let fb = fail_branches(pp, ps, pt)?;
    Ok([
        ClassBranch {
            class: OutcomeClass::BothSuccess,
            joint_probability: s1.probability * s2.probability,
            conditional: s2,
        },
        fb.fail1_success2,
        fb.success1_fail2,
        fb.both_fail,
    ])
}

/// Both-steps-succeeded class of the general model.
pub fn general_both_success<T: Real>(pp: T, ps: T, pt: T) -> Result<ClassBranch<T>> {
    let s1 = step1_general(pp, ps)?;
    let s2 = step2_general(pp, ps, pt)?;
    Ok(ClassBranch {
        class: OutcomeClass::BothSuccess,
        joint_probability: s1.probability * s2.probability,
        conditional: s2,
    })
}

/// Joint probabilities of the four simple-model classes, defined everywhere
/// on the unit cube (no conditioning denominators).
pub fn simple_class_probabilities<T: Real>(pp: T, ps: T, pt: T) -> [T; 4] {
    let one = T::one();
    let four = c::<T>(4.0);
    let three = c::<T>(3.0);
    let d = one - pt * ps + pp * (four * pt * ps - one);
    let dd = one - pp + pt * (four * pp - one) * (one - ps);
    let e = one - ps + pt * ps - pp + four * pp * ps * (one - pt);
    let g = pp * (three - four * ps) - pt * (four * pp - one) * (one - ps) + ps;
    [d / three, dd / three, e / three, g / three]
}
