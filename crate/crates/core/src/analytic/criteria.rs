//! Improvement criteria: the printed inequalities evaluated directly, and
//! the same regions recovered as parameter bands by scan plus bisection on
//! the underlying fidelity differences.

use std::fmt;

use crate::scalar::Real;

use super::{c, fail1, fail_branches, step1_general, step1_simple, step2_general, step2_simple};

/// Coarse scan step used to bracket band edges before bisection.
pub const SCAN_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BandParameter {
    Ps,
    Pt,
}

impl fmt::Display for BandParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandParameter::Ps => "p_s",
            BandParameter::Pt => "p_t",
        })
    }
}

/// Open interval of one parameter on which a criterion holds; `bounds` is
/// `None` when the criterion holds nowhere on [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriterionBand<T> {
    pub parameter: BandParameter,
    pub bounds: Option<(T, T)>,
}

impl<T: Real> CriterionBand<T> {
    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn lower(&self) -> Option<T> {
        self.bounds.map(|b| b.0)
    }

    pub fn upper(&self) -> Option<T> {
        self.bounds.map(|b| b.1)
    }

    pub fn contains(&self, x: T) -> bool {
        self.bounds.is_some_and(|(lo, hi)| lo < x && x < hi)
    }
}

fn positive<T: Real>(h: &impl Fn(T) -> Option<T>, x: T) -> bool {
    h(x).is_some_and(|v| v > T::zero())
}

/// Bisects between a point outside (`out`) and inside (`inside`) the region.
fn bisect<T: Real>(h: &impl Fn(T) -> Option<T>, mut out: T, mut inside: T) -> T {
    let half = c::<T>(0.5);
    while (inside - out).abs() > T::ROOT_TOL {
        let mid = (out + inside) * half;
        if positive(h, mid) {
            inside = mid;
        } else {
            out = mid;
        }
    }
    (out + inside) * half
}

/// Region of [lo, hi] where `h > 0`, as the hull of the scan points that
/// satisfy it with both edges refined by bisection. `h` returning `None`
/// (undefined) counts as not satisfied.
pub fn solve_band<T: Real>(h: impl Fn(T) -> Option<T>, lo: T, hi: T) -> Option<(T, T)> {
    let step = c::<T>(SCAN_STEP);
    let n = ((hi - lo) / step).ceil().to_usize().unwrap_or(0).max(1);
    let x = |i: usize| {
        if i >= n {
            hi
        } else {
            lo + step * T::from_usize(i).expect("small index")
        }
    };
    let hits: Vec<usize> = (0..=n).filter(|&i| positive(&h, x(i))).collect();
    let (&first, &last) = (hits.first()?, hits.last()?);
    let lower = if first == 0 {
        lo
    } else {
        bisect(&h, x(first - 1), x(first))
    };
    let upper = if last == n {
        hi
    } else {
        bisect(&h, x(last + 1), x(last))
    };
    Some((lower, upper))
}

fn band<T: Real>(parameter: BandParameter, h: impl Fn(T) -> Option<T>) -> CriterionBand<T> {
    CriterionBand {
        parameter,
        bounds: solve_band(h, T::zero(), T::one()),
    }
}

fn min2<T: Real>(a: Option<T>, b: Option<T>) -> Option<T> {
    Some(a?.min(b?))
}

/// p_s band where F1 > p_p and F1 > p_s (simple model).
pub fn simple_ps_band<T: Real>(pp: T) -> CriterionBand<T> {
    band(BandParameter::Ps, |ps| {
        let f1 = step1_simple(pp, ps).ok()?.coeffs.phi_plus;
        Some((f1 - pp).min(f1 - ps))
    })
}

/// p_t band where F'1 > F1 and F'1 > p_t (simple model).
pub fn simple_pt_band<T: Real>(pp: T, ps: T) -> CriterionBand<T> {
    let f1 = step1_simple(pp, ps).ok().map(|r| r.coeffs.phi_plus);
    band(BandParameter::Pt, move |pt| {
        let f = step2_simple(pp, ps, pt).ok()?.coeffs.phi_plus;
        Some((f - f1?).min(f - pt))
    })
}

pub fn f1n_gt_pp_band<T: Real>(pp: T) -> CriterionBand<T> {
    band(BandParameter::Ps, |ps| {
        Some(step1_general(pp, ps).ok()?.coeffs.phi_plus - pp)
    })
}

pub fn f1n_gt_ps_band<T: Real>(pp: T) -> CriterionBand<T> {
    band(BandParameter::Ps, |ps| {
        Some(step1_general(pp, ps).ok()?.coeffs.phi_plus - ps)
    })
}

/// p_s band where F1n > p_p and F1n > p_s.
pub fn general_ps_band<T: Real>(pp: T) -> CriterionBand<T> {
    band(BandParameter::Ps, |ps| {
        let f = step1_general(pp, ps).ok()?.coeffs.phi_plus;
        min2(Some(f - pp), Some(f - ps))
    })
}

pub fn f1pn_gt_f1n_band<T: Real>(pp: T, ps: T) -> CriterionBand<T> {
    let f1 = step1_general(pp, ps).ok().map(|r| r.coeffs.phi_plus);
    band(BandParameter::Pt, move |pt| {
        Some(step2_general(pp, ps, pt).ok()?.coeffs.phi_plus - f1?)
    })
}

pub fn f1pn_gt_pt_band<T: Real>(pp: T, ps: T) -> CriterionBand<T> {
    band(BandParameter::Pt, |pt| {
        Some(step2_general(pp, ps, pt).ok()?.coeffs.phi_plus - pt)
    })
}

/// p_t band where F'1n > F1n and F'1n > p_t.
pub fn general_pt_band<T: Real>(pp: T, ps: T) -> CriterionBand<T> {
    let f1 = step1_general(pp, ps).ok().map(|r| r.coeffs.phi_plus);
    band(BandParameter::Pt, move |pt| {
        let f = step2_general(pp, ps, pt).ok()?.coeffs.phi_plus;
        min2(f1.map(|g| f - g), Some(f - pt))
    })
}

/// p_s band where the step-1 failure branch keeps F_fail1 > 1/2.
pub fn fail1_residual_band<T: Real>(pp: T) -> CriterionBand<T> {
    band(BandParameter::Ps, |ps| {
        Some(fail1(pp, ps).ok()?.coeffs.phi_plus - c(0.5))
    })
}

/// p_t band where F_fail2 > p_p.
pub fn fail2_pt_band<T: Real>(pp: T, ps: T) -> CriterionBand<T> {
    band(BandParameter::Pt, |pt| {
        Some(fail_branches(pp, ps, pt).ok()?.success1_fail2.conditional.coeffs.phi_plus - pp)
    })
}

/// p_t band where F_fail3 > 1/2.
pub fn fail3_pt_band<T: Real>(pp: T, ps: T) -> CriterionBand<T> {
    band(BandParameter::Pt, |pt| {
        Some(fail_branches(pp, ps, pt).ok()?.both_fail.conditional.coeffs.phi_plus - c(0.5))
    })
}

/// Printed inequalities evaluated directly, plus the bisection bands for the
/// same regions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Criteria<T> {
    /// p_p > 1/2 and (5p_p - 2)/(4p_p - 1) > p_s > 1/2.
    pub simple_step1: bool,
    /// (3p_p p_s + p_p - 1)/(p_s(4p_p - 1)) > p_t > 1/2, with 4p_p > 1.
    pub simple_step2: bool,
    pub f1n_gt_pp: bool,
    pub f1n_gt_ps: bool,
    pub f1pn_gt_f1n: bool,
    pub f1pn_gt_pt: bool,
    pub simple_ps: CriterionBand<T>,
    pub simple_pt: CriterionBand<T>,
    pub general_ps: CriterionBand<T>,
    pub general_pt: CriterionBand<T>,
}

impl<T: Real> Criteria<T> {
    pub fn general_step1(&self) -> bool {
        self.f1n_gt_pp && self.f1n_gt_ps
    }

    pub fn general_step2(&self) -> bool {
        self.f1pn_gt_f1n && self.f1pn_gt_pt
    }
}

pub fn simple_step1_direct<T: Real>(pp: T, ps: T) -> bool {
    let half = c::<T>(0.5);
    let four = c::<T>(4.0);
    pp > half && (c::<T>(5.0) * pp - c(2.0)) / (four * pp - T::one()) > ps && ps > half
}

pub fn simple_step2_direct<T: Real>(pp: T, ps: T, pt: T) -> bool {
    let k = c::<T>(4.0) * pp - T::one();
    k > T::zero()
        && (c::<T>(3.0) * pp * ps + pp - T::one()) / (ps * k) > pt
        && pt > c(0.5)
}

/// Lower edge of `p_p` above which the printed F1n > p_p form is valid: its
/// denominator `12p_p - 8p_p^2 - 1` is negative below `(3 - sqrt7)/4`.
pub fn f1n_gt_pp_direct_valid_from<T: Real>() -> T {
    (c::<T>(3.0) - c::<T>(7.0).sqrt()) / c(4.0)
}

pub fn f1n_gt_pp_direct<T: Real>(pp: T, ps: T) -> bool {
    let pp2 = pp * pp;
    ps > (c::<T>(6.0) * pp - c::<T>(2.0) * pp2 - T::one())
        / (c::<T>(12.0) * pp - c::<T>(8.0) * pp2 - T::one())
}

pub fn f1n_gt_ps_direct<T: Real>(pp: T, ps: T) -> bool {
    (c::<T>(8.0) * pp - c(2.0)) * ps * ps
        + c::<T>(6.0) * (T::one() - c::<T>(2.0) * pp) * ps
        + pp
        - T::one()
        < T::zero()
}

pub fn f1pn_gt_f1n_direct<T: Real>(pp: T, ps: T, pt: T) -> bool {
    let Ok(s1) = step1_general(pp, ps) else {
        return false;
    };
    let half = c::<T>(0.5);
    let f1 = s1.coeffs.phi_plus;
    let f13 = f1 + s1.coeffs.psi_plus;
    c::<T>(3.0) * (pt - half) / (T::one() - pt) > (f1 - half) * f13 / (f1 * (T::one() - f13))
}

pub fn f1pn_gt_pt_direct<T: Real>(pp: T, ps: T, pt: T) -> bool {
    let one = T::one();
    let four = c::<T>(4.0);
    pt * pt * (four * pp - one) * (four * ps - one) + c::<T>(3.0) * pt * (one - four * pp * ps)
        < (one - pp) * (one - ps)
}

pub fn criteria<T: Real>(pp: T, ps: T, pt: T) -> Criteria<T> {
    Criteria {
        simple_step1: simple_step1_direct(pp, ps),
        simple_step2: simple_step2_direct(pp, ps, pt),
        f1n_gt_pp: f1n_gt_pp_direct(pp, ps),
        f1n_gt_ps: f1n_gt_ps_direct(pp, ps),
        f1pn_gt_f1n: f1pn_gt_f1n_direct(pp, ps, pt),
        f1pn_gt_pt: f1pn_gt_pt_direct(pp, ps, pt),
        simple_ps: simple_ps_band(pp),
        simple_pt: simple_pt_band(pp, ps),
        general_ps: general_ps_band(pp),
        general_pt: general_pt_band(pp, ps),
    }
}
