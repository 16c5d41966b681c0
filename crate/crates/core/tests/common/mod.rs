//! Dense-sampling monotonicity checks shared by the test targets.

use hepp_core::analytic::{fail_branches, grid, step1_general, step2_general};

pub const STEP: f64 = 1e-3;

pub struct Check {
    pub name: &'static str,
    pub samples: usize,
    /// First offending pair `(x, y_prev, y_next)`, if any.
    pub violation: Option<(f64, f64, f64)>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn series(name: &'static str, xs: &[f64], increasing: bool, f: impl Fn(f64) -> f64) -> Check {
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let violation = xs.windows(2).zip(ys.windows(2)).find_map(|(x, y)| {
        let ok = if increasing { y[1] > y[0] } else { y[1] < y[0] };
        (!ok).then_some((x[1], y[0], y[1]))
    });
    Check {
        name,
        samples: xs.len(),
        violation,
    }
}

/// Strict monotonicity along `xs` for every fixed value in `others`.
fn family(
    name: &'static str,
    xs: &[f64],
    others: &[f64],
    increasing: bool,
    f: impl Fn(f64, f64) -> f64,
) -> Check {
    let mut samples = 0;
    for &o in others {
        let c = series(name, xs, increasing, |x| f(x, o));
        samples += c.samples;
        if c.violation.is_some() {
            return Check { samples, ..c };
        }
    }
    Check {
        name,
        samples,
        violation: None,
    }
}

/// Open interval (from, to) sampled at `STEP`.
fn open(from: f64, to: f64) -> Vec<f64> {
    grid::<f64>(from, to, STEP)
        .into_iter()
        .filter(|&x| x > from - 1e-12 && x < to - 1e-9)
        .collect()
}

pub fn monotonicity_checks() -> Vec<Check> {
    let pp = 0.65;
    let ps_axis = open(0.505, 1.0);
    let pt_axis = open(0.51, 1.0);
    let pt_step2_axis = open(0.505, 1.0);
    let coarse: Vec<f64> = grid(0.51, 0.99, 0.01);
    let fb = |ps: f64, pt: f64| fail_branches(pp, ps, pt).unwrap();
    vec![
        series("F2n decreasing in p_s (p_p=0.6)", &ps_axis, false, |ps| {
            step1_general(0.6, ps).unwrap().coeffs.phi_minus
        }),
        series("F3n decreasing in p_s (p_p=0.6)", &ps_axis, false, |ps| {
            step1_general(0.6, ps).unwrap().coeffs.psi_plus
        }),
        series("F'2n decreasing in p_t (p_p=0.6, p_s=0.8)", &pt_step2_axis, false, |pt| {
            step2_general(0.6, 0.8, pt).unwrap().coeffs.phi_minus
        }),
        series("F'3n decreasing in p_t (p_p=0.6, p_s=0.8)", &pt_step2_axis, false, |pt| {
            step2_general(0.6, 0.8, pt).unwrap().coeffs.psi_plus
        }),
        family("F'_fail1 increasing in p_t", &pt_axis, &coarse, true, |pt, ps| {
            fb(ps, pt).fail1_success2.conditional.coeffs.phi_plus
        }),
        family("F'_fail1 decreasing in p_s", &ps_axis, &coarse, false, |ps, pt| {
            fb(ps, pt).fail1_success2.conditional.coeffs.phi_plus
        }),
        family("F_fail2 increasing in p_s", &ps_axis, &coarse, true, |ps, pt| {
            fb(ps, pt).success1_fail2.conditional.coeffs.phi_plus
        }),
        family("F_fail2 decreasing in p_t", &pt_axis, &coarse, false, |pt, ps| {
            fb(ps, pt).success1_fail2.conditional.coeffs.phi_plus
        }),
        family("F_fail3 decreasing in p_s", &ps_axis, &coarse, false, |ps, pt| {
            fb(ps, pt).both_fail.conditional.coeffs.phi_plus
        }),
        family("F_fail3 decreasing in p_t", &pt_axis, &coarse, false, |pt, ps| {
            fb(ps, pt).both_fail.conditional.coeffs.phi_plus
        }),
    ]
}
