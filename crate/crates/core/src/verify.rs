//! Engine-versus-closed-form comparisons and the step-2 linearity check.

use std::fmt;

use crate::analytic::{
    fail1, general_both_success, label_classes, simple_classes, step1_general, step1_labels,
    step1_simple, StepResult,
};
use crate::error::Result;
use crate::model::{bell_state, BellCoeffs, BellKind, Dof, NoiseModel, NoiseParams};
use crate::optics::{step2_unit, DetectorPattern, OutcomeClass, Party};
use crate::protocol::{run, step1_only, BranchReport};
use crate::qstate::{Dims, PureState};
use crate::scalar::Real;

/// Largest absolute disagreement found at one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct Deviation<T> {
    pub value: T,
    /// Which quantity produced `value`, e.g. `BothSuccess.probability`.
    pub quantity: String,
}

impl<T: Real> Deviation<T> {
    fn none() -> Self {
        Deviation {
            value: T::zero(),
            quantity: String::from("-"),
        }
    }

    fn record(&mut self, value: T, quantity: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.quantity = quantity();
        }
    }
}

/// Source of the closed-form side of a comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// Printed closed form.
    ClosedForm,
    /// Bell-label enumeration (no printed formula exists).
    LabelMap,
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reference::ClosedForm => "closed_form",
            Reference::LabelMap => "label_map",
        })
    }
}

/// Closed-form prediction for one outcome class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassPrediction<T> {
    pub class: OutcomeClass,
    pub probability: T,
    pub coeffs: BellCoeffs<T>,
    pub reference: Reference,
}

/// Closed-form predictions for all four classes in `OutcomeClass::ALL`
/// order.
pub fn predict_classes<T: Real>(
    np: &NoiseParams<T>,
    model: NoiseModel,
) -> Result<[ClassPrediction<T>; 4]> {
    let (pp, ps, pt) = (np.pp, np.ps, np.pt);
    match model {
        NoiseModel::BitFlipOnly => Ok(simple_classes(pp, ps, pt)?.map(|c| ClassPrediction {
            class: c.class,
            probability: c.joint_probability,
            coeffs: c.conditional.coeffs,
            reference: Reference::ClosedForm,
        })),
        NoiseModel::FullWerner => {
            let labels = label_classes(
                &BellCoeffs::werner(pp),
                &model.coeffs(ps),
                &model.coeffs(pt),
            );
            let ok = general_both_success(pp, ps, pt)?;
            let mut out = [0, 1, 2, 3].map(|i| ClassPrediction {
                class: OutcomeClass::ALL[i],
                probability: labels[i].probability,
                coeffs: labels[i].coeffs,
                reference: Reference::LabelMap,
            });
            out[0] = ClassPrediction {
                class: OutcomeClass::BothSuccess,
                probability: ok.joint_probability,
                coeffs: ok.conditional.coeffs,
                reference: Reference::ClosedForm,
            };
            Ok(out)
        }
    }
}

/// Closed-form step-1 `(success, failure)` branches.
pub fn predict_step1<T: Real>(
    np: &NoiseParams<T>,
    model: NoiseModel,
) -> Result<(StepResult<T>, StepResult<T>)> {
    match model {
        NoiseModel::BitFlipOnly => Ok((step1_simple(np.pp, np.ps)?, fail1(np.pp, np.ps)?)),
        NoiseModel::FullWerner => {
            let [_, bad] = step1_labels(&BellCoeffs::werner(np.pp), &model.coeffs(np.ps));
            Ok((
                step1_general(np.pp, np.ps)?,
                StepResult {
                    probability: bad.sum(),
                    coeffs: bad.normalized(),
                },
            ))
        }
    }
}

fn compare_branch<T: Real>(
    dev: &mut Deviation<T>,
    name: &str,
    engine: &BranchReport<T>,
    probability: T,
    coeffs: &BellCoeffs<T>,
) {
    dev.record((engine.probability - probability).abs(), || {
        format!("{name}.probability")
    });
    match engine.pol_coeffs() {
        Some(c) => {
            for k in BellKind::ALL {
                dev.record((c.get(k) - coeffs.get(k)).abs(), || format!("{name}.{k}"));
            }
            let r = engine.bell_offdiag_residual().unwrap_or_else(T::zero);
            dev.record(r, || format!("{name}.offdiag_residual"));
        }
        None => dev.record(probability.abs(), || format!("{name}.zero_probability")),
    }
}

/// Worst engine-versus-prediction deviation at one point: every class
/// probability and Bell weight from `run`, both `step1_only` branches, the
/// class-probability sum and the Bell off-diagonal residuals.
pub fn point_deviation<T: Real>(np: &NoiseParams<T>, model: NoiseModel) -> Result<Deviation<T>> {
    let mut dev = Deviation::none();
    let reports = run(np, model);
    let predictions = predict_classes(np, model)?;
    let mut total = T::zero();
    for (r, p) in reports.iter().zip(&predictions) {
        total += r.probability();
        compare_branch(&mut dev, r.class.name(), &r.branch, p.probability, &p.coeffs);
    }
    dev.record((total - T::one()).abs(), || "class_probability_sum".into());
    let s1 = step1_only(np, model);
    let (ok, bad) = predict_step1(np, model)?;
    compare_branch(&mut dev, "step1.success", &s1.success, ok.probability, &ok.coeffs);
    compare_branch(&mut dev, "step1.failure", &s1.failure, bad.probability, &bad.coeffs);
    Ok(dev)
}

/// Worst deviation over a grid, with the point where it occurred.
#[derive(Clone, Debug, PartialEq)]
pub struct GridReport<T> {
    pub points: usize,
    pub worst: Deviation<T>,
    pub worst_at: Option<(NoiseModel, T, T, T)>,
}

/// `steps` evenly spaced values from 0.55 to 0.95 per axis (the default
/// 5 gives 0.55, 0.65, ..., 0.95).
pub fn grid_axis<T: Real>(steps: usize) -> Vec<T> {
    if steps <= 1 {
        return vec![T::lit(0.75)];
    }
    (0..steps)
        .map(|i| {
            let n = (steps - 1) as f64;
            T::lit((55.0 * (n - i as f64) + 95.0 * i as f64) / (100.0 * n))
        })
        .collect()
}

pub fn grid_deviation<T: Real>(steps: usize) -> Result<GridReport<T>> {
    let axis = grid_axis::<T>(steps);
    let mut worst = Deviation::none();
    let mut worst_at = None;
    let mut points = 0;
    for model in [NoiseModel::BitFlipOnly, NoiseModel::FullWerner] {
        for &pp in &axis {
            for &ps in &axis {
                for &pt in &axis {
                    let np = NoiseParams::new(pp, ps, pt)?;
                    let d = point_deviation(&np, model)?;
                    points += 1;
                    if worst_at.is_none() || d.value > worst.value || d.value.is_nan() {
                        worst = d;
                        worst_at = Some((model, pp, ps, pt));
                    }
                }
            }
        }
    }
    Ok(GridReport {
        points,
        worst,
        worst_at,
    })
}

/// Both step-2 units applied to |pol>|time> in spatial branch (a, b),
/// reordered to (A.pol, B.pol, A.det, B.det).
pub fn step2_output<T: Real>(pol: BellKind, time: BellKind, a: usize, b: usize) -> Result<PureState<T>> {
    let spa = PureState::basis(Dof::Spatial.dims(), a * 2 + b)?;
    bell_state::<T>(Dof::Polarization, pol)
        .tensor(&bell_state(Dof::TimeBin, time))?
        .tensor(&spa)?
        .apply(&step2_unit(Party::Alice))?
        .apply(&step2_unit(Party::Bob))?
        .permuted(&["A.pol", "B.pol", "A.det", "B.det"])
}

/// `(sum_k w_k |d_a d_b>)` over the detector pair, normalized.
pub fn detector_state<T: Real>(terms: &[(u8, u8, f64)]) -> Result<PureState<T>> {
    let dims = Dims::from_pairs(&[("A.det", 4), ("B.det", 4)])?;
    let mut amps = vec![0.0; 16];
    for &(a, b, w) in terms {
        amps[DetectorPattern::new(a, b)?.local_index()] = w;
    }
    PureState::from_real(&amps, dims)
}

/// One written-out step-2 case: inputs in the a3 b3 branch and the expected
/// output polarization state and detector superposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step2Case {
    pub pol_in: BellKind,
    pub time_in: BellKind,
    pub pol_out: BellKind,
    pub detectors: [(u8, u8, f64); 2],
}

/// The six written-out cases: Phi+-_p Phi+_t, Psi+-_p Psi+_t, Phi+-_p Psi+_t.
pub const STEP2_CASES: [Step2Case; 6] = [
    Step2Case {
        pol_in: BellKind::PhiPlus,
        time_in: BellKind::PhiPlus,
        pol_out: BellKind::PhiPlus,
        detectors: [(2, 6, 1.0), (1, 5, 1.0)],
    },
    Step2Case {
        pol_in: BellKind::PhiMinus,
        time_in: BellKind::PhiPlus,
        pol_out: BellKind::PhiMinus,
        detectors: [(2, 6, 1.0), (1, 5, -1.0)],
    },
    Step2Case {
        pol_in: BellKind::PsiPlus,
        time_in: BellKind::PsiPlus,
        pol_out: BellKind::PsiPlus,
        detectors: [(2, 6, 1.0), (1, 5, 1.0)],
    },
    Step2Case {
        pol_in: BellKind::PsiMinus,
        time_in: BellKind::PsiPlus,
        pol_out: BellKind::PsiMinus,
        detectors: [(2, 6, 1.0), (1, 5, -1.0)],
    },
    Step2Case {
        pol_in: BellKind::PhiPlus,
        time_in: BellKind::PsiPlus,
        pol_out: BellKind::PsiPlus,
        detectors: [(2, 5, 1.0), (1, 6, 1.0)],
    },
    Step2Case {
        pol_in: BellKind::PhiMinus,
        time_in: BellKind::PsiPlus,
        pol_out: BellKind::PsiMinus,
        detectors: [(2, 5, 1.0), (1, 6, -1.0)],
    },
];

/// Largest amplitude deviation over [`STEP2_CASES`].
pub fn step2_linearity_deviation<T: Real>() -> Result<T> {
    let mut worst = T::zero();
    for case in STEP2_CASES {
        let got = step2_output::<T>(case.pol_in, case.time_in, 0, 0)?;
        let expected = bell_state::<T>(Dof::Polarization, case.pol_out)
            .tensor(&detector_state(&case.detectors)?)?;
        worst = worst.max(got.max_abs_diff(&expected)?);
    }
    Ok(worst)
}
