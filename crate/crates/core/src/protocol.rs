//! Full two-step pipeline: hyperentangled input through both purification
//! steps, detector classification and per-class conditional polarization
//! states, plus multi-round iteration.

use crate::error::{Error, Result};
use crate::model::{
    extract_bell_coeffs, hyper_input, with_fresh_ancillas, BellCoeffs, NoiseModel, NoiseParams,
};
use crate::optics::{
    feed_forward, pbs_parity, qwp_hadamard, step1_success_projector, step2_unit, DetectorPattern,
    OutcomeClass, Party,
};
use crate::qstate::MixedState;
use crate::scalar::Real;

const POL: [&str; 2] = ["A.pol", "B.pol"];

/// Polarization state left behind in a heralded branch.
#[derive(Clone, Debug, PartialEq)]
pub struct Conditional<T> {
    pub pol_coeffs: BellCoeffs<T>,
    pub bell_offdiag_residual: T,
    pub state: MixedState<T>,
}

impl<T: Real> Conditional<T> {
    fn from_state(state: MixedState<T>) -> Result<Self> {
        let ex = extract_bell_coeffs(&state)?;
        Ok(Conditional {
            pol_coeffs: ex.coeffs,
            bell_offdiag_residual: ex.offdiag_residual,
            state,
        })
    }
}

/// Probability of a branch and its conditional state. `conditional` is
/// `None` when the probability is below the zero-probability floor.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchReport<T> {
    pub probability: T,
    pub conditional: Option<Conditional<T>>,
}

impl<T: Real> BranchReport<T> {
    /// Builds a report from an unnormalized branch state.
    fn from_unnormalized(branch: MixedState<T>) -> Result<Self> {
        let probability = branch.trace();
        let conditional = if probability > T::PROB_FLOOR {
            Some(Conditional::from_state(
                branch.scaled(T::one() / probability),
            )?)
        } else {
            None
        };
        Ok(BranchReport {
            probability,
            conditional,
        })
    }

    pub fn pol_coeffs(&self) -> Option<BellCoeffs<T>> {
        self.conditional.as_ref().map(|c| c.pol_coeffs)
    }

    /// Phi+ weight of the conditional state.
    pub fn fidelity(&self) -> Option<T> {
        self.pol_coeffs().map(|c| c.fidelity())
    }

    pub fn bell_offdiag_residual(&self) -> Option<T> {
        self.conditional.as_ref().map(|c| c.bell_offdiag_residual)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeReport<T> {
    pub class: OutcomeClass,
    pub branch: BranchReport<T>,
}

impl<T: Real> OutcomeReport<T> {
    pub fn probability(&self) -> T {
        self.branch.probability
    }

    pub fn pol_coeffs(&self) -> Option<BellCoeffs<T>> {
        self.branch.pol_coeffs()
    }

    pub fn fidelity(&self) -> Option<T> {
        self.branch.fidelity()
    }

    pub fn bell_offdiag_residual(&self) -> Option<T> {
        self.branch.bell_offdiag_residual()
    }
}

/// Both spatial-parity branches of the first step, before step 2.
#[derive(Clone, Debug, PartialEq)]
pub struct Step1Report<T> {
    pub success: BranchReport<T>,
    pub failure: BranchReport<T>,
}

pub fn run<T: Real>(np: &NoiseParams<T>, model: NoiseModel) -> Vec<OutcomeReport<T>> {
    run_state(&hyper_input(np, model)).expect("model input has the canonical labels")
}

/// Runs the pipeline on an arbitrary 64-dimensional input over
/// (A.pol, B.pol, A.spa, B.spa, A.time, B.time). Reports come back in
/// `OutcomeClass::ALL` order.
pub fn run_state<T: Real>(input: &MixedState<T>) -> Result<Vec<OutcomeReport<T>>> {
    let mut rho = input.clone();
    for party in Party::BOTH {
        rho = rho.apply(&pbs_parity(party))?;
    }
    for party in Party::BOTH {
        rho = rho.apply(&qwp_hadamard(party))?;
    }
    for party in Party::BOTH {
        rho = rho.apply(&step2_unit(party))?;
    }

    OutcomeClass::ALL
        .iter()
        .map(|&class| {
            let mut acc: Option<MixedState<T>> = None;
            for pattern in class.patterns() {
                let mut pol = rho
                    .branch(&pattern.projector())?
                    .partial_trace(&POL)?;
                if let Some(fix) = feed_forward(class) {
                    pol = pol.apply(&fix)?;
                }
                acc = Some(match acc {
                    None => pol,
                    Some(a) => MixedState::mixture(&[(T::one(), &a), (T::one(), &pol)])?,
                });
            }
            let branch = BranchReport::from_unnormalized(acc.expect("four patterns per class"))?;
            Ok(OutcomeReport { class, branch })
        })
        .collect()
}

/// Probability of a single detector pattern.
pub fn pattern_probability<T: Real>(
    np: &NoiseParams<T>,
    model: NoiseModel,
    pattern: DetectorPattern,
) -> T {
    let mut rho = hyper_input(np, model);
    for party in Party::BOTH {
        rho = rho.apply(&pbs_parity(party)).expect("canonical labels");
        rho = rho.apply(&qwp_hadamard(party)).expect("canonical labels");
        rho = rho.apply(&step2_unit(party)).expect("canonical labels");
    }
    rho.branch(&pattern.projector())
        .expect("detector labels present")
        .trace()
}

pub fn step1_only<T: Real>(np: &NoiseParams<T>, model: NoiseModel) -> Step1Report<T> {
    let mut rho = hyper_input(np, model);
    for party in Party::BOTH {
        rho = rho.apply(&pbs_parity(party)).expect("canonical labels");
    }
    let (success, failure) = step1_success_projector::<T>();
    let report = |p| -> BranchReport<T> {
        let branch = rho
            .branch(p)
            .and_then(|b| b.partial_trace(&POL))
            .expect("canonical labels");
        BranchReport::from_unnormalized(branch).expect("two-qubit state")
    };
    Step1Report {
        success: report(&success),
        failure: report(&failure),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReusePolicy {
    /// Per round, keep the class with the highest Phi+ weight.
    KeepBestBranch,
    /// Keep only the both-steps-succeeded class.
    KeepBothSuccessOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundPlan {
    rounds: usize,
    reuse_policy: ReusePolicy,
}

impl RoundPlan {
    pub fn new(rounds: usize, reuse_policy: ReusePolicy) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::OutOfRange {
                name: "rounds",
                value: 0.0,
                range: ">= 1",
            });
        }
        Ok(RoundPlan {
            rounds,
            reuse_policy,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn reuse_policy(&self) -> ReusePolicy {
        self.reuse_policy
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport<T> {
    /// Phi+ weight of the polarization pair fed into this round.
    pub input_fidelity: T,
    pub reports: Vec<OutcomeReport<T>>,
    /// Class whose conditional state seeds the next round; `None` ends the
    /// trajectory.
    pub selected: Option<OutcomeClass>,
}

impl<T: Real> RoundReport<T> {
    pub fn selected_report(&self) -> Option<&OutcomeReport<T>> {
        self.selected
            .and_then(|c| self.reports.iter().find(|r| r.class == c))
    }
}

fn select<T: Real>(reports: &[OutcomeReport<T>], policy: ReusePolicy) -> Option<OutcomeClass> {
    let live = reports.iter().filter(|r| r.branch.conditional.is_some());
    match policy {
        ReusePolicy::KeepBothSuccessOnly => live
            .filter(|r| r.class == OutcomeClass::BothSuccess)
            .map(|r| r.class)
            .next(),
        ReusePolicy::KeepBestBranch => live
            .max_by(|a, b| {
                let fa = a.fidelity().expect("live branch");
                let fb = b.fidelity().expect("live branch");
                fa.partial_cmp(&fb).expect("finite fidelity")
            })
            .map(|r| r.class),
    }
}

/// Runs up to `plan.rounds` rounds, feeding the selected class's conditional
/// polarization state forward with fresh spatial and time-bin pairs at
/// (p_s, p_t). Stops early if no class can be selected.
pub fn iterate<T: Real>(
    np: &NoiseParams<T>,
    model: NoiseModel,
    plan: &RoundPlan,
) -> Result<Vec<RoundReport<T>>> {
    let first = hyper_input(np, model);
    let mut pol = first.partial_trace(&POL)?;
    let mut input = first;
    let mut out = Vec::with_capacity(plan.rounds);
    for round in 0..plan.rounds {
        if round > 0 {
            input = with_fresh_ancillas(&pol, np.ps, np.pt, model)?;
        }
        let input_fidelity = extract_bell_coeffs(&pol)?.coeffs.fidelity();
        let reports = run_state(&input)?;
        let selected = select(&reports, plan.reuse_policy);
        let next = selected.and_then(|c| {
            reports
                .iter()
                .find(|r| r.class == c)
                .and_then(|r| r.branch.conditional.as_ref())
                .map(|c| c.state.clone())
        });
        out.push(RoundReport {
            input_fidelity,
            reports,
            selected,
        });
        match next {
            Some(state) => pol = state,
            None => break,
        }
    }
    Ok(out)
}

/// Input fidelity of the first round followed by the selected output
/// fidelity of every completed round.
pub fn fidelity_trajectory<T: Real>(rounds: &[RoundReport<T>]) -> Vec<T> {
    let mut traj = Vec::with_capacity(rounds.len() + 1);
    if let Some(first) = rounds.first() {
        traj.push(first.input_fidelity);
    }
    for r in rounds {
        match r.selected_report().and_then(|s| s.fidelity()) {
            Some(f) => traj.push(f),
            None => break,
        }
    }
    traj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(pp: f64, ps: f64, pt: f64) -> NoiseParams<f64> {
        NoiseParams::new(pp, ps, pt).unwrap()
    }

    fn report(rs: &[OutcomeReport<f64>], c: OutcomeClass) -> &OutcomeReport<f64> {
        rs.iter().find(|r| r.class == c).unwrap()
    }

    #[test]
    fn noiseless_input_always_succeeds() {
        let rs = run(&np(1.0, 1.0, 1.0), NoiseModel::BitFlipOnly);
        let ok = report(&rs, OutcomeClass::BothSuccess);
        assert!((ok.probability() - 1.0).abs() < 1e-12);
        assert!((ok.fidelity().unwrap() - 1.0).abs() < 1e-12);
        for r in &rs {
            if r.class != OutcomeClass::BothSuccess {
                assert!(r.branch.conditional.is_none());
            }
        }
    }

    #[test]
    fn class_probabilities_sum_to_one() {
        for model in [NoiseModel::BitFlipOnly, NoiseModel::FullWerner] {
            let rs = run(&np(0.62, 0.71, 0.83), model);
            let total: f64 = rs.iter().map(|r| r.probability()).sum();
            assert!((total - 1.0).abs() < 1e-10);
            for r in &rs {
                assert!(r.bell_offdiag_residual().unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn step1_example_values() {
        let s = step1_only(&np(0.7, 0.8, 0.5), NoiseModel::BitFlipOnly);
        assert!((s.success.probability - 0.68).abs() < 1e-12);
        let c = s.success.pol_coeffs().unwrap();
        assert!((c.phi_plus - 0.56 / 0.68).abs() < 1e-12);
        assert!((c.phi_minus - 0.08 / 0.68).abs() < 1e-12);
        assert!((c.psi_plus - 0.02 / 0.68).abs() < 1e-12);
        assert!((c.psi_minus - 0.02 / 0.68).abs() < 1e-12);
        assert!((s.failure.probability - 0.32).abs() < 1e-12);
        assert!((s.failure.fidelity().unwrap() - 0.4375).abs() < 1e-12);
    }

    #[test]
    fn pattern_probabilities_add_up_to_class() {
        let p = np(0.66, 0.77, 0.88);
        let rs = run(&p, NoiseModel::FullWerner);
        for r in &rs {
            let s: f64 = r
                .class
                .patterns()
                .iter()
                .map(|&pat| pattern_probability(&p, NoiseModel::FullWerner, pat))
                .sum();
            assert!((s - r.probability()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_round_matches_run() {
        let p = np(0.7, 0.8, 0.85);
        let plan = RoundPlan::new(1, ReusePolicy::KeepBothSuccessOnly).unwrap();
        let it = iterate(&p, NoiseModel::BitFlipOnly, &plan).unwrap();
        assert_eq!(it.len(), 1);
        let direct = run(&p, NoiseModel::BitFlipOnly);
        for (a, b) in it[0].reports.iter().zip(&direct) {
            assert_eq!(a.class, b.class);
            assert!((a.probability() - b.probability()).abs() < 1e-14);
        }
        assert!((it[0].input_fidelity - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_rounds_rejected() {
        assert!(RoundPlan::new(0, ReusePolicy::KeepBestBranch).is_err());
    }

    #[test]
    fn perfect_pair_is_fixed_point() {
        let p = np(1.0, 0.8, 0.85);
        for policy in [ReusePolicy::KeepBestBranch, ReusePolicy::KeepBothSuccessOnly] {
            let plan = RoundPlan::new(3, policy).unwrap();
            let it = iterate(&p, NoiseModel::BitFlipOnly, &plan).unwrap();
            assert_eq!(it.len(), 3);
            for f in fidelity_trajectory(&it) {
                assert!((f - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn werner_ancillas_leak_phase_errors_into_perfect_pair() {
        // Phi- on the spatial pair survives the parity check and flips the phase.
        let s = step1_only(&np(1.0, 0.8, 0.85), NoiseModel::FullWerner);
        let f = s.success.fidelity().unwrap();
        assert!((f - 9.0 * 0.8 / (6.0 * 0.8 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn best_branch_never_below_success_branch() {
        let p = np(0.7, 0.8, 0.85);
        let plan = RoundPlan::new(1, ReusePolicy::KeepBestBranch).unwrap();
        let it = iterate(&p, NoiseModel::BitFlipOnly, &plan).unwrap();
        let best = it[0].selected_report().unwrap().fidelity().unwrap();
        let ok = report(&it[0].reports, OutcomeClass::BothSuccess)
            .fidelity()
            .unwrap();
        assert!(best >= ok);
    }
}
