//! Optical elements of the two-step network and detector-pattern heralding.
//!
//! Per photon the spatial qubit is the PBS output branch (0 = a3/b3,
//! 1 = a4/b4). The step-2 unit consumes (pol, time, spa) and emits
//! (pol, det) where `det` is a 4-level subsystem naming the detector that
//! fires: D1..D4 for Alice and D5..D8 for Bob, stored as local index 0..3.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qstate::{Subsystem, SubsystemOp};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub const BOTH: [Party; 2] = [Party::Alice, Party::Bob];

    pub fn pol(self) -> &'static str {
        match self {
            Party::Alice => "A.pol",
            Party::Bob => "B.pol",
        }
    }

    pub fn spa(self) -> &'static str {
        match self {
            Party::Alice => "A.spa",
            Party::Bob => "B.spa",
        }
    }

    pub fn time(self) -> &'static str {
        match self {
            Party::Alice => "A.time",
            Party::Bob => "B.time",
        }
    }

    pub fn det(self) -> &'static str {
        match self {
            Party::Alice => "A.det",
            Party::Bob => "B.det",
        }
    }
}

/// PBS acting as a CNOT: polarization controls, spatial mode is the target.
pub fn pbs_parity<T: Real>(party: Party) -> SubsystemOp<T> {
    SubsystemOp::real(
        &[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ],
        &[party.pol(), party.spa()],
    )
    .expect("4x4 on two qubits")
}

/// `(success, failure)` projectors on the two spatial qubits after the PBSs:
/// one photon in each of a3b3 / a4b4, versus a3b4 / a4b3.
pub fn step1_success_projector<T: Real>() -> (SubsystemOp<T>, SubsystemOp<T>) {
    let labels = [Party::Alice.spa(), Party::Bob.spa()];
    let success = SubsystemOp::real(
        &[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ],
        &labels,
    )
    .expect("4x4");
    let failure = SubsystemOp::real(
        &[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ],
        &labels,
    )
    .expect("4x4");
    (success, failure)
}

pub fn qwp_hadamard<T: Real>(party: Party) -> SubsystemOp<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    SubsystemOp::real(&[&[s, s], &[s, -s]], &[party.pol()]).expect("2x2")
}

/// Net per-photon map of the step-2 unit, as
/// `(spa, pol_in, time_in) -> (pol_out, det)` with det the local 0..3 index.
pub const STEP2_TABLE: [((u8, u8, u8), (u8, u8)); 8] = [
    // branch a3 / b3
    ((0, 0, 0), (0, 1)), // |H,L> -> |H> D2 / D6
    ((0, 0, 1), (1, 0)), // |H,S> -> |V> D1 / D5
    ((0, 1, 0), (0, 0)), // |V,L> -> |H> D1 / D5
    ((0, 1, 1), (1, 1)), // |V,S> -> |V> D2 / D6
    // branch a4 / b4
    ((1, 0, 0), (0, 2)), // |H,L> -> |H> D3 / D7
    ((1, 0, 1), (1, 3)), // |H,S> -> |V> D4 / D8
    ((1, 1, 0), (0, 3)), // |V,L> -> |H> D4 / D8
    ((1, 1, 1), (1, 2)), // |V,S> -> |V> D3 / D7
];

/// Step-2 unit for one photon: targets (pol, time, spa), outputs (pol, det).
pub fn step2_unit<T: Real>(party: Party) -> SubsystemOp<T> {
    let mut m = vec![Complex::<T>::zero(); 64];
    for &((spa, pol, time), (pol_out, det)) in STEP2_TABLE.iter() {
        let col = (pol as usize) * 4 + (time as usize) * 2 + spa as usize;
        let row = (pol_out as usize) * 4 + det as usize;
        m[row * 8 + col] = Complex::one();
    }
    SubsystemOp::isometry(
        m,
        8,
        8,
        &[party.pol(), party.time(), party.spa()],
        vec![Subsystem::new(party.pol(), 2), Subsystem::new(party.det(), 4)],
    )
    .expect("8x8 isometry")
}

/// One click on Alice's side (D1..D4) and one on Bob's (D5..D8).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectorPattern {
    alice: u8,
    bob: u8,
}

impl DetectorPattern {
    pub fn new(alice: u8, bob: u8) -> Result<Self> {
        if !(1..=4).contains(&alice) {
            return Err(Error::DetectorIndex(alice));
        }
        if !(5..=8).contains(&bob) {
            return Err(Error::DetectorIndex(bob));
        }
        Ok(DetectorPattern { alice, bob })
    }

    pub fn alice(&self) -> u8 {
        self.alice
    }

    pub fn bob(&self) -> u8 {
        self.bob
    }

    /// All 16 patterns in (alice, bob) lexicographic order.
    pub fn all() -> impl Iterator<Item = DetectorPattern> {
        (1..=4u8).flat_map(|a| (5..=8u8).map(move |b| DetectorPattern { alice: a, bob: b }))
    }

    /// Index into the (A.det, B.det) product basis.
    pub fn local_index(&self) -> usize {
        (self.alice as usize - 1) * 4 + (self.bob as usize - 5)
    }

    pub fn projector<T: Real>(&self) -> SubsystemOp<T> {
        let mut m = vec![Complex::<T>::zero(); 256];
        let i = self.local_index();
        m[i * 16 + i] = Complex::one();
        SubsystemOp::local(m, 16, &[Party::Alice.det(), Party::Bob.det()]).expect("16x16")
    }

    pub fn class(&self) -> OutcomeClass {
        classify(*self)
    }
}

impl fmt::Display for DetectorPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}D{}", self.alice, self.bob)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeClass {
    BothSuccess,
    Fail1Success2,
    Success1Fail2,
    BothFail,
}

impl OutcomeClass {
    pub const ALL: [OutcomeClass; 4] = [
        OutcomeClass::BothSuccess,
        OutcomeClass::Fail1Success2,
        OutcomeClass::Success1Fail2,
        OutcomeClass::BothFail,
    ];

    pub fn step1_succeeded(self) -> bool {
        matches!(self, OutcomeClass::BothSuccess | OutcomeClass::Success1Fail2)
    }

    pub fn step2_succeeded(self) -> bool {
        matches!(self, OutcomeClass::BothSuccess | OutcomeClass::Fail1Success2)
    }

    pub fn patterns(self) -> [DetectorPattern; 4] {
        let list = match self {
            OutcomeClass::BothSuccess => BOTH_SUCCESS,
            OutcomeClass::Success1Fail2 => SUCCESS1_FAIL2,
            OutcomeClass::Fail1Success2 => FAIL1_SUCCESS2,
            OutcomeClass::BothFail => BOTH_FAIL,
        };
        list.map(|(alice, bob)| DetectorPattern { alice, bob })
    }

    pub fn name(self) -> &'static str {
        match self {
            OutcomeClass::BothSuccess => "BothSuccess",
            OutcomeClass::Fail1Success2 => "Fail1Success2",
            OutcomeClass::Success1Fail2 => "Success1Fail2",
            OutcomeClass::BothFail => "BothFail",
        }
    }
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const BOTH_SUCCESS: [(u8, u8); 4] = [(2, 6), (1, 5), (3, 7), (4, 8)];
const SUCCESS1_FAIL2: [(u8, u8); 4] = [(1, 6), (2, 5), (3, 8), (4, 7)];
const FAIL1_SUCCESS2: [(u8, u8); 4] = [(2, 7), (1, 8), (3, 6), (4, 5)];
const BOTH_FAIL: [(u8, u8); 4] = [(2, 8), (1, 7), (3, 5), (4, 6)];

pub fn classify(pattern: DetectorPattern) -> OutcomeClass {
    let key = (pattern.alice, pattern.bob);
    if BOTH_SUCCESS.contains(&key) {
        OutcomeClass::BothSuccess
    } else if SUCCESS1_FAIL2.contains(&key) {
        OutcomeClass::Success1Fail2
    } else if FAIL1_SUCCESS2.contains(&key) {
        OutcomeClass::Fail1Success2
    } else {
        OutcomeClass::BothFail
    }
}

/// Heralded correction applied after a click pattern.
///
/// A failed second step leaves the polarization pair bit-flipped relative to
/// the success frame (e.g. Phi+ Psi+_t ends in Psi+), so Bob applies
/// `sigma_x` to his photon. Other classes need no correction.
pub fn feed_forward<T: Real>(class: OutcomeClass) -> Option<SubsystemOp<T>> {
    if class.step2_succeeded() {
        None
    } else {
        Some(SubsystemOp::real(&[&[0.0, 1.0], &[1.0, 0.0]], &[Party::Bob.pol()]).expect("2x2"))
    }
}
