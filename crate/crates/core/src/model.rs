//! Bell states, per-DOF noise channels and the composite hyperentangled input.
//!
//! Encoding: H, L, a1/b1 map to basis 0; V, S, a2/b2 map to basis 1.

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qstate::{Dims, MixedState, PureState};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dof {
    Polarization,
    Spatial,
    TimeBin,
}

impl Dof {
    pub fn tag(self) -> &'static str {
        match self {
            Dof::Polarization => "pol",
            Dof::Spatial => "spa",
            Dof::TimeBin => "time",
        }
    }

    /// `(Alice label, Bob label)` of this DOF, e.g. `("A.pol", "B.pol")`.
    pub fn labels(self) -> (&'static str, &'static str) {
        match self {
            Dof::Polarization => ("A.pol", "B.pol"),
            Dof::Spatial => ("A.spa", "B.spa"),
            Dof::TimeBin => ("A.time", "B.time"),
        }
    }

    pub fn dims(self) -> Dims {
        let (a, b) = self.labels();
        Dims::qubits(&[a, b]).expect("distinct labels")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    /// Canonical order used by every coefficient vector and CSV column set.
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    pub fn index(self) -> usize {
        match self {
            BellKind::PhiPlus => 0,
            BellKind::PhiMinus => 1,
            BellKind::PsiPlus => 2,
            BellKind::PsiMinus => 3,
        }
    }

    /// (bit-flip, phase-flip) label: Phi+ = (0,0), Phi- = (0,1), Psi+ = (1,0), Psi- = (1,1).
    pub fn bits(self) -> (u8, u8) {
        match self {
            BellKind::PhiPlus => (0, 0),
            BellKind::PhiMinus => (0, 1),
            BellKind::PsiPlus => (1, 0),
            BellKind::PsiMinus => (1, 1),
        }
    }

    pub fn from_bits(x: u8, z: u8) -> Self {
        match (x & 1, z & 1) {
            (0, 0) => BellKind::PhiPlus,
            (0, 1) => BellKind::PhiMinus,
            (1, 0) => BellKind::PsiPlus,
            _ => BellKind::PsiMinus,
        }
    }

    /// Amplitudes over |00>,|01>,|10>,|11> before the 1/sqrt2 factor.
    fn signs(self) -> [f64; 4] {
        match self {
            BellKind::PhiPlus => [1.0, 0.0, 0.0, 1.0],
            BellKind::PhiMinus => [1.0, 0.0, 0.0, -1.0],
            BellKind::PsiPlus => [0.0, 1.0, 1.0, 0.0],
            BellKind::PsiMinus => [0.0, 1.0, -1.0, 0.0],
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PhiPlus => "phi_plus",
            BellKind::PhiMinus => "phi_minus",
            BellKind::PsiPlus => "psi_plus",
            BellKind::PsiMinus => "psi_minus",
        })
    }
}

/// Weights of a Bell-diagonal two-qubit state in the order (Phi+, Phi-, Psi+, Psi-).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct BellCoeffs<T> {
    pub phi_plus: T,
    pub phi_minus: T,
    pub psi_plus: T,
    pub psi_minus: T,
}

impl<T: Real> BellCoeffs<T> {
    pub fn new(phi_plus: T, phi_minus: T, psi_plus: T, psi_minus: T) -> Self {
        BellCoeffs {
            phi_plus,
            phi_minus,
            psi_plus,
            psi_minus,
        }
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.phi_plus, self.phi_minus, self.psi_plus, self.psi_minus]
    }

    pub fn get(&self, kind: BellKind) -> T {
        self.to_array()[kind.index()]
    }

    /// `p` on Phi+, `(1-p)/3` on each of the others.
    pub fn werner(p: T) -> Self {
        let e = (T::one() - p) / T::lit(3.0);
        Self::new(p, e, e, e)
    }

    /// `p` on Phi+, `1-p` on Psi+.
    pub fn bit_flip(p: T) -> Self {
        Self::new(p, T::zero(), T::one() - p, T::zero())
    }

    pub fn pure(kind: BellKind) -> Self {
        let mut a = [T::zero(); 4];
        a[kind.index()] = T::one();
        Self::from_array(a)
    }

    pub fn fidelity(&self) -> T {
        self.phi_plus
    }

    pub fn sum(&self) -> T {
        self.phi_plus + self.phi_minus + self.psi_plus + self.psi_minus
    }

    pub fn normalized(&self) -> Self {
        let s = self.sum();
        Self::from_array(self.to_array().map(|x| x / s))
    }

    pub fn max_abs_diff(&self, other: &BellCoeffs<T>) -> T {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    /// Nonnegative (to `PSD_TOL`) and summing to one (to `PSD_TOL`).
    pub fn is_distribution(&self) -> bool {
        self.to_array().iter().all(|&x| x >= -T::PSD_TOL)
            && (self.sum() - T::one()).abs() <= T::PSD_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams<T> {
    pub pp: T,
    pub ps: T,
    pub pt: T,
}

impl<T: Real> NoiseParams<T> {
    /// Each fidelity must lie in (0, 1].
    pub fn new(pp: T, ps: T, pt: T) -> Result<Self> {
        for (name, v) in [("p_p", pp), ("p_s", ps), ("p_t", pt)] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(Error::OutOfRange {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                    range: "(0, 1]",
                });
            }
        }
        Ok(NoiseParams { pp, ps, pt })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseModel {
    /// Spatial and time-bin pairs suffer bit flips only.
    BitFlipOnly,
    /// Spatial and time-bin pairs degrade to Werner states.
    FullWerner,
}

impl NoiseModel {
    pub fn coeffs<T: Real>(self, p: T) -> BellCoeffs<T> {
        match self {
            NoiseModel::BitFlipOnly => BellCoeffs::bit_flip(p),
            NoiseModel::FullWerner => BellCoeffs::werner(p),
        }
    }
}

fn check_probability<T: Real>(name: &'static str, p: T) -> Result<()> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: p.to_f64().unwrap_or(f64::NAN),
            range: "[0, 1]",
        })
    }
}

pub fn bell_state<T: Real>(dof: Dof, kind: BellKind) -> PureState<T> {
    let s = T::FRAC_1_SQRT_2();
    let amps = kind
        .signs()
        .iter()
        .map(|&x| Complex::new(T::lit(x) * s, T::zero()))
        .collect();
    PureState::from_amplitudes(amps, dof.dims()).expect("Bell state is normalized")
}

/// Bell-diagonal state with the given weights on one DOF pair.
pub fn bell_diagonal<T: Real>(dof: Dof, coeffs: &BellCoeffs<T>) -> MixedState<T> {
    let terms: Vec<(T, MixedState<T>)> = BellKind::ALL
        .iter()
        .map(|&k| (coeffs.get(k), bell_state::<T>(dof, k).density()))
        .collect();
    let refs: Vec<(T, &MixedState<T>)> = terms.iter().map(|(w, s)| (*w, s)).collect();
    MixedState::mixture(&refs).expect("same dims")
}

pub fn werner_pol<T: Real>(pp: T) -> Result<MixedState<T>> {
    check_probability("p_p", pp)?;
    Ok(bell_diagonal(Dof::Polarization, &BellCoeffs::werner(pp)))
}

pub fn dof_mixture<T: Real>(dof: Dof, p: T, model: NoiseModel) -> Result<MixedState<T>> {
    check_probability("p", p)?;
    Ok(bell_diagonal(dof, &model.coeffs(p)))
}

/// 64-dimensional input over (A.pol, B.pol, A.spa, B.spa, A.time, B.time).
/// Polarization is always a Werner state; the other DOFs follow `model`.
pub fn hyper_input<T: Real>(np: &NoiseParams<T>, model: NoiseModel) -> MixedState<T> {
    hyper_input_with_pol(&BellCoeffs::werner(np.pp), np.ps, np.pt, model)
}

/// As [`hyper_input`] with an arbitrary Bell-diagonal polarization factor.
pub fn hyper_input_with_pol<T: Real>(
    pol: &BellCoeffs<T>,
    ps: T,
    pt: T,
    model: NoiseModel,
) -> MixedState<T> {
    with_fresh_ancillas(&bell_diagonal(Dof::Polarization, pol), ps, pt, model)
        .expect("polarization pair has the canonical labels")
}

/// Tensors a polarization state on (A.pol, B.pol) with fresh spatial and
/// time-bin mixtures.
pub fn with_fresh_ancillas<T: Real>(
    pol: &MixedState<T>,
    ps: T,
    pt: T,
    model: NoiseModel,
) -> Result<MixedState<T>> {
    if pol.dims() != &Dof::Polarization.dims() {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: pol.dim(),
        });
    }
    let s = bell_diagonal(Dof::Spatial, &model.coeffs(ps));
    let t = bell_diagonal(Dof::TimeBin, &model.coeffs(pt));
    pol.tensor(&s)?.tensor(&t)
}

/// Bell-basis diagonal of a two-qubit state plus the largest off-diagonal
/// Bell-basis magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellExtraction<T> {
    pub coeffs: BellCoeffs<T>,
    pub offdiag_residual: T,
}

pub fn extract_bell_coeffs<T: Real>(state: &MixedState<T>) -> Result<BellExtraction<T>> {
    if state.dim() != 4 || state.dims().len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state.dim(),
        });
    }
    let s = T::FRAC_1_SQRT_2();
    let basis: Vec<Vec<Complex<T>>> = BellKind::ALL
        .iter()
        .map(|k| {
            k.signs()
                .iter()
                .map(|&x| Complex::new(T::lit(x) * s, T::zero()))
                .collect()
        })
        .collect();
    let mut diag = [T::zero(); 4];
    let mut residual = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            let v = state.sandwich(&basis[i], &basis[j]);
            if i == j {
                diag[i] = v.re;
                residual = residual.max(v.im.abs());
            } else if !v.is_zero() {
                residual = residual.max(v.norm());
            }
        }
    }
    Ok(BellExtraction {
        coeffs: BellCoeffs::from_array(diag),
        offdiag_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_states_are_orthonormal() {
        for dof in [Dof::Polarization, Dof::Spatial, Dof::TimeBin] {
            for a in BellKind::ALL {
                for b in BellKind::ALL {
                    let ip = bell_state::<f64>(dof, a)
                        .inner(&bell_state(dof, b))
                        .unwrap();
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((ip.re - expected).abs() < 1e-12 && ip.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn phi_plus_and_time_psi_minus_amplitudes() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = bell_state::<f64>(Dof::Polarization, BellKind::PhiPlus);
        let re: Vec<f64> = phi.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![s, 0.0, 0.0, s]);
        // (|LS> - |SL>)/sqrt2 with L=0, S=1
        let psi = bell_state::<f64>(Dof::TimeBin, BellKind::PsiMinus);
        let re: Vec<f64> = psi.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(re, vec![0.0, s, -s, 0.0]);
        assert_eq!(psi.dims().labels(), vec!["A.time", "B.time"]);
    }

    #[test]
    fn werner_edge_values() {
        let pure = werner_pol::<f64>(1.0).unwrap();
        let phi = bell_state(Dof::Polarization, BellKind::PhiPlus).density();
        assert!(pure.max_abs_diff(&phi).unwrap() < 1e-12);

        let quarter = werner_pol::<f64>(0.25).unwrap();
        let mm = MixedState::maximally_mixed(Dof::Polarization.dims());
        assert!(quarter.max_abs_diff(&mm).unwrap() < 1e-12);

        let w = werner_pol::<f64>(0.6).unwrap();
        let ext = extract_bell_coeffs(&w).unwrap();
        assert!((ext.coeffs.phi_plus - 0.6).abs() < 1e-12);
        for x in [ext.coeffs.phi_minus, ext.coeffs.psi_plus, ext.coeffs.psi_minus] {
            assert!((x - 0.4 / 3.0).abs() < 1e-12);
        }
        assert!(werner_pol::<f64>(1.5).is_err());
        assert!(werner_pol::<f64>(-0.1).is_err());
    }

    #[test]
    fn dof_mixture_weights() {
        let t = dof_mixture::<f64>(Dof::TimeBin, 0.7, NoiseModel::BitFlipOnly).unwrap();
        let c = extract_bell_coeffs(&t).unwrap().coeffs;
        assert!(c.max_abs_diff(&BellCoeffs::new(0.7, 0.0, 0.3, 0.0)) < 1e-12);

        let s = dof_mixture::<f64>(Dof::Spatial, 0.7, NoiseModel::FullWerner).unwrap();
        let c = extract_bell_coeffs(&s).unwrap().coeffs;
        assert!(c.max_abs_diff(&BellCoeffs::new(0.7, 0.1, 0.1, 0.1)) < 1e-12);

        let p = dof_mixture::<f64>(Dof::Spatial, 1.0, NoiseModel::BitFlipOnly).unwrap();
        let phi = bell_state(Dof::Spatial, BellKind::PhiPlus).density();
        assert!(p.max_abs_diff(&phi).unwrap() < 1e-12);
    }

    #[test]
    fn extract_pure_psi_minus() {
        let rho = bell_state::<f64>(Dof::Polarization, BellKind::PsiMinus).density();
        let ext = extract_bell_coeffs(&rho).unwrap();
        assert!(ext.coeffs.max_abs_diff(&BellCoeffs::new(0.0, 0.0, 0.0, 1.0)) < 1e-12);
        assert!(ext.offdiag_residual < 1e-12);
    }

    #[test]
    fn extract_reports_coherence() {
        // |00><00| is an equal Phi+/Phi- mixture with a real off-diagonal of 1/2.
        let rho = PureState::<f64>::basis(Dof::Polarization.dims(), 0)
            .unwrap()
            .density();
        let ext = extract_bell_coeffs(&rho).unwrap();
        assert!((ext.offdiag_residual - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noiseless_input_is_the_ideal_hyperentangled_state() {
        let np = NoiseParams::new(1.0, 1.0, 1.0).unwrap();
        let ideal = bell_state::<f64>(Dof::Polarization, BellKind::PhiPlus)
            .tensor(&bell_state(Dof::Spatial, BellKind::PhiPlus))
            .unwrap()
            .tensor(&bell_state(Dof::TimeBin, BellKind::PhiPlus))
            .unwrap();
        for model in [NoiseModel::BitFlipOnly, NoiseModel::FullWerner] {
            let rho = hyper_input(&np, model);
            assert_eq!(rho.dim(), 64);
            assert!((rho.fidelity_to(&ideal).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_params_validation() {
        assert!(NoiseParams::new(0.5, 1.0, 0.1).is_ok());
        assert!(NoiseParams::new(0.0, 0.5, 0.5).is_err());
        assert!(NoiseParams::new(0.5, 1.2, 0.5).is_err());
        assert!(NoiseParams::new(0.5, 0.5, f64::NAN).is_err());
    }
}
