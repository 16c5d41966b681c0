//! Practical efficiency of the two-step scheme against the conventional
//! four-pair recurrence scheme over a lossy channel.

use crate::analytic::{step1_general, step2_general};
use crate::error::{Error, Result};
use crate::model::{BellCoeffs, BellKind, NoiseParams};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EfficiencyParams<T> {
    /// Distribution distance in km.
    pub d: T,
    /// Channel attenuation length in km.
    pub d0: T,
    pub eta_d: T,
    pub eta_c: T,
}

impl<T: Real> Default for EfficiencyParams<T> {
    fn default() -> Self {
        EfficiencyParams {
            d: T::zero(),
            d0: T::lit(25.0),
            eta_d: T::lit(0.9),
            eta_c: T::lit(0.95),
        }
    }
}

fn out_of_range<T: Real>(name: &'static str, v: T, range: &'static str) -> Error {
    Error::OutOfRange {
        name,
        value: v.to_f64().unwrap_or(f64::NAN),
        range,
    }
}

impl<T: Real> EfficiencyParams<T> {
    pub fn new(d: T, d0: T, eta_d: T, eta_c: T) -> Result<Self> {
        if !(d >= T::zero()) {
            return Err(out_of_range("d", d, "[0, inf)"));
        }
        if !(d0 > T::zero()) {
            return Err(out_of_range("d0", d0, "(0, inf)"));
        }
        for (name, v) in [("eta_d", eta_d), ("eta_c", eta_c)] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(out_of_range(name, v, "(0, 1]"));
            }
        }
        Ok(EfficiencyParams { d, d0, eta_d, eta_c })
    }

    pub fn at(&self, d: T) -> Result<Self> {
        Self::new(d, self.d0, self.eta_d, self.eta_c)
    }

    pub fn eta_t(&self) -> T {
        eta_t(self.d, self.d0)
    }

    /// Per-photon product eta_t * eta_d * eta_c.
    fn link(&self) -> T {
        self.eta_t() * self.eta_d * self.eta_c
    }
}

/// Transmission efficiency `exp(-d / d0)`.
pub fn eta_t<T: Real>(d: T, d0: T) -> T {
    (-d / d0).exp()
}

/// First-round success probability of the conventional scheme.
pub fn p1t<T: Real>(pp: T) -> T {
    let q = T::one() - pp;
    let half = T::lit(0.5);
    half * (pp * pp + T::lit(2.0) * pp * q / T::lit(3.0) + T::lit(5.0) * q * q / T::lit(9.0))
}

/// Second-round success probability of the conventional scheme.
pub fn p2t<T: Real>(pp: T) -> T {
    let q = T::one() - pp;
    let q2 = q * q;
    let a = pp * pp + q2 / T::lit(9.0);
    let p1 = p1t(pp);
    let brace = a * a
        + T::lit(8.0) / T::lit(81.0) * q2 * q2
        + T::lit(4.0) / T::lit(9.0) * a * q2
        + T::lit(4.0) / T::lit(9.0) * pp * pp * q2
        + T::lit(8.0) / T::lit(27.0) * pp * q2 * q;
    brace / (T::lit(8.0) * p1 * p1)
}

/// E_o = 1/4 P1t^2 P2t (eta_t eta_d eta_c)^8.
pub fn conventional_efficiency<T: Real>(pp: T, ep: &EfficiencyParams<T>) -> T {
    let p1 = p1t(pp);
    T::lit(0.25) * p1 * p1 * p2t(pp) * ep.link().powi(8)
}

/// E_n = P1n P2n (eta_t eta_d eta_c)^2.
pub fn new_efficiency<T: Real>(np: &NoiseParams<T>, ep: &EfficiencyParams<T>) -> Result<T> {
    let s1 = step1_general(np.pp, np.ps)?;
    let s2 = step2_general(np.pp, np.ps, np.pt)?;
    Ok(s1.probability * s2.probability * ep.link().powi(2))
}

/// R = 4 P1n P2n / (P1t^2 P2t (eta_t eta_d eta_c)^6).
pub fn ratio<T: Real>(np: &NoiseParams<T>, ep: &EfficiencyParams<T>) -> Result<T> {
    let s1 = step1_general(np.pp, np.ps)?;
    let s2 = step2_general(np.pp, np.ps, np.pt)?;
    let p1 = p1t(np.pp);
    Ok(T::lit(4.0) * s1.probability * s2.probability
        / (p1 * p1 * p2t(np.pp) * ep.link().powi(6)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioPoint<T> {
    pub d: T,
    pub e_o: T,
    pub e_n: T,
    pub r: T,
    pub log10_r: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioCurve<T> {
    pub points: Vec<RatioPoint<T>>,
    /// Least-squares slope of log10 R against d, per km.
    pub slope: T,
    pub intercept: T,
    /// Largest |log10 R - fitted line| over the grid.
    pub max_residual: T,
}

/// Slope of log10 R in d implied by the loss model: 6 / (d0 ln 10).
pub fn expected_slope<T: Real>(d0: T) -> T {
    T::lit(6.0) / (d0 * T::LN_10())
}

pub fn ratio_curve<T: Real>(
    np: &NoiseParams<T>,
    ep: &EfficiencyParams<T>,
    d_grid: &[T],
) -> Result<RatioCurve<T>> {
    if d_grid.is_empty() {
        return Err(Error::InvalidGrid("empty distance grid".into()));
    }
    if d_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("distance grid must be strictly ascending".into()));
    }
    let points = d_grid
        .iter()
        .map(|&d| {
            let at = ep.at(d)?;
            let e_o = conventional_efficiency(np.pp, &at);
            let e_n = new_efficiency(np, &at)?;
            let r = ratio(np, &at)?;
            Ok(RatioPoint {
                d,
                e_o,
                e_n,
                r,
                log10_r: r.log10(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept) = fit_line(
        &points.iter().map(|p| p.d).collect::<Vec<_>>(),
        &points.iter().map(|p| p.log10_r).collect::<Vec<_>>(),
    );
    let max_residual = points
        .iter()
        .map(|p| (p.log10_r - (intercept + slope * p.d)).abs())
        .fold(T::zero(), T::max);
    Ok(RatioCurve {
        points,
        slope,
        intercept,
        max_residual,
    })
}

/// Ordinary least squares y = a + b x; returns (b, a). A single point gives
/// slope zero.
fn fit_line<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    let n = T::from_usize(x.len()).expect("grid length");
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    (slope, my - slope * mx)
}

/// Bilateral parity check on two Bell-diagonal pairs, by enumeration over
/// the 16 label combinations. Returns the success probability and the
/// unnormalized surviving weights (x1 = x2 keeps (x1, z1 ^ z2)).
pub fn parity_check_enumeration<T: Real>(
    a: &BellCoeffs<T>,
    b: &BellCoeffs<T>,
) -> (T, BellCoeffs<T>) {
    let mut out = [T::zero(); 4];
    for k1 in BellKind::ALL {
        for k2 in BellKind::ALL {
            let (x1, z1) = k1.bits();
            let (x2, z2) = k2.bits();
            if x1 == x2 {
                out[BellKind::from_bits(x1, z1 ^ z2).index()] += a.get(k1) * b.get(k2);
            }
        }
    }
    let w = BellCoeffs::from_array(out);
    (w.sum(), w)
}

/// Exchanges the bit and phase labels (bilateral Hadamard frame change).
fn swap_labels<T: Real>(w: &BellCoeffs<T>) -> BellCoeffs<T> {
    BellCoeffs::new(w.phi_plus, w.psi_plus, w.phi_minus, w.psi_minus)
}

/// Enumerated success probabilities of the two conventional rounds on
/// Werner pairs: round 1 on two raw pairs, round 2 on two round-1 outputs
/// after the frame change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConventionalEnumeration<T> {
    pub round1: T,
    pub round2: T,
}

pub fn conventional_enumeration<T: Real>(pp: T) -> ConventionalEnumeration<T> {
    let w = BellCoeffs::werner(pp);
    let (round1, out) = parity_check_enumeration(&w, &w);
    let next = swap_labels(&out.normalized());
    let (round2, _) = parity_check_enumeration(&next, &next);
    ConventionalEnumeration { round1, round2 }
}

/// Printed P2t against the round-2 enumeration; reported, never gated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P2tDiagnostic<T> {
    pub pp: T,
    pub printed: T,
    pub enumerated: T,
    pub ratio: T,
}

pub fn p2t_diagnostic<T: Real>(pp: T) -> P2tDiagnostic<T> {
    let printed = p2t(pp);
    let enumerated = conventional_enumeration(pp).round2;
    P2tDiagnostic {
        pp,
        printed,
        enumerated,
        ratio: printed / enumerated,
    }
}
