//! Curve tables on the parameter grids of the published figures.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::criteria::{general_ps_band, general_pt_band};
use super::{c, fail_branches, step1_general, step2_general};

/// Figures with a closed-form curve table.
pub const FIGURES: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

/// Column-labelled table; `None` marks an undefined cell (e.g. an empty
/// threshold band).
#[derive(Clone, Debug, PartialEq)]
pub struct FigureTable<T> {
    pub figure: u32,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<T>>>,
}

impl<T: Real> FigureTable<T> {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// `from, from + step, ..., to` with the endpoint included; the count is
/// rounded so accumulated error never adds or drops a point.
pub fn grid<T: Real>(from: f64, to: f64, step: f64) -> Vec<T> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| T::lit(from + step * i as f64)).collect()
}

fn series_table<T: Real>(
    figure: u32,
    x_name: &str,
    xs: Vec<T>,
    series: &[f64],
    label: &str,
    f: impl Fn(T, T) -> Result<T>,
) -> Result<FigureTable<T>> {
    let mut columns = vec![x_name.to_string()];
    columns.extend(series.iter().map(|s| format!("{label}_ps_{s}")));
    let rows = xs
        .into_iter()
        .map(|x| {
            let mut row = vec![Some(x)];
            for &s in series {
                row.push(Some(f(x, T::lit(s))?));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(FigureTable {
        figure,
        columns,
        rows,
    })
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub fn figure_data<T: Real>(figure: u32) -> Result<FigureTable<T>> {
    let pp_fixed = c::<T>(0.65);
    match figure {
        2 => {
            let pp = c::<T>(0.6);
            let rows = grid::<T>(0.505, 1.0, 0.001)
                .into_iter()
                .map(|ps| {
                    let r = step1_general(pp, ps)?.coeffs;
                    Ok(vec![Some(ps), Some(r.phi_plus), Some(r.phi_minus), Some(r.psi_plus)])
                })
                .collect::<Result<_>>()?;
            Ok(FigureTable {
                figure,
                columns: names(&["p_s", "f1n", "f2n", "f3n"]),
                rows,
            })
        }
        3 => {
            let rows = grid::<T>(0.505, 0.95, 0.005)
                .into_iter()
                .map(|pp| {
                    let band = general_ps_band(pp);
                    vec![Some(pp), band.lower(), band.upper()]
                })
                .collect();
            Ok(FigureTable {
                figure,
                columns: names(&["p_p", "min_ps", "max_ps"]),
                rows,
            })
        }
        4 => {
            let (pp, ps) = (c::<T>(0.6), c::<T>(0.8));
            let rows = grid::<T>(0.505, 1.0, 0.001)
                .into_iter()
                .map(|pt| {
                    let r = step2_general(pp, ps, pt)?.coeffs;
                    Ok(vec![Some(pt), Some(r.phi_plus), Some(r.phi_minus), Some(r.psi_plus)])
                })
                .collect::<Result<_>>()?;
            Ok(FigureTable {
                figure,
                columns: names(&["p_t", "f1pn", "f2pn", "f3pn"]),
                rows,
            })
        }
        5 => {
            let rows = grid::<T>(0.61, 0.71, 0.001)
                .into_iter()
                .map(|ps| {
                    let band = general_pt_band(pp_fixed, ps);
                    vec![Some(ps), band.lower(), band.upper()]
                })
                .collect();
            Ok(FigureTable {
                figure,
                columns: names(&["p_s", "min_pt", "max_pt"]),
                rows,
            })
        }
        7 => series_table(
            figure,
            "p_t",
            grid(0.51, 1.0, 0.001),
            &[0.52, 0.62, 0.68],
            "f_fail1_prime",
            |pt, ps| Ok(fail_branches(pp_fixed, ps, pt)?.fail1_success2.conditional.coeffs.phi_plus),
        ),
        8 => series_table(
            figure,
            "p_t",
            grid(0.51, 1.0, 0.001),
            &[0.52, 0.62, 0.7, 0.8],
            "f_fail2",
            |pt, ps| Ok(fail_branches(pp_fixed, ps, pt)?.success1_fail2.conditional.coeffs.phi_plus),
        ),
        9 => series_table(
            figure,
            "p_t",
            grid(0.51, 1.0, 0.001),
            &[0.52, 0.62, 0.68],
            "f_fail3",
            |pt, ps| Ok(fail_branches(pp_fixed, ps, pt)?.both_fail.conditional.coeffs.phi_plus),
        ),
        other => Err(Error::UnknownFigure(other)),
    }
}
