//! Subcommand implementations. Each returns a table and whether a gating
//! check failed.

use hepp_core::analytic::{
    fail_branches_for, figure_data, general_ps_band, general_pt_band, label_classes,
    step1_general, step1_simple, step2_general, step2_simple, StepResult,
};
use hepp_core::efficiency::{p2t_diagnostic, ratio_curve, EfficiencyParams};
use hepp_core::model::{BellCoeffs, BellKind, NoiseModel, NoiseParams};
use hepp_core::optics::OutcomeClass;
use hepp_core::protocol::{iterate, run, RoundPlan};
use hepp_core::verify::{
    grid_axis, grid_deviation, predict_classes, step2_linearity_deviation, ClassPrediction,
    Reference,
};
use hepp_core::Error;

use crate::args::{
    EfficiencyArgs, IterateArgs, PurifyArgs, SweepArgs, Target, ThresholdArgs, Vary, VerifyArgs,
};
use crate::output::{fmt_num, Cell, Section, Table};
use crate::CliError;

pub struct Report {
    pub table: Table,
    pub failed: bool,
}

impl From<Table> for Report {
    fn from(table: Table) -> Report {
        Report {
            table,
            failed: false,
        }
    }
}

const COEFF_NAMES: [&str; 4] = ["phi_plus", "phi_minus", "psi_plus", "psi_minus"];

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn unit(name: &str, v: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(format!("--{name} must lie in [0, 1], got {v}")))
    }
}

fn coeff_cells(c: Option<BellCoeffs<f64>>) -> Vec<Cell> {
    match c {
        Some(c) => c.to_array().into_iter().map(Cell::Num).collect(),
        None => vec![Cell::Missing(""); 4],
    }
}

/// `steps` evenly spaced points with both ends included.
fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    let n = (steps - 1) as f64;
    (0..steps)
        .map(|i| if i + 1 == steps { to } else { from + (to - from) * i as f64 / n })
        .collect()
}

fn check_range(from: f64, to: f64, steps: usize) -> Result<(), CliError> {
    unit("from", from)?;
    unit("to", to)?;
    if !(from < to) {
        return Err(invalid(format!("--from ({from}) must be below --to ({to})")));
    }
    if steps < 2 {
        return Err(invalid("--steps must be at least 2"));
    }
    Ok(())
}

/// Label-map predictions, used where the closed forms are undefined
/// (e.g. zero-probability conditioning branches at the cube corners).
fn label_predictions(np: &NoiseParams<f64>, model: NoiseModel) -> [ClassPrediction<f64>; 4] {
    let classes = label_classes(
        &BellCoeffs::werner(np.pp),
        &model.coeffs(np.ps),
        &model.coeffs(np.pt),
    );
    std::array::from_fn(|i| ClassPrediction {
        class: OutcomeClass::ALL[i],
        probability: classes[i].probability,
        coeffs: classes[i].coeffs,
        reference: Reference::LabelMap,
    })
}

pub fn purify(a: &PurifyArgs) -> Result<Report, CliError> {
    let np = NoiseParams::new(unit("pp", a.pp)?, unit("ps", a.ps)?, unit("pt", a.pt)?)?;
    let model = NoiseModel::from(a.noise);
    let reports = run(&np, model);
    let predictions = predict_classes(&np, model).unwrap_or_else(|_| label_predictions(&np, model));
    let mut columns = vec!["class", "probability_engine", "probability_analytic"];
    let engine_cols: Vec<String> = COEFF_NAMES.iter().map(|k| format!("f_{k}_engine")).collect();
    let analytic_cols: Vec<String> = COEFF_NAMES.iter().map(|k| format!("f_{k}_analytic")).collect();
    columns.extend(engine_cols.iter().map(String::as_str));
    columns.extend(analytic_cols.iter().map(String::as_str));
    columns.extend(["offdiag_residual", "analytic_source", "max_abs_diff"]);
    let rows = reports
        .iter()
        .zip(&predictions)
        .map(|(r, p)| {
            let engine = r.pol_coeffs();
            let analytic = (p.probability > f64::EPSILON).then_some(p.coeffs);
            let mut diff = (r.probability() - p.probability).abs();
            if let (Some(e), Some(q)) = (engine, analytic) {
                diff = diff.max(e.max_abs_diff(&q));
            }
            let mut row = vec![
                Cell::from(r.class.name()),
                Cell::Num(r.probability()),
                Cell::Num(p.probability),
            ];
            row.extend(coeff_cells(engine));
            row.extend(coeff_cells(analytic));
            row.push(Cell::opt(r.bell_offdiag_residual(), ""));
            row.push(Cell::Text(p.reference.to_string()));
            row.push(Cell::Num(diff));
            row
        })
        .collect();
    Ok(Table::with_rows(&columns, rows).into())
}

fn sweep_point(target: Target, model: NoiseModel, pp: f64, ps: f64, pt: f64) -> hepp_core::Result<StepResult<f64>> {
    let simple = model == NoiseModel::BitFlipOnly;
    Ok(match target {
        Target::Step1 if simple => step1_simple(pp, ps)?,
        Target::Step1 => step1_general(pp, ps)?,
        Target::Step2 if simple => step2_simple(pp, ps, pt)?,
        Target::Step2 => step2_general(pp, ps, pt)?,
        Target::Fail1 => fail_branches_for(model, pp, ps, pt)?.fail1_success2.conditional,
        Target::Fail2 => fail_branches_for(model, pp, ps, pt)?.success1_fail2.conditional,
        Target::Fail3 => fail_branches_for(model, pp, ps, pt)?.both_fail.conditional,
    })
}

fn figure_table(figure: u32) -> Result<Report, CliError> {
    if !matches!(figure, 2 | 4 | 7 | 8 | 9) {
        return Err(invalid(format!(
            "sweep --figure takes 2, 4, 7, 8 or 9 (3 and 5: thresholds, 6: efficiency), got {figure}"
        )));
    }
    let t = figure_data::<f64>(figure)?;
    let columns: Vec<&str> = t.columns.iter().map(String::as_str).collect();
    let rows = t
        .rows
        .iter()
        .map(|r| r.iter().map(|&x| Cell::opt(x, "")).collect())
        .collect();
    Ok(Table::with_rows(&columns, rows).into())
}

pub fn sweep(a: &SweepArgs) -> Result<Report, CliError> {
    if let Some(fig) = a.figure {
        return figure_table(fig);
    }
    let vary = a.vary.ok_or_else(|| invalid("sweep needs --vary or --figure"))?;
    let (from, to) = match (a.from, a.to) {
        (Some(f), Some(t)) => (f, t),
        _ => return Err(invalid("sweep --vary needs --from and --to")),
    };
    check_range(from, to, a.steps)?;
    let model = NoiseModel::from(a.noise);
    let needs_pt = a.target != Target::Step1;
    let fixed = |name: &str, v: Option<f64>, varied: bool, needed: bool| -> Result<f64, CliError> {
        match (varied, needed, v) {
            (true, _, _) | (false, false, None) => Ok(0.5),
            (false, _, Some(x)) => unit(name, x),
            (false, true, None) => Err(invalid(format!("sweep needs --{name} when not varying it"))),
        }
    };
    let pp = fixed("pp", a.pp, vary == Vary::Pp, true)?;
    let ps = fixed("ps", a.ps, vary == Vary::Ps, true)?;
    let pt = fixed("pt", a.pt, vary == Vary::Pt, needs_pt)?;
    let rows = linspace(from, to, a.steps)
        .into_iter()
        .map(|x| {
            let (pp, ps, pt) = match vary {
                Vary::Pp => (x, ps, pt),
                Vary::Ps => (pp, x, pt),
                Vary::Pt => (pp, ps, x),
            };
            let mut row = vec![Cell::Num(x)];
            match sweep_point(a.target, model, pp, ps, pt) {
                Ok(r) => {
                    row.extend(coeff_cells(Some(r.coeffs)));
                    row.push(Cell::Num(r.probability));
                }
                Err(Error::Degenerate(_)) => {
                    row.extend(coeff_cells(None));
                    row.push(Cell::Num(0.0));
                }
                Err(e) => return Err(CliError::from(e)),
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table::with_rows(
        &["param", "f_phi_plus", "f_phi_minus", "f_psi_plus", "f_psi_minus", "probability"],
        rows,
    )
    .into())
}

pub fn thresholds(a: &ThresholdArgs) -> Result<Report, CliError> {
    let (from, to, steps) = match a.figure {
        3 => (0.505, 0.95, 90),
        5 => (0.61, 0.71, 101),
        other => {
            return Err(invalid(format!("thresholds --figure takes 3 or 5, got {other}")));
        }
    };
    let (from, to, steps) = (a.from.unwrap_or(from), a.to.unwrap_or(to), a.steps.unwrap_or(steps));
    check_range(from, to, steps)?;
    let pp = unit("pp", a.pp)?;
    let rows = linspace(from, to, steps)
        .into_iter()
        .map(|x| {
            let band = if a.figure == 3 {
                general_ps_band(x)
            } else {
                general_pt_band(pp, x)
            };
            vec![
                Cell::Num(x),
                Cell::opt(band.lower(), "empty"),
                Cell::opt(band.upper(), "empty"),
            ]
        })
        .collect();
    Ok(Table::with_rows(&["param", "min_threshold", "max_threshold"], rows).into())
}

/// The two published fidelity sets (low and high initial fidelity).
pub const EFFICIENCY_CASES: [(f64, f64, f64); 2] = [(0.52, 0.56, 0.60), (0.8, 0.82, 0.85)];

pub fn efficiency(a: &EfficiencyArgs) -> Result<Report, CliError> {
    if let Some(f) = a.figure {
        if f != 6 {
            return Err(invalid(format!("efficiency --figure takes 6, got {f}")));
        }
    }
    let cases = match (a.pp, a.ps, a.pt) {
        (None, None, None) => EFFICIENCY_CASES.to_vec(),
        (Some(pp), Some(ps), Some(pt)) => vec![(unit("pp", pp)?, unit("ps", ps)?, unit("pt", pt)?)],
        _ => return Err(invalid("efficiency takes all of --pp --ps --pt or none")),
    };
    if !(a.d_from >= 0.0 && a.d_from < a.d_to) {
        return Err(invalid(format!(
            "need 0 <= --d-from < --d-to, got {} and {}",
            a.d_from, a.d_to
        )));
    }
    if a.steps < 2 {
        return Err(invalid("--steps must be at least 2"));
    }
    let ep = EfficiencyParams::new(0.0, a.d0, a.eta_d, a.eta_c)?;
    let grid = linspace(a.d_from, a.d_to, a.steps);
    let mut table = Table::new(&["d_km", "E_o", "E_n", "R", "log10R"]);
    for (pp, ps, pt) in cases {
        let curve = ratio_curve(&NoiseParams::new(pp, ps, pt)?, &ep, &grid)?;
        table.sections.push(Section {
            context: vec![
                ("p_p".into(), Cell::Num(pp)),
                ("p_s".into(), Cell::Num(ps)),
                ("p_t".into(), Cell::Num(pt)),
            ],
            rows: curve
                .points
                .iter()
                .map(|p| vec![p.d.into(), p.e_o.into(), p.e_n.into(), p.r.into(), p.log10_r.into()])
                .collect(),
            trailer: vec![("slope_log10R_per_km".into(), Cell::Num(curve.slope))],
        });
    }
    Ok(table.into())
}

pub fn verify(a: &VerifyArgs) -> Result<Report, CliError> {
    if !(a.tol > 0.0) {
        return Err(invalid(format!("--tol must be positive, got {}", a.tol)));
    }
    if a.steps == 0 {
        return Err(invalid("--steps must be at least 1"));
    }
    let grid = grid_deviation::<f64>(a.steps)?;
    let linearity = step2_linearity_deviation::<f64>()?;
    let status = |ok: bool| Cell::from(if ok { "pass" } else { "fail" });
    let grid_ok = grid.worst.value <= a.tol;
    let lin_ok = linearity <= a.tol;
    let at = grid.worst_at.map_or(String::new(), |(m, pp, ps, pt)| {
        format!("model={m:?};p_p={};p_s={};p_t={};", fmt_num(pp), fmt_num(ps), fmt_num(pt))
    });
    let mut rows = vec![
        vec![
            "grid_equivalence".into(),
            status(grid_ok),
            Cell::Num(grid.worst.value),
            Cell::Num(a.tol),
            Cell::Text(format!("{at}quantity={};points={}", grid.worst.quantity, grid.points)),
        ],
        vec![
            "step2_linearity".into(),
            status(lin_ok),
            Cell::Num(linearity),
            Cell::Num(a.tol),
            "cases=6".into(),
        ],
    ];
    for pp in grid_axis::<f64>(5) {
        let d = p2t_diagnostic(pp);
        rows.push(vec![
            "p2t_printed_over_enumerated".into(),
            "info".into(),
            Cell::Num(d.ratio),
            Cell::Missing(""),
            Cell::Text(format!(
                "p_p={};printed={};enumerated={}",
                fmt_num(pp),
                fmt_num(d.printed),
                fmt_num(d.enumerated)
            )),
        ]);
    }
    Ok(Report {
        table: Table::with_rows(&["check", "status", "value", "tolerance", "detail"], rows),
        failed: !(grid_ok && lin_ok),
    })
}

pub fn iterate_rounds(a: &IterateArgs) -> Result<Report, CliError> {
    let np = NoiseParams::new(unit("pp", a.pp)?, unit("ps", a.ps)?, unit("pt", a.pt)?)?;
    let plan = RoundPlan::new(a.rounds, a.reuse.into())
        .map_err(|_| invalid("--rounds must be at least 1"))?;
    let rounds = iterate(&np, a.noise.into(), &plan)?;
    let mut rows = Vec::new();
    for (i, r) in rounds.iter().enumerate() {
        for rep in &r.reports {
            let mut row = vec![
                Cell::Int(i as u64 + 1),
                Cell::Num(r.input_fidelity),
                Cell::from(rep.class.name()),
                Cell::Num(rep.probability()),
            ];
            row.extend(coeff_cells(rep.pol_coeffs()));
            row.push(Cell::Bool(r.selected == Some(rep.class)));
            rows.push(row);
        }
    }
    let final_fidelity = rounds
        .last()
        .and_then(|r| r.selected_report())
        .and_then(|rep| rep.pol_coeffs())
        .map(|c| c.get(BellKind::PhiPlus));
    let mut table = Table::with_rows(
        &[
            "round",
            "input_fidelity",
            "class",
            "probability",
            "f_phi_plus",
            "f_phi_minus",
            "f_psi_plus",
            "f_psi_minus",
            "selected",
        ],
        rows,
    );
    table.sections[0].trailer = vec![
        ("rounds_completed".into(), Cell::Int(rounds.len() as u64)),
        ("final_fidelity".into(), Cell::opt(final_fidelity, "none")),
    ];
    Ok(table.into())
}
