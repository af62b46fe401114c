//! The `verify`, `sample` and `oracle` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use warped_soliton::invariant::{ode_residual_null, ode_residuals_from_jets};
use warped_soliton::warped::{assembled_soliton_residual, oracle_residual, pde_residuals};
use warped_soliton::{DenseMatrix, FdScheme};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::model::Model;
use crate::report::{
    DomainFailure, EquationReport, FamilyInfo, FittedOrder, OracleReport, OracleRunReport, OracleStep, PdePoint,
    PdeReport, Provenance, SampleTable, Summary, Verdict, VerifyReport,
};

/// Residuals at or below this are treated as rounding noise when fitting orders.
pub const ORDER_FLOOR: f64 = 1e-9;

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Replaces both the ODE and the PDE tolerance.
    pub tolerance: Option<f64>,
    /// Finest oracle step; the steps become 4h, 2h, h.
    pub fd_step: Option<f64>,
    pub quiet: bool,
}

impl Overrides {
    pub fn apply(&self, run: &RunConfig) -> Result<RunConfig, CliError> {
        let mut run = run.clone();
        if let Some(dir) = &self.out {
            run.output.dir = dir.clone();
        }
        if let Some(f) = self.format {
            run.output.format = f;
        }
        if let Some(t) = self.tolerance {
            run.tolerances.ode = t;
            run.tolerances.pde = t;
        }
        if let Some(h) = self.fd_step {
            run.oracle.steps = vec![4.0 * h, 2.0 * h, h];
        }
        run.validate()?;
        Ok(run)
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

fn family_info(model: &Model) -> FamilyInfo {
    FamilyInfo {
        kind: model.kind.clone(),
        preset: model.preset.clone(),
        causal_type: model.causal_type(),
        n: model.config.n(),
        m: model.config.m(),
        rho: model.config.rho(),
        lambda_f: model.config.lambda_f(),
        alpha: model.direction.alpha().to_vec(),
        k: model.k,
        xi_range: [model.xi_range.0, model.xi_range.1],
        truncation: model.truncation(),
    }
}

fn provenance(run: &RunConfig) -> Result<Provenance, CliError> {
    let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(Provenance {
        tool: "wpsoliton",
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix,
        seed: run.grid.seed,
        run: run.expanded()?,
    })
}

fn ode_row(model: &Model, xi: f64) -> warped_soliton::Result<Vec<f64>> {
    if model.direction.is_null() {
        return Ok(vec![ode_residual_null(&model.config, &model.triple, xi)?]);
    }
    let t = model.triple.eval(xi)?;
    Ok(ode_residuals_from_jets(&model.config, &t, model.direction.norm_class()).to_vec())
}

pub fn verify(run: &RunConfig) -> Result<VerifyReport, CliError> {
    let model = Model::build(run)?;
    let tol = &run.tolerances;
    let names = model.equation_names();
    let mut columns: Vec<Vec<(f64, f64)>> = vec![Vec::new(); names.len()];
    let mut failures = Vec::new();
    for &xi in &model.grid {
        match ode_row(&model, xi) {
            Ok(row) => {
                for (col, v) in columns.iter_mut().zip(row) {
                    col.push((xi, v));
                }
            }
            Err(e) => failures.push(DomainFailure { xi, reason: e.to_string() }),
        }
    }
    let equations: Vec<EquationReport> = names
        .iter()
        .zip(columns)
        .map(|(name, samples)| {
            let summary = Summary::of(&samples);
            EquationReport { name: name.to_string(), tolerance: tol.ode, pass: summary.within(tol.ode), summary, samples }
        })
        .collect();

    let data = model.warped_data()?;
    let mut points = Vec::new();
    for (xi, x) in model.base_points(run.grid.base_points, run.grid.seed, run.grid.offset) {
        match pde_residuals(&data, &x) {
            Ok(r) => points.push(PdePoint {
                xi,
                point: x,
                offdiag: r.offdiag.max_abs(),
                diag: r.diag.iter().fold(0.0, |a: f64, v| a.max(v.abs())),
                fiber: r.fiber.abs(),
            }),
            Err(e) => failures.push(DomainFailure { xi, reason: e.to_string() }),
        }
    }
    let per_point: Vec<(f64, f64)> = points.iter().map(|p| (p.xi, p.offdiag.max(p.diag).max(p.fiber))).collect();
    let summary = Summary::of(&per_point);
    let max_of = |f: fn(&PdePoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let pde = PdeReport {
        tolerance: tol.pde,
        seed: run.grid.seed,
        max_offdiag: max_of(|p| p.offdiag),
        max_diag: max_of(|p| p.diag),
        max_fiber: max_of(|p| p.fiber),
        pass: summary.within(tol.pde),
        summary,
        points,
    };

    let oracle = if run.oracle.enabled { Some(oracle_block(&model, run)?) } else { None };
    let passed = failures.is_empty()
        && equations.iter().all(|e| e.pass)
        && pde.pass
        && oracle.as_ref().is_none_or(|o| o.pass);
    Ok(VerifyReport {
        command: "verify",
        verdict: Verdict::from_pass(passed),
        family: family_info(&model),
        equations,
        pde,
        oracle,
        failures,
        provenance: provenance(run)?,
    })
}

fn oracle_block(model: &Model, run: &RunConfig) -> Result<OracleReport, CliError> {
    let o = &run.oracle;
    let data = model.warped_data()?.with_flat_torus_fiber().map_err(|e| CliError::config("oracle", e))?;
    let points: Vec<Vec<f64>> =
        model.base_points(o.points, run.grid.seed, run.grid.offset).into_iter().map(|(_, x)| x).collect();
    let mut results: Vec<Vec<DenseMatrix<f64>>> = Vec::new();
    for &step in &o.steps {
        let scheme = FdScheme::new(step, o.order).map_err(|e| CliError::config("oracle.steps", e))?;
        let row = points
            .iter()
            .map(|x| {
                oracle_residual(&data, x, &scheme)
                    .map(|r| r.full)
                    .map_err(|e| CliError::config(&format!("oracle at {x:?} with step {step}"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        results.push(row);
    }
    let max_over = |ms: &[DenseMatrix<f64>]| ms.iter().map(|m| m.max_abs()).fold(0.0, f64::max);
    let steps: Vec<OracleStep> =
        o.steps.iter().zip(&results).map(|(&step, ms)| OracleStep { step, max_abs: max_over(ms) }).collect();
    let fitted_order = steps
        .windows(2)
        .map(|w| {
            let (coarse, fine) = (&w[0], &w[1]);
            if coarse.max_abs <= ORDER_FLOOR || fine.max_abs <= ORDER_FLOOR {
                FittedOrder::Floor
            } else {
                FittedOrder::Order((coarse.max_abs / fine.max_abs).ln() / (coarse.step / fine.step).ln())
            }
        })
        .collect();
    let last = results.len() - 1;
    let extrapolated = if last == 0 {
        steps[0].max_abs
    } else {
        let w = (o.steps[last - 1] / o.steps[last]).powi(o.order as i32);
        results[last]
            .iter()
            .zip(&results[last - 1])
            .map(|(fine, coarse)| fine.scale(w).sub(coarse).scale(1.0 / (w - 1.0)).max_abs())
            .fold(0.0, f64::max)
    };
    let (mut closed_form_max, mut closed_form_gap) = (0.0f64, 0.0f64);
    for (x, fd) in points.iter().zip(&results[last]) {
        let jets = data.jets(x).map_err(|e| CliError::config("oracle closed form", e))?;
        let exact = assembled_soliton_residual(&jets);
        closed_form_max = closed_form_max.max(exact.max_abs());
        closed_form_gap = closed_form_gap.max(fd.sub(&exact).max_abs());
    }
    Ok(OracleReport {
        scheme_order: o.order,
        tolerance: run.tolerances.oracle,
        points,
        steps,
        fitted_order,
        extrapolated,
        closed_form_max,
        closed_form_gap,
        pass: extrapolated <= run.tolerances.oracle,
    })
}

pub fn oracle(run: &RunConfig) -> Result<OracleRunReport, CliError> {
    let model = Model::build(run)?;
    let oracle = oracle_block(&model, run)?;
    Ok(OracleRunReport {
        command: "oracle",
        verdict: Verdict::from_pass(oracle.pass),
        family: family_info(&model),
        oracle,
        provenance: provenance(run)?,
    })
}

pub fn sample(run: &RunConfig) -> Result<SampleTable, CliError> {
    let model = Model::build(run)?;
    let mut columns = vec!["xi", "phi", "f", "h", "dphi", "df", "dh", "ddphi", "ddf", "ddh"];
    if model.phase.is_some() {
        columns.extend(["x", "y", "z"]);
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &xi in &model.grid {
        let row = model.triple.eval(xi).and_then(|t| {
            let mut row =
                vec![xi, t.phi.value, t.f.value, t.h.value, t.phi.d1, t.f.d1, t.h.d1, t.phi.d2, t.f.d2, t.h.d2];
            if let Some(flow) = &model.phase {
                let (x, y, z) = flow.phase(xi)?;
                row.extend([x, y, z]);
            }
            Ok(row)
        });
        match row {
            Ok(r) => rows.push(r),
            Err(e) => failures.push(DomainFailure { xi, reason: e.to_string() }),
        }
    }
    Ok(SampleTable { columns, rows, failures, family: family_info(&model), provenance: provenance(run)? })
}

fn out_dir(run: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = run.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn cmd_verify(run: &RunConfig, ov: &Overrides) -> Result<Outcome, CliError> {
    let run = ov.apply(run)?;
    let report = verify(&run)?;
    let dir = out_dir(&run)?;
    let mut files = vec![dir.join("verify_report.json")];
    write_json(&files[0], &report)?;
    if run.output.format == Format::Csv {
        let path = dir.join("verify_residuals.csv");
        let mut header = vec!["xi"];
        header.extend(report.equations.iter().map(|e| e.name.as_str()));
        let len = report.equations.first().map_or(0, |e| e.samples.len());
        let rows = (0..len).map(|i| {
            let mut row = vec![report.equations[0].samples[i].0];
            row.extend(report.equations.iter().map(|e| e.samples[i].1));
            row
        });
        write_csv(&path, &header, rows)?;
        files.push(path);
    }
    if !ov.quiet {
        let f = &report.family;
        println!("verify {}{}: {}", f.kind, f.preset.as_ref().map_or(String::new(), |p| format!(" ({p})")), verdict_word(report.verdict));
        for e in &report.equations {
            println!("  {:<8} max {:.3e}  rms {:.3e}  tol {:.1e}", e.name, e.summary.max_abs, e.summary.rms, e.tolerance);
        }
        println!("  {:<8} max {:.3e}  rms {:.3e}  tol {:.1e}", "pde", report.pde.summary.max_abs, report.pde.summary.rms, report.pde.tolerance);
        if let Some(o) = &report.oracle {
            println!("  {:<8} extrapolated {:.3e}  tol {:.1e}", "oracle", o.extrapolated, o.tolerance);
        }
        for fail in &report.failures {
            println!("  domain failure at xi = {}: {}", fail.xi, fail.reason);
        }
        println!("  report: {}", files[0].display());
    }
    Ok(Outcome { passed: report.verdict.passed(), files })
}

pub fn cmd_oracle(run: &RunConfig, ov: &Overrides) -> Result<Outcome, CliError> {
    let run = ov.apply(run)?;
    let report = oracle(&run)?;
    let dir = out_dir(&run)?;
    let mut files = vec![dir.join("oracle_report.json")];
    write_json(&files[0], &report)?;
    if run.output.format == Format::Csv {
        let path = dir.join("oracle_steps.csv");
        write_csv(&path, &["step", "max_abs"], report.oracle.steps.iter().map(|s| vec![s.step, s.max_abs]))?;
        files.push(path);
    }
    if !ov.quiet {
        let o = &report.oracle;
        println!("oracle {}: {}", report.family.kind, verdict_word(report.verdict));
        for (s, p) in o.steps.iter().zip(std::iter::once(None).chain(o.fitted_order.iter().map(Some))) {
            let order = match p {
                Some(FittedOrder::Order(v)) => format!("  order {v:.3}"),
                Some(FittedOrder::Floor) => "  order floor".to_string(),
                None => String::new(),
            };
            println!("  step {:.1e}  max {:.3e}{order}", s.step, s.max_abs);
        }
        println!("  extrapolated {:.3e}  closed-form gap {:.3e}  tol {:.1e}", o.extrapolated, o.closed_form_gap, o.tolerance);
        println!("  report: {}", files[0].display());
    }
    Ok(Outcome { passed: report.verdict.passed(), files })
}

pub fn cmd_sample(run: &RunConfig, ov: &Overrides) -> Result<Outcome, CliError> {
    let run = ov.apply(run)?;
    let table = sample(&run)?;
    let dir = out_dir(&run)?;
    let path = match run.output.format {
        Format::Csv => {
            let path = dir.join("samples.csv");
            write_csv(&path, &table.columns, table.rows.iter().cloned())?;
            path
        }
        Format::Json => {
            let path = dir.join("samples.json");
            write_json(&path, &table)?;
            path
        }
    };
    for fail in &table.failures {
        eprintln!("sample: xi = {} skipped: {}", fail.xi, fail.reason);
    }
    if !ov.quiet {
        println!("sample {}: {} rows -> {}", table.family.kind, table.rows.len(), path.display());
    }
    Ok(Outcome { passed: table.failures.is_empty(), files: vec![path] })
}

fn verdict_word(v: Verdict) -> &'static str {
    if v.passed() {
        "PASS"
    } else {
        "FAIL"
    }
}
