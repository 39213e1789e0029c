//! Command dispatch, report assembly and output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use lamsep_core::field::{laminar_field, stationary_gradp_field, AdvectionVariant};
use lamsep_core::nssim::{run_experiment_with_state, write_field_csv, write_series_csv, ExperimentReport};
use lamsep_core::theorems::{
    adjudicate_advection, theorem1_verify_with, theorem2_limit_on, write_theorem_csv, Agreement, Theorem1Report,
    Theorem2Report, AGREEMENT_TOLERANCE,
};
use lamsep_core::tracing::synthetic::{
    angular_pressure, fan_field, graded_fan_field, perturbed_pressure, wall_normal_pressure,
};
use lamsep_core::tracing::{
    classify_flow, eta_ratio, trace_pressure_line, trace_streamline, zeta_check, EtaRatio, FlowClass,
    PressureDirection, ZetaReport,
};
use lamsep_core::{Arc64, LaminarParams, Params64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, FieldChoice, PressureChoice, RunConfig, TraceKind};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUT: &str = "out";

/// Radii of the advection adjudication, as fractions of `min(bl, delta)`.
const ADVECTION_RADII: [f64; 3] = [0.05, 0.1, 0.2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub kind: TraceKind,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub length: f64,
    pub points: usize,
    /// Level-set ratio at the start point, for pressure traces.
    pub eta_ratio: Option<EtaRatio>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub nu: f64,
    pub min_mismatch: f64,
    pub limit_extrapolated: f64,
    pub oracle_value: f64,
    pub paper_value: f64,
    pub agrees_with: Agreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Results {
    Theorem1(Theorem1Report),
    Theorem2(Theorem2Report),
    Classification(FlowClass),
    Trace(TraceResult),
    Zeta(ZetaReport),
    Simulation(ExperimentReport),
    Sweep(Vec<SweepRow>),
}

/// Outcomes of the two closed-form adjudications for the run's parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Errata {
    pub advection_variant: Option<AdvectionVariant>,
    pub advection_note: String,
    pub theorem2_agrees_with: Option<Agreement>,
    pub theorem2_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: Command,
    pub config: RunConfig,
    pub results: Results,
    pub wall_clock_seconds: f64,
    pub library_version: String,
    pub errata: Errata,
}

fn disagrees(paper: f64, oracle: f64) -> bool {
    (paper - oracle).abs() > AGREEMENT_TOLERANCE * oracle.abs()
}

impl RunReport {
    /// 2 when the payload carries a printed-vs-oracle disagreement, else 0.
    pub fn exit_code(&self) -> i32 {
        let split = match &self.results {
            Results::Theorem2(t) => disagrees(t.paper_value, t.oracle_value),
            Results::Sweep(rows) => rows.iter().any(|r| disagrees(r.paper_value, r.oracle_value)),
            _ => false,
        };
        if split {
            2
        } else {
            0
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        match &self.results {
            Results::Theorem1(t) => format!("min mismatch M = {:.10} over {} radii", t.min_mismatch, t.rows.len()),
            Results::Theorem2(t) => format!(
                "limit {:.8} (oracle {:.8}, printed {:.8}), agrees with {}",
                t.limit_extrapolated.value, t.oracle_value, t.paper_value, t.agrees_with
            ),
            Results::Classification(c) => format!("{:?}", c.kind),
            Results::Trace(t) => format!("{} points, length {:.6}", t.points, t.length),
            Results::Zeta(z) => format!(
                "normalized length limit {:.8}, bounds hold: {}",
                z.normalized_limit.value,
                z.checks.all()
            ),
            Results::Simulation(s) => {
                let r: Vec<String> = s.initial_ratios.iter().map(|x| format!("{}: {:.6}", x.r, x.ratio)).collect();
                format!("{} steps, initial ratios [{}]", s.steps, r.join(", "))
            }
            Results::Sweep(rows) => format!("{} parameter points", rows.len()),
        }
    }
}

fn errata(p: &Params64, delta: f64) -> Errata {
    let near = p.boundary_layer_thickness().map_or(delta, |bl| bl.min(delta));
    let radii: Vec<f64> = ADVECTION_RADII.iter().map(|f| f * near).collect();
    let (advection_variant, advection_note) = match adjudicate_advection(p, delta, &radii, 1e-6) {
        Ok(a) => {
            let note = match a.matching {
                Some(v) => format!("finite-difference normal advection matches the {v} form at r = {radii:?}"),
                None => "finite-difference normal advection matches neither closed form".to_string(),
            };
            (a.matching, note)
        }
        Err(e) => (None, format!("advection adjudication failed: {e}")),
    };
    let (theorem2_agrees_with, theorem2_note) = match lamsep_core::theorems::theorem2_limit(p, delta) {
        Ok(t) => (
            Some(t.agrees_with),
            format!(
                "wall limit {} (exact oracle {}), printed closed form {}: agrees with {}",
                t.limit_extrapolated.value, t.oracle_value, t.paper_value, t.agrees_with
            ),
        ),
        Err(e) => (None, format!("wall limit not evaluated: {e}")),
    };
    Errata {
        advection_variant,
        advection_note,
        theorem2_agrees_with,
        theorem2_note,
    }
}

/// CSV payload written to `data.csv`, plus an optional `field.csv`.
struct Outputs {
    data: Vec<u8>,
    field: Option<Vec<u8>>,
}

fn compute(cfg: &RunConfig, arc: &Arc64, p: &Params64) -> Result<(Results, Outputs), CliError> {
    let delta = arc.delta();
    let mut data = Vec::new();
    let mut field = None;
    let results = match cfg.command() {
        Command::VerifyTheorem1 => {
            let grid = cfg.r_grid.clone().unwrap_or_default();
            let variant = cfg.variant.unwrap_or(AdvectionVariant::Paper);
            let rep = theorem1_verify_with(p, delta, &grid, cfg.use_tracing.unwrap_or(false), variant)?;
            write_theorem_csv(p, delta, &grid, &mut data)?;
            Results::Theorem1(rep)
        }
        Command::VerifyTheorem2 => {
            let grid = cfg.r_grid.clone().unwrap_or_default();
            let rep = theorem2_limit_on(p, delta, &grid)?;
            let radii: Vec<f64> = rep.samples.iter().map(|s| s.0).collect();
            write_theorem_csv(p, delta, &radii, &mut data)?;
            Results::Theorem2(rep)
        }
        Command::Classify => {
            let f = match cfg.field.unwrap_or(FieldChoice::Laminar) {
                FieldChoice::Laminar => laminar_field(arc, p),
                FieldChoice::Fan => fan_field(arc, cfg.source_s.unwrap_or_default())?,
                FieldChoice::GradedFan => graded_fan_field(arc, cfg.ell.unwrap_or(delta))?,
            };
            let tc = cfg.trace_config(arc, p)?;
            let radii = cfg.radii.clone().unwrap_or_default();
            let class = classify_flow(
                &f,
                arc,
                &radii,
                cfg.s.unwrap_or_default(),
                cfg.s1.unwrap_or_default(),
                cfg.c_threshold.unwrap_or(1.2),
                &tc,
            )?;
            let mut w = csv::Writer::from_writer(&mut data);
            w.write_record(["r", "l_over_r"])?;
            for (r, q) in &class.evidence {
                w.write_record([r.to_string(), q.to_string()])?;
            }
            w.flush()?;
            drop(w);
            Results::Classification(class)
        }
        Command::Trace => {
            let tc = cfg.trace_config(arc, p)?;
            let (s0, r0) = (cfg.start_s.unwrap_or_default(), cfg.start_r.unwrap_or_default());
            let start = arc.at(s0, r0);
            let kind = cfg.trace.unwrap_or(TraceKind::Streamline);
            let variant = cfg.variant.unwrap_or(AdvectionVariant::Paper);
            let (line, eta) = match kind {
                TraceKind::Streamline => (trace_streamline(&laminar_field(arc, p), start, &tc)?, None),
                TraceKind::PressureAlong | TraceKind::PressurePerpendicular => {
                    let g = stationary_gradp_field(arc, p, variant);
                    let dir = if kind == TraceKind::PressureAlong {
                        PressureDirection::Along
                    } else {
                        PressureDirection::Perpendicular
                    };
                    let line = trace_pressure_line(&g, start, &tc, dir)?;
                    let eps = cfg.eps_list.clone().unwrap_or_default();
                    (line, Some(eta_ratio(&g, arc, s0, r0, &eps, &tc)?))
                }
            };
            line.write_csv(&mut data)?;
            let end = line.last();
            Results::Trace(TraceResult {
                kind,
                start: [start.x, start.y],
                end: [end.x, end.y],
                length: line.length(),
                points: line.points().len(),
                eta_ratio: eta,
            })
        }
        Command::ZetaCheck => {
            let kappa = cfg.kappa.unwrap_or(2.0);
            let pf = match cfg.pressure.unwrap_or(PressureChoice::Angular) {
                PressureChoice::Angular => angular_pressure(arc, p),
                PressureChoice::Perturbed => perturbed_pressure(arc, p, kappa),
                PressureChoice::WallNormal => wall_normal_pressure(arc, p, kappa),
            };
            let tc = cfg.trace_config(arc, p)?;
            let rep = zeta_check(
                &pf,
                arc,
                p,
                cfg.s.unwrap_or_default(),
                &cfg.r_list.clone().unwrap_or_default(),
                cfg.eps_over_r.unwrap_or(1.0),
                &cfg.tolerances()?,
                &tc,
            )?;
            let mut w = csv::Writer::from_writer(&mut data);
            w.write_record([
                "r",
                "eps",
                "s_hat",
                "r_hat",
                "s_hathat",
                "r_hathat",
                "zeta_length",
                "normalized_length",
            ])?;
            for z in &rep.samples {
                w.write_record(
                    [z.r, z.eps, z.s_hat, z.r_hat, z.s_hathat, z.r_hathat, z.zeta_length, z.normalized_length]
                        .map(|v| v.to_string()),
                )?;
            }
            w.flush()?;
            drop(w);
            Results::Zeta(rep)
        }
        Command::Simulate => {
            let sim = cfg.sim_config(arc, p);
            let (rep, state) = run_experiment_with_state(&sim)?;
            write_series_csv(&rep.series, &mut data)?;
            if cfg.write_field.unwrap_or(false) {
                let mut buf = Vec::new();
                let c = arc.center();
                write_field_csv(&state, [c.x, c.y], &mut buf)?;
                field = Some(buf);
            }
            Results::Simulation(rep)
        }
        Command::Sweep => {
            let rows = sweep(cfg)?;
            let mut w = csv::Writer::from_writer(&mut data);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            drop(w);
            Results::Sweep(rows)
        }
    };
    Ok((results, Outputs { data, field }))
}

/// Theorem 2 limits and Theorem 1 minimum mismatches over the sweep grid,
/// ordered delta-major, then alpha1, alpha2, nu.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let axis = |a: &Option<Vec<f64>>| a.clone().unwrap_or_default();
    let mut points = Vec::new();
    for &delta in &axis(&cfg.sweep_delta) {
        for &a1 in &axis(&cfg.sweep_alpha1) {
            for &a2 in &axis(&cfg.sweep_alpha2) {
                for &nu in &axis(&cfg.sweep_nu) {
                    points.push((delta, a1, a2, nu));
                }
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::Validation(vec!["sweep grid is empty".into()]));
    }
    points
        .par_iter()
        .map(|&(delta, alpha1, alpha2, nu)| {
            let p = LaminarParams::new(alpha1, alpha2, nu)?;
            let grid = lamsep_core::theorems::default_r_grid(&p, delta);
            let t1 = lamsep_core::theorems::theorem1_verify(&p, delta, &grid, false)?;
            let t2 = lamsep_core::theorems::theorem2_limit(&p, delta)?;
            Ok(SweepRow {
                delta,
                alpha1,
                alpha2,
                nu,
                min_mismatch: t1.min_mismatch,
                limit_extrapolated: t2.limit_extrapolated.value,
                oracle_value: t2.oracle_value,
                paper_value: t2.paper_value,
                agrees_with: t2.agrees_with,
            })
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    f.write_all(bytes).map_err(io)?;
    f.flush().map_err(io)
}

/// Output directory of a resolved config.
pub fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs a resolved config and writes `report.json`, `data.csv` and (for
/// simulations with `write_field`) `field.csv` to the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let p = cfg.params()?;
    let arc = cfg.arc()?;
    let (results, outputs) = compute(cfg, &arc, &p)?;
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: cfg.command(),
        config: cfg.clone(),
        results,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        library_version: lamsep_core::VERSION.to_string(),
        errata: errata(&p, arc.delta()),
    };
    let dir = out_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    write_file(&dir.join("data.csv"), &outputs.data)?;
    if let Some(f) = &outputs.field {
        write_file(&dir.join("field.csv"), f)?;
    }
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_file(&dir.join("report.json"), &json)?;
    Ok(report)
}
