//! Flat JSON run configuration.
//!
//! Every key is optional in the file; [`RunConfig::resolve`] fills the
//! defaults that apply to the selected command and collects every
//! violation in one [`CliError::Validation`].

use std::fmt;
use std::path::{Path, PathBuf};

use lamsep_core::field::AdvectionVariant;
use lamsep_core::nssim::{EndPressure, InitialProfile, SimConfig};
use lamsep_core::theorems::default_r_grid;
use lamsep_core::tracing::{default_eps_list, BoundTolerances, IntegratorOrder, TraceConfig};
use lamsep_core::{Arc64, ArcBoundary, LaminarParams, Params64, Vec2};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyTheorem1,
    VerifyTheorem2,
    Classify,
    Trace,
    ZetaCheck,
    Simulate,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::VerifyTheorem1 => "verify-theorem1",
            Command::VerifyTheorem2 => "verify-theorem2",
            Command::Classify => "classify",
            Command::Trace => "trace",
            Command::ZetaCheck => "zeta-check",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
        })
    }
}

/// Built-in velocity fields for `classify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    Laminar,
    Fan,
    GradedFan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Streamline,
    PressureAlong,
    PressurePerpendicular,
}

/// Built-in pressure fields for `zeta-check`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureChoice {
    Angular,
    Perturbed,
    WallNormal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,

    pub alpha1: Option<f64>,
    /// 0 selects the pure shear profile.
    pub alpha2: Option<f64>,
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    pub phase: Option<f64>,
    pub center: Option<[f64; 2]>,
    pub s_range: Option<[f64; 2]>,

    // verify-theorem1 / verify-theorem2
    pub r_grid: Option<Vec<f64>>,
    pub use_tracing: Option<bool>,
    pub variant: Option<AdvectionVariant>,

    // tracing
    pub step: Option<f64>,
    pub max_length: Option<f64>,
    pub stagnation_tol: Option<f64>,
    pub integrator_order: Option<IntegratorOrder>,

    // classify
    pub field: Option<FieldChoice>,
    pub source_s: Option<f64>,
    pub ell: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub s1: Option<f64>,
    pub c_threshold: Option<f64>,

    // trace
    pub trace: Option<TraceKind>,
    pub start_s: Option<f64>,
    pub start_r: Option<f64>,
    pub eps_list: Option<Vec<f64>>,

    // zeta-check
    pub pressure: Option<PressureChoice>,
    pub kappa: Option<f64>,
    pub r_list: Option<Vec<f64>>,
    pub eps_over_r: Option<f64>,
    pub c: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub epsilon_hat: Option<f64>,

    // simulate
    pub sector_angle: Option<f64>,
    pub outer_offset: Option<f64>,
    pub n_s: Option<usize>,
    pub n_r: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub probes: Option<Vec<f64>>,
    pub record_every: Option<usize>,
    pub solver_tolerance: Option<f64>,
    pub end_pressure: Option<EndPressure>,
    pub initial: Option<InitialProfile>,
    pub inviscid: Option<bool>,
    pub write_field: Option<bool>,

    // sweep
    pub sweep_delta: Option<Vec<f64>>,
    pub sweep_alpha1: Option<Vec<f64>>,
    pub sweep_alpha2: Option<Vec<f64>>,
    pub sweep_nu: Option<Vec<f64>>,

    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Parses and resolves a config file; overrides win over file values.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_str(&text, &p.display().to_string())?
        }
        None => RunConfig::default(),
    };
    cfg.apply(overrides);
    cfg.resolve()?;
    Ok(cfg)
}

/// Strict JSON parse without resolution.
pub fn parse_str(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn fill<T: Clone>(slot: &mut Option<T>, v: T) {
    if slot.is_none() {
        *slot = Some(v);
    }
}

fn positive(bad: &mut Vec<String>, name: &str, v: Option<f64>) {
    if let Some(v) = v {
        if !(v > 0.0) || !v.is_finite() {
            bad.push(format!("{name} must be > 0, got {v}"));
        }
    }
}

fn decreasing(bad: &mut Vec<String>, name: &str, v: &Option<Vec<f64>>) {
    if let Some(v) = v {
        if v.is_empty() || v.iter().any(|x| !(*x > 0.0)) || v.windows(2).any(|w| w[1] >= w[0]) {
            bad.push(format!("{name} must be non-empty, positive and strictly decreasing"));
        }
    }
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! over {
            ($($f:ident),*) => {$(if o.$f.is_some() { self.$f = o.$f.clone(); })*};
        }
        over!(command, alpha1, alpha2, nu, delta, out);
    }

    pub fn command(&self) -> Command {
        self.command.unwrap_or(Command::VerifyTheorem1)
    }

    pub fn params(&self) -> lamsep_core::Result<Params64> {
        let (a1, a2, nu) = (self.alpha1.unwrap_or(f64::NAN), self.alpha2.unwrap_or(f64::NAN), self.nu.unwrap_or(f64::NAN));
        if a2 == 0.0 {
            LaminarParams::pure_shear(a1, nu)
        } else {
            LaminarParams::new(a1, a2, nu)
        }
    }

    pub fn arc(&self) -> lamsep_core::Result<Arc64> {
        let delta = self.delta.unwrap_or(f64::NAN);
        let c = self.center.unwrap_or([0.0, 0.0]);
        let range = self.s_range.unwrap_or([-0.5 * delta, 0.5 * delta]);
        ArcBoundary::new(delta, self.phase.unwrap_or(0.0), Vec2::new(c[0], c[1]), range)
    }

    /// Natural length scale near the wall: `min(bl, delta)`.
    fn near_scale(&self, p: &Params64, delta: f64) -> f64 {
        p.boundary_layer_thickness().map_or(delta, |bl| bl.min(delta))
    }

    pub fn trace_config(&self, arc: &Arc64, p: &Params64) -> lamsep_core::Result<TraceConfig> {
        let d = TraceConfig::default_for(arc, p);
        TraceConfig::new(
            self.step.unwrap_or(d.step),
            self.max_length.unwrap_or(d.max_length),
            self.stagnation_tol.unwrap_or(d.stagnation_tol),
            self.integrator_order.unwrap_or(d.integrator_order),
        )
    }

    pub fn tolerances(&self) -> lamsep_core::Result<BoundTolerances> {
        BoundTolerances::new(
            self.c.unwrap_or(50.0),
            self.c1.unwrap_or(50.0),
            self.c2.unwrap_or(50.0),
            self.epsilon_hat.unwrap_or(0.25),
        )
    }

    pub fn sim_config(&self, arc: &Arc64, p: &Params64) -> SimConfig {
        let mut s = SimConfig::new(*arc, p.clone());
        macro_rules! copy {
            ($($f:ident),*) => {$(if let Some(v) = self.$f.clone() { s.$f = v; })*};
        }
        copy!(sector_angle, n_s, n_r, t_end, record_every, solver_tolerance, end_pressure, initial, inviscid);
        s.outer_offset = self.outer_offset;
        s.dt = self.dt;
        s.probes = self.probes.clone();
        s
    }

    /// Fills defaults for the selected command and validates everything.
    pub fn resolve(&mut self) -> Result<(), CliError> {
        let mut bad = Vec::new();
        let command = self.command();
        self.command = Some(command);
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("nu", self.nu), ("delta", self.delta)] {
            if v.is_none() {
                bad.push(format!("missing required key {name}"));
            }
        }
        if !bad.is_empty() {
            return Err(CliError::Validation(bad));
        }
        if let Some(a2) = self.alpha2 {
            if a2 < 0.0 {
                bad.push(format!("alpha2 must be >= 0, got {a2}"));
            }
        }
        let params = self.params().map_err(|e| bad.push(e.to_string())).ok();
        let arc = self.arc().map_err(|e| bad.push(e.to_string())).ok();
        let (Some(params), Some(arc)) = (params, arc) else {
            return Err(CliError::Validation(bad));
        };
        let delta = arc.delta();
        let near = self.near_scale(&params, delta);
        let [lo, hi] = arc.s_range();
        let width = hi - lo;
        fill(&mut self.phase, arc.phase());
        fill(&mut self.center, [arc.center().x, arc.center().y]);
        fill(&mut self.s_range, [lo, hi]);

        match command {
            Command::VerifyTheorem1 | Command::VerifyTheorem2 => {
                fill(&mut self.r_grid, default_r_grid(&params, delta));
                fill(&mut self.use_tracing, false);
                fill(&mut self.variant, AdvectionVariant::Paper);
                decreasing(&mut bad, "r_grid", &self.r_grid);
                if let (Some(bl), Some(g)) = (params.boundary_layer_thickness(), &self.r_grid) {
                    if command == Command::VerifyTheorem1 && g.iter().any(|&r| r >= 0.5 * bl) {
                        bad.push(format!("r_grid must lie in (0, bl/2) = (0, {})", 0.5 * bl));
                    }
                }
                if params.is_pure_shear() {
                    bad.push("theorem checks need alpha2 > 0".into());
                }
            }
            Command::Classify => {
                fill(&mut self.field, FieldChoice::Laminar);
                fill(&mut self.s, lo + 0.25 * width);
                fill(&mut self.s1, hi - 0.25 * width);
                fill(&mut self.radii, [0.2, 0.1, 0.05, 0.025].iter().map(|f| f * near).collect());
                fill(&mut self.c_threshold, 1.2);
                match self.field {
                    Some(FieldChoice::Fan) => fill(&mut self.source_s, lo - 0.5 * delta),
                    Some(FieldChoice::GradedFan) => fill(&mut self.ell, delta),
                    _ => {}
                }
                decreasing(&mut bad, "radii", &self.radii);
                if let Some(c) = self.c_threshold {
                    if !(c > 1.0) {
                        bad.push(format!("c_threshold must be > 1, got {c}"));
                    }
                }
                positive(&mut bad, "ell", self.ell);
            }
            Command::Trace => {
                fill(&mut self.trace, TraceKind::Streamline);
                fill(&mut self.start_s, arc.s_mid());
                fill(&mut self.start_r, 0.1 * near);
                fill(&mut self.max_length, 0.4 * width);
                fill(&mut self.variant, AdvectionVariant::Paper);
                fill(&mut self.eps_list, default_eps_list(delta));
                positive(&mut bad, "start_r", self.start_r);
                decreasing(&mut bad, "eps_list", &self.eps_list);
            }
            Command::ZetaCheck => {
                fill(&mut self.pressure, PressureChoice::Angular);
                fill(&mut self.kappa, 2.0);
                fill(&mut self.s, arc.s_mid());
                fill(&mut self.r_list, [0.04, 0.02, 0.01].iter().map(|f| f * delta).collect());
                fill(&mut self.eps_over_r, 1.0);
                decreasing(&mut bad, "r_list", &self.r_list);
                positive(&mut bad, "eps_over_r", self.eps_over_r);
                if let Err(e) = self.tolerances() {
                    bad.push(e.to_string());
                }
            }
            Command::Simulate => {
                let sim = self.sim_config(&arc, &params);
                fill(&mut self.write_field, false);
                match sim.validate() {
                    Err(lamsep_core::Error::ConfigError(v)) => bad.extend(v),
                    Err(e) => bad.push(e.to_string()),
                    Ok(()) => {
                        self.sector_angle = Some(sim.sector_angle);
                        self.outer_offset = sim.resolved_outer_offset();
                        self.n_s = Some(sim.n_s);
                        self.n_r = Some(sim.n_r);
                        self.dt = sim.resolved_dt().ok();
                        self.t_end = Some(sim.t_end);
                        self.probes = Some(sim.resolved_probes());
                        self.record_every = Some(sim.record_every);
                        self.solver_tolerance = Some(sim.solver_tolerance);
                        self.end_pressure = Some(sim.end_pressure);
                        self.initial = Some(sim.initial);
                        self.inviscid = Some(sim.inviscid);
                    }
                }
            }
            Command::Sweep => {
                let axes = [&self.sweep_delta, &self.sweep_alpha1, &self.sweep_alpha2, &self.sweep_nu];
                if axes.iter().all(|a| a.is_none()) {
                    bad.push("sweep needs at least one of sweep_delta, sweep_alpha1, sweep_alpha2, sweep_nu".into());
                }
                for (name, axis) in ["sweep_delta", "sweep_alpha1", "sweep_alpha2", "sweep_nu"].iter().zip(axes) {
                    if let Some(a) = axis {
                        if a.is_empty() {
                            bad.push(format!("{name} is empty"));
                        } else if a.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                            bad.push(format!("{name} values must be > 0"));
                        }
                    }
                }
                fill(&mut self.sweep_delta, vec![delta]);
                fill(&mut self.sweep_alpha1, vec![params.alpha1()]);
                fill(&mut self.sweep_alpha2, vec![params.alpha2()]);
                fill(&mut self.sweep_nu, vec![params.nu()]);
            }
        }
        if matches!(command, Command::Classify | Command::Trace | Command::ZetaCheck) {
            if let Err(e) = self.trace_config(&arc, &params) {
                bad.push(e.to_string());
            }
        }
        if let Some(out) = &self.out {
            if out.exists() && !out.is_dir() {
                bad.push(format!("out path {} exists and is not a directory", out.display()));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(bad))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(text: &str) -> Result<RunConfig, CliError> {
        let mut c = parse_str(text, "test")?;
        c.resolve()?;
        Ok(c)
    }

    #[test]
    fn minimal_theorem2_config_gets_defaults() {
        let c = resolved(r#"{"command": "verify-theorem2", "alpha1": 1, "alpha2": 1, "nu": 1, "delta": 1}"#).unwrap();
        assert_eq!(c.r_grid.as_ref().unwrap().len(), 12);
        assert_eq!(c.s_range, Some([-0.5, 0.5]));
        assert_eq!(c.variant, Some(AdvectionVariant::Paper));
    }

    #[test]
    fn negative_alpha2_is_a_validation_error() {
        let e = resolved(r#"{"command": "verify-theorem1", "alpha1": 1, "alpha2": -1, "nu": 1, "delta": 1}"#).unwrap_err();
        match e {
            CliError::Validation(v) => assert!(v.iter().any(|m| m.contains("alpha2")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let e = resolved("{\"alpha1\": 1,\n \"alpha3\": 2}").unwrap_err();
        match e {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("alpha3"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_lists_every_violation() {
        let e = resolved(r#"{"command": "simulate", "alpha1": 1, "alpha2": 1, "nu": 1, "delta": 1, "n_s": 4, "outer_offset": 1}"#)
            .unwrap_err();
        match e {
            CliError::Validation(v) => assert_eq!(v.len(), 2, "{v:?}"),
            other => panic!("{other:?}"),
        }
        let e = resolved(r#"{"alpha1": 1}"#).unwrap_err();
        match e {
            CliError::Validation(v) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_sweep_axis_is_rejected() {
        let e = resolved(r#"{"command": "sweep", "alpha1": 1, "alpha2": 1, "nu": 1, "delta": 1, "sweep_delta": []}"#)
            .unwrap_err();
        assert!(matches!(e, CliError::Validation(_)));
    }

    #[test]
    fn overrides_win() {
        let mut c = parse_str(r#"{"alpha1": 1, "alpha2": 1, "nu": 1, "delta": 1}"#, "t").unwrap();
        c.apply(&Overrides {
            command: Some(Command::Sweep),
            nu: Some(2.0),
            ..Default::default()
        });
        assert_eq!(c.nu, Some(2.0));
        assert_eq!(c.command(), Command::Sweep);
    }
}
