//! Unsteady incompressible Navier-Stokes on an annular sector above the arc.
//!
//! Polar MAC grid in `(rho, a)` with `a` the clockwise wall angle, so the
//! laminar flow has positive angular velocity component. Walls are no-slip
//! (inner) and pinned to the initial profile (outer); the upstream end
//! carries the initial profile and the downstream end a convective
//! condition with a global flux correction. Time stepping is explicit
//! Euler for advection and diffusion followed by a Chorin projection.
//!
//! The initial pressure solves the pure-Neumann problem for `dp/dt`-free
//! data: on the walls the normal acceleration vanishes; on the two ends the
//! angular pressure gradient is either the wall-compatible value
//! `c / rho`, `c = nu (alpha1 / delta - alpha2) delta` (the gradient a
//! stationary no-slip wall demands), or matches the momentum forcing so
//! the ends do not accelerate.

pub mod grid;
pub mod poisson;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use grid::{Array2, PolarGrid};
pub use poisson::{PoissonSolver, SolveStats};

use crate::error::{Error, Result};
use crate::field::{analytic_laplacian, profile_h, LaminarParams};
use crate::geometry::ArcBoundary;
use crate::theorems::theorem2_ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBc {
    #[default]
    DirichletProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InflowBc {
    #[default]
    LaminarProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutflowBc {
    #[default]
    Convective,
}

/// Angular pressure gradient imposed on the two ends in the initial solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndPressure {
    #[default]
    WallCompatible,
    FluxMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    #[default]
    Laminar,
    Rest,
}

fn default_sector_angle() -> f64 {
    1.0
}
fn default_n_s() -> usize {
    128
}
fn default_n_r() -> usize {
    64
}
fn default_t_end() -> f64 {
    1e-3
}
fn default_record_every() -> usize {
    1
}
fn default_solver_tolerance() -> f64 {
    1e-10
}

pub const MAX_CFL: f64 = 0.5;
pub const MAX_DIFFUSION_NUMBER: f64 = 0.25;
/// Blow-up factor on the initial maximum speed.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub arc: ArcBoundary<f64>,
    pub params: LaminarParams<f64>,
    #[serde(default = "default_sector_angle")]
    pub sector_angle: f64,
    /// Radial extent above the wall; `2 bl` when absent.
    #[serde(default)]
    pub outer_offset: Option<f64>,
    #[serde(default = "default_n_s")]
    pub n_s: usize,
    #[serde(default = "default_n_r")]
    pub n_r: usize,
    /// Time step; 0.9 of the stability limit when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub outer_bc: OuterBc,
    #[serde(default)]
    pub inflow_bc: InflowBc,
    #[serde(default)]
    pub outflow_bc: OutflowBc,
    #[serde(default)]
    pub end_pressure: EndPressure,
    #[serde(default)]
    pub initial: InitialProfile,
    /// Drops the viscous term.
    #[serde(default)]
    pub inviscid: bool,
    /// Probe wall distances; `bl / {4, 8, 16}` when absent.
    #[serde(default)]
    pub probes: Option<Vec<f64>>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_solver_tolerance")]
    pub solver_tolerance: f64,
}

impl SimConfig {
    pub fn new(arc: ArcBoundary<f64>, params: LaminarParams<f64>) -> Self {
        SimConfig {
            arc,
            params,
            sector_angle: default_sector_angle(),
            outer_offset: None,
            n_s: default_n_s(),
            n_r: default_n_r(),
            dt: None,
            t_end: default_t_end(),
            outer_bc: OuterBc::default(),
            inflow_bc: InflowBc::default(),
            outflow_bc: OutflowBc::default(),
            end_pressure: EndPressure::default(),
            initial: InitialProfile::default(),
            inviscid: false,
            probes: None,
            record_every: default_record_every(),
            solver_tolerance: default_solver_tolerance(),
        }
    }

    pub fn with_grid(mut self, n_s: usize, n_r: usize) -> Self {
        self.n_s = n_s;
        self.n_r = n_r;
        self
    }

    pub fn nu(&self) -> f64 {
        if self.inviscid {
            0.0
        } else {
            self.params.nu()
        }
    }

    pub fn resolved_outer_offset(&self) -> Option<f64> {
        self.outer_offset
            .or_else(|| self.params.boundary_layer_thickness().map(|bl| 2.0 * bl))
    }

    pub fn resolved_probes(&self) -> Vec<f64> {
        match (&self.probes, self.params.boundary_layer_thickness()) {
            (Some(p), _) => p.clone(),
            (None, Some(bl)) => vec![bl / 4.0, bl / 8.0, bl / 16.0],
            (None, None) => vec![],
        }
    }

    pub fn grid(&self) -> Result<PolarGrid> {
        let extent = self
            .resolved_outer_offset()
            .ok_or_else(|| Error::ConfigError(vec!["outer_offset is required for a pure shear profile".into()]))?;
        let a_mid = (self.arc.s_mid() + self.arc.phase()) / self.arc.delta();
        Ok(PolarGrid {
            n_s: self.n_s,
            n_r: self.n_r,
            delta: self.arc.delta(),
            extent,
            theta0: a_mid - 0.5 * self.sector_angle,
            angle: self.sector_angle,
        })
    }

    /// Wall-parallel velocity of the initial (and boundary) profile at radius `rho`.
    pub fn profile(&self, rho: f64) -> f64 {
        match self.initial {
            InitialProfile::Laminar => profile_h(&self.params, rho - self.arc.delta()),
            InitialProfile::Rest => 0.0,
        }
    }

    fn max_profile_speed(&self, g: &PolarGrid) -> f64 {
        (0..g.n_r)
            .map(|j| g.rho_c(j))
            .chain([g.delta + g.extent])
            .map(|rho| self.profile(rho).abs())
            .fold(0.0, f64::max)
    }

    fn diffusion_rate(&self, g: &PolarGrid) -> f64 {
        let (dr, ds) = (g.drho(), g.delta * g.dtheta());
        self.nu() * (1.0 / (dr * dr) + 1.0 / (ds * ds))
    }

    /// Largest stable step times 0.9 (infinite for a motionless inviscid setup).
    pub fn stable_dt(&self) -> Result<f64> {
        let g = self.grid()?;
        let umax = self.max_profile_speed(&g);
        let adv = if umax > 0.0 { MAX_CFL * g.min_spacing() / umax } else { f64::INFINITY };
        let rate = self.diffusion_rate(&g);
        let diff = if rate > 0.0 { MAX_DIFFUSION_NUMBER / rate } else { f64::INFINITY };
        Ok(0.9 * adv.min(diff))
    }

    pub fn resolved_dt(&self) -> Result<f64> {
        match self.dt {
            Some(dt) => Ok(dt),
            None => {
                let dt = self.stable_dt()?;
                if dt.is_finite() {
                    Ok(dt)
                } else {
                    Ok(self.t_end.max(1.0) / 100.0)
                }
            }
        }
    }

    /// Every violated constraint, in one error.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n_s < 16 || self.n_r < 16 {
            bad.push(format!("grid must be at least 16x16, got {}x{}", self.n_s, self.n_r));
        }
        if !(self.sector_angle > 0.0 && self.sector_angle < std::f64::consts::PI) {
            bad.push(format!("sector_angle must be in (0, pi), got {}", self.sector_angle));
        }
        match (self.resolved_outer_offset(), self.params.boundary_layer_thickness()) {
            (None, _) => bad.push("outer_offset is required for a pure shear profile".into()),
            (Some(r), Some(bl)) if !(r >= 2.0 * bl) => {
                bad.push(format!("outer_offset {r} must be at least 2 bl = {}", 2.0 * bl))
            }
            (Some(r), _) if !(r > 0.0) => bad.push(format!("outer_offset must be > 0, got {r}")),
            _ => {}
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                bad.push(format!("dt must be > 0, got {dt}"));
            }
        }
        if !(self.t_end >= 0.0) {
            bad.push(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if self.record_every == 0 {
            bad.push("record_every must be >= 1".into());
        }
        if !(self.solver_tolerance > 0.0 && self.solver_tolerance <= 1e-6) {
            bad.push(format!("solver_tolerance must be in (0, 1e-6], got {}", self.solver_tolerance));
        }
        if self.resolved_probes().iter().any(|&r| !(r > 0.0)) {
            bad.push("probe radii must be > 0".into());
        }
        if bad.is_empty() {
            if let (Ok(g), Ok(dt)) = (self.grid(), self.resolved_dt()) {
                let cfl = self.max_profile_speed(&g) * dt / g.min_spacing();
                if cfl > MAX_CFL {
                    bad.push(format!("CFL number {cfl:.3} exceeds {MAX_CFL}"));
                }
                let dn = self.diffusion_rate(&g) * dt;
                if dn > MAX_DIFFUSION_NUMBER {
                    bad.push(format!("diffusion number {dn:.3} exceeds {MAX_DIFFUSION_NUMBER}"));
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigError(bad))
        }
    }
}

/// Velocity, pressure and time on the staggered grid.
#[derive(Debug, Clone)]
pub struct SimState {
    pub grid: PolarGrid,
    /// Angular velocity on angular faces, `(n_s + 1) x (n_r + 2)`; rows 0 and
    /// `n_r + 1` are ghosts beyond the walls.
    pub u_theta: Array2,
    /// Radial velocity on radial faces, `(n_s + 2) x (n_r + 1)`; columns 0
    /// and `n_s + 1` are ghosts beyond the ends.
    pub u_rho: Array2,
    /// Cell-centered pressure, zero mean.
    pub p: Array2,
    pub t: f64,
    pub steps: usize,
    pub initial_max_speed: f64,
    pub last_solve: SolveStats,
    nu: f64,
    outer_value: f64,
    inflow: Vec<f64>,
    solver: PoissonSolver,
}

impl SimState {
    /// `u_theta` at face `i`, row `j`; `i` may run one past either end
    /// (linear extrapolation), `j` one past either wall (ghosts).
    #[inline]
    fn ut(&self, i: isize, j: isize) -> f64 {
        let n = self.grid.n_s as isize;
        let jj = (j + 1) as usize;
        if i < 0 {
            2.0 * self.u_theta.get(0, jj) - self.u_theta.get(1, jj)
        } else if i > n {
            2.0 * self.u_theta.get(n as usize, jj) - self.u_theta.get(n as usize - 1, jj)
        } else {
            self.u_theta.get(i as usize, jj)
        }
    }

    /// `u_rho` at cell column `i` (`-1..=n_s`), face `j`.
    #[inline]
    fn ur(&self, i: isize, j: usize) -> f64 {
        self.u_rho.get((i + 1) as usize, j)
    }

    /// Angular component of the vector Laplacian at angular face `i`, row `j`.
    fn lap_theta(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let (dr, dt) = (g.drho(), g.dtheta());
        let rho = g.rho_c(j);
        let (i, jj) = (i as isize, j as isize);
        let u = self.ut(i, jj);
        let (un, us) = (self.ut(i, jj + 1), self.ut(i, jj - 1));
        let (ue, uw) = (self.ut(i + 1, jj), self.ut(i - 1, jj));
        let dur = (self.ur(i, j) + self.ur(i, j + 1) - self.ur(i - 1, j) - self.ur(i - 1, j + 1)) / (2.0 * dt);
        (un - 2.0 * u + us) / (dr * dr) + (un - us) / (2.0 * dr * rho) + (ue - 2.0 * u + uw) / (dt * dt * rho * rho)
            - u / (rho * rho)
            + 2.0 * dur / (rho * rho)
    }

    /// Angular component of `(u . grad) u` at angular face `i`, row `j`.
    fn adv_theta(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let (dr, dt) = (g.drho(), g.dtheta());
        let rho = g.rho_c(j);
        let (i, jj) = (i as isize, j as isize);
        let u = self.ut(i, jj);
        let ur = 0.25 * (self.ur(i - 1, j) + self.ur(i, j) + self.ur(i - 1, j + 1) + self.ur(i, j + 1));
        ur * (self.ut(i, jj + 1) - self.ut(i, jj - 1)) / (2.0 * dr)
            + u / rho * (self.ut(i + 1, jj) - self.ut(i - 1, jj)) / (2.0 * dt)
            + ur * u / rho
    }

    /// Radial component of the vector Laplacian at cell `i`, interior radial face `j`.
    fn lap_rho(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let (dr, dt) = (g.drho(), g.dtheta());
        let rho = g.rho_f(j);
        let ii = i as isize;
        let u = self.ur(ii, j);
        let (un, us) = (self.ur(ii, j + 1), self.ur(ii, j - 1));
        let (ue, uw) = (self.ur(ii + 1, j), self.ur(ii - 1, j));
        let (jn, js) = (j as isize, j as isize - 1);
        let dut = (self.ut(ii + 1, jn) + self.ut(ii + 1, js) - self.ut(ii, jn) - self.ut(ii, js)) / (2.0 * dt);
        (un - 2.0 * u + us) / (dr * dr) + (un - us) / (2.0 * dr * rho) + (ue - 2.0 * u + uw) / (dt * dt * rho * rho)
            - u / (rho * rho)
            - 2.0 * dut / (rho * rho)
    }

    /// Radial component of `(u . grad) u` at cell `i`, interior radial face `j`.
    fn adv_rho(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let (dr, dt) = (g.drho(), g.dtheta());
        let rho = g.rho_f(j);
        let ii = i as isize;
        let (jn, js) = (j as isize, j as isize - 1);
        let ut = 0.25 * (self.ut(ii, jn) + self.ut(ii, js) + self.ut(ii + 1, jn) + self.ut(ii + 1, js));
        let u = self.ur(ii, j);
        u * (self.ur(ii, j + 1) - self.ur(ii, j - 1)) / (2.0 * dr)
            + ut / rho * (self.ur(ii + 1, j) - self.ur(ii - 1, j)) / (2.0 * dt)
            - ut * ut / rho
    }

    fn refresh_ghosts(&mut self) {
        let (n_s, n_r) = (self.grid.n_s, self.grid.n_r);
        for i in 0..=n_s {
            let (u0, u1) = (self.u_theta.get(i, 1), self.u_theta.get(i, 2));
            self.u_theta.set(i, 0, (-6.0 * u0 + u1) / 3.0);
            let (u0, u1) = (self.u_theta.get(i, n_r), self.u_theta.get(i, n_r - 1));
            self.u_theta.set(i, n_r + 1, (8.0 * self.outer_value - 6.0 * u0 + u1) / 3.0);
        }
        for j in 0..=n_r {
            let first = self.u_rho.get(1, j);
            self.u_rho.set(0, j, -first);
            let last = self.u_rho.get(n_s, j);
            self.u_rho.set(n_s + 1, j, last);
        }
        for i in 0..n_s + 2 {
            self.u_rho.set(i, 0, 0.0);
            self.u_rho.set(i, n_r, 0.0);
        }
    }

    /// Area-weighted divergence of a face field given by angular and radial accessors.
    fn divergence_area(&self, ft: impl Fn(usize, usize) -> f64, fr: impl Fn(usize, usize) -> f64) -> Array2 {
        let g = &self.grid;
        let (dr, dt) = (g.drho(), g.dtheta());
        let mut out = Array2::zeros(g.n_s, g.n_r);
        for i in 0..g.n_s {
            for j in 0..g.n_r {
                let v = (ft(i + 1, j) - ft(i, j)) * dr + (g.rho_f(j + 1) * fr(i, j + 1) - g.rho_f(j) * fr(i, j)) * dt;
                out.set(i, j, v);
            }
        }
        out
    }

    /// Largest cell divergence, scaled by `min_spacing / max_speed`.
    pub fn scaled_divergence(&self) -> f64 {
        let g = self.grid;
        let d = self.divergence_area(|i, j| self.u_theta.get(i, j + 1), |i, j| self.u_rho.get(i + 1, j));
        let mut worst: f64 = 0.0;
        for i in 0..g.n_s {
            for j in 0..g.n_r {
                worst = worst.max(d.get(i, j).abs() / (g.rho_c(j) * g.drho() * g.dtheta()));
            }
        }
        worst * g.min_spacing() / self.max_speed().max(f64::MIN_POSITIVE)
    }

    pub fn max_speed(&self) -> f64 {
        let (n_s, n_r) = (self.grid.n_s, self.grid.n_r);
        let mut m: f64 = 0.0;
        for i in 0..=n_s {
            for j in 1..=n_r {
                m = m.max(self.u_theta.get(i, j).abs());
            }
        }
        for i in 1..=n_s {
            for j in 0..=n_r {
                m = m.max(self.u_rho.get(i, j).abs());
            }
        }
        m
    }

    /// Largest `|u_rho|` on the inner wall faces.
    pub fn no_slip_residual(&self) -> f64 {
        (1..=self.grid.n_s).map(|i| self.u_rho.get(i, 0).abs()).fold(0.0, f64::max)
    }

    /// Kinetic energy `1/2 int |u|^2` with face values averaged to cell centers.
    pub fn kinetic_energy(&self) -> f64 {
        let g = self.grid;
        let mut e = 0.0;
        for i in 0..g.n_s {
            for j in 0..g.n_r {
                let ut = 0.5 * (self.u_theta.get(i, j + 1) + self.u_theta.get(i + 1, j + 1));
                let ur = 0.5 * (self.u_rho.get(i + 1, j) + self.u_rho.get(i + 1, j + 1));
                e += 0.5 * (ut * ut + ur * ur) * g.rho_c(j) * g.drho() * g.dtheta();
            }
        }
        e
    }

    /// Angular face at mid-sector.
    fn mid_face(&self) -> usize {
        self.grid.n_s / 2
    }

    fn pressure_gradient_theta(&self, i: usize, j: usize) -> f64 {
        (self.p.get(i, j) - self.p.get(i - 1, j)) / (self.grid.rho_c(j) * self.grid.dtheta())
    }
}

/// Samples the initial profile, applies boundary data and solves for the
/// initial pressure.
pub fn init_sim(cfg: &SimConfig) -> Result<SimState> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let (n_s, n_r) = (grid.n_s, grid.n_r);
    let inflow: Vec<f64> = (0..n_r).map(|j| cfg.profile(grid.rho_c(j))).collect();
    let mut u_theta = Array2::zeros(n_s + 1, n_r + 2);
    for i in 0..=n_s {
        for (j, &u) in inflow.iter().enumerate() {
            u_theta.set(i, j + 1, u);
        }
    }
    let mut state = SimState {
        grid,
        u_theta,
        u_rho: Array2::zeros(n_s + 2, n_r + 1),
        p: Array2::zeros(n_s, n_r),
        t: 0.0,
        steps: 0,
        initial_max_speed: 0.0,
        last_solve: SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        },
        nu: cfg.nu(),
        outer_value: cfg.profile(grid.delta + grid.extent),
        inflow,
        solver: PoissonSolver::new(&grid, cfg.solver_tolerance),
    };
    state.refresh_ghosts();
    state.initial_max_speed = state.max_speed();

    let nu = state.nu;
    let c = match cfg.initial {
        InitialProfile::Laminar => nu * (cfg.params.alpha1() / grid.delta - cfg.params.alpha2()) * grid.delta,
        InitialProfile::Rest => 0.0,
    };
    let forcing_t = |i: usize, j: usize| nu * state.lap_theta(i, j) - state.adv_theta(i, j);
    let ft = |i: usize, j: usize| {
        let f = forcing_t(i, j);
        if i == 0 || i == n_s {
            match cfg.end_pressure {
                EndPressure::WallCompatible => f - c / grid.rho_c(j),
                EndPressure::FluxMatched => 0.0,
            }
        } else {
            f
        }
    };
    let fr = |i: usize, j: usize| {
        if j == 0 || j == n_r {
            0.0
        } else {
            nu * state.lap_rho(i, j) - state.adv_rho(i, j)
        }
    };
    let mut rhs = state.divergence_area(ft, fr);
    rhs.as_mut_slice().iter_mut().for_each(|v| *v = -*v);
    let (p, stats) = state.solver.solve(&rhs)?;
    state.p = p;
    state.last_solve = stats;
    Ok(state)
}

/// One explicit advection-diffusion step followed by projection.
pub fn step(state: &mut SimState, cfg: &SimConfig) -> Result<()> {
    let dt = cfg.resolved_dt()?;
    let g = state.grid;
    let (n_s, n_r) = (g.n_s, g.n_r);
    let nu = state.nu;

    let mut ut_new = state.u_theta.clone();
    for i in 1..n_s {
        for j in 0..n_r {
            let v = state.u_theta.get(i, j + 1) + dt * (nu * state.lap_theta(i, j) - state.adv_theta(i, j));
            ut_new.set(i, j + 1, v);
        }
    }
    let mut ur_new = state.u_rho.clone();
    for i in 0..n_s {
        for j in 1..n_r {
            let v = state.u_rho.get(i + 1, j) + dt * (nu * state.lap_rho(i, j) - state.adv_rho(i, j));
            ur_new.set(i + 1, j, v);
        }
    }
    for (j, &u) in state.inflow.iter().enumerate() {
        ut_new.set(0, j + 1, u);
    }
    let q_in: f64 = state.inflow.iter().sum::<f64>() * g.drho();
    let uc = q_in / g.extent;
    let mut q_out = 0.0;
    for j in 0..n_r {
        let (u, up) = (state.u_theta.get(n_s, j + 1), state.u_theta.get(n_s - 1, j + 1));
        let v = u - dt * uc / g.rho_c(j) * (u - up) / g.dtheta();
        ut_new.set(n_s, j + 1, v);
        q_out += v * g.drho();
    }
    let fix = (q_in - q_out) / g.extent;
    for j in 0..n_r {
        ut_new.set(n_s, j + 1, ut_new.get(n_s, j + 1) + fix);
    }
    state.u_theta = ut_new;
    state.u_rho = ur_new;
    state.refresh_ghosts();

    let mut rhs = state.divergence_area(|i, j| state.u_theta.get(i, j + 1), |i, j| state.u_rho.get(i + 1, j));
    rhs.as_mut_slice().iter_mut().for_each(|v| *v = -*v / dt);
    let (phi, stats) = state.solver.solve(&rhs)?;
    for i in 1..n_s {
        for j in 0..n_r {
            let grad = (phi.get(i, j) - phi.get(i - 1, j)) / (g.rho_c(j) * g.dtheta());
            state.u_theta.set(i, j + 1, state.u_theta.get(i, j + 1) - dt * grad);
        }
    }
    for i in 0..n_s {
        for j in 1..n_r {
            let grad = (phi.get(i, j) - phi.get(i, j - 1)) / g.drho();
            state.u_rho.set(i + 1, j, state.u_rho.get(i + 1, j) - dt * grad);
        }
    }
    state.refresh_ghosts();
    state.p = phi;
    state.last_solve = stats;
    state.t += dt;
    state.steps += 1;

    let speed = state.max_speed();
    let limit = DIVERGENCE_FACTOR * state.initial_max_speed;
    if !(speed <= limit) && speed > 0.0 {
        return Err(Error::Diverged {
            t: state.t,
            max_speed: speed,
            limit,
        });
    }
    Ok(())
}

/// Near-wall balance at one probe radius, mid-sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub r: f64,
    /// Discrete `nu <Lap u, t>`.
    pub viscous: f64,
    /// Discrete `<grad p, t>`.
    pub pressure_gradient: f64,
    pub velocity: f64,
    pub ratio: f64,
    /// Closed-form `nu <Lap u, t>` of the laminar profile.
    pub viscous_exact: f64,
    /// Closed-form ratio with the wall-implied pressure gradient, when defined.
    pub ratio_closed_form: Option<f64>,
}

/// Linear interpolation weights for wall distance `r` between cell rows.
fn locate(g: &PolarGrid, r: f64) -> Result<(usize, f64)> {
    let x = (r - 0.5 * g.drho()) / g.drho();
    if !(x >= -1e-12 && x <= (g.n_r - 1) as f64 + 1e-12) {
        return Err(Error::ProbeOutsideGrid { r });
    }
    let j = (x.floor() as usize).min(g.n_r - 2);
    Ok((j, (x - j as f64).clamp(0.0, 1.0)))
}

fn probe(state: &SimState, r: f64) -> Result<(f64, f64, f64)> {
    let (j, w) = locate(&state.grid, r)?;
    let i = state.mid_face();
    let at = |j: usize| {
        (
            state.nu * state.lap_theta(i, j),
            state.pressure_gradient_theta(i, j),
            state.u_theta.get(i, j + 1),
        )
    };
    let (a, b) = (at(j), at(j + 1));
    let lerp = |x: f64, y: f64| x + w * (y - x);
    Ok((lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2)))
}

/// `<nu Lap u - grad p, t> / <u, t>` at mid-sector for each probe, from the
/// solver's own stencils (linear interpolation between cell rows).
pub fn measure_ratio(state: &SimState, cfg: &SimConfig, probes: &[f64]) -> Result<Vec<RatioSample>> {
    probes
        .iter()
        .map(|&r| {
            let (viscous, pressure_gradient, velocity) = probe(state, r)?;
            if velocity == 0.0 {
                return Err(Error::DomainError(format!("probe velocity vanishes at r = {r}")));
            }
            let delta = state.grid.delta;
            Ok(RatioSample {
                r,
                viscous,
                pressure_gradient,
                velocity,
                ratio: (viscous - pressure_gradient) / velocity,
                viscous_exact: state.nu * analytic_laplacian(&cfg.params, delta, r).tangential,
                ratio_closed_form: if cfg.inviscid {
                    None
                } else {
                    theorem2_ratio(&cfg.params, delta, r).ok()
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub probe_r: f64,
    pub u_t: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dt: f64,
    pub steps: usize,
    pub grid: [usize; 2],
    pub outer_offset: f64,
    pub initial_ratios: Vec<RatioSample>,
    pub series: Vec<SeriesRow>,
    /// First recorded time each probe's tangential velocity is negative.
    pub first_negative: Vec<(f64, Option<f64>)>,
    pub max_scaled_divergence: f64,
    pub max_no_slip_residual: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub max_solver_iterations: usize,
}

/// Initial measurement followed by time stepping to `t_end`, recording the
/// probe velocities every `record_every` steps (and at the last step).
pub fn run_experiment(cfg: &SimConfig) -> Result<ExperimentReport> {
    run_experiment_with_state(cfg).map(|(rep, _)| rep)
}

/// [`run_experiment`] that also hands back the final state.
pub fn run_experiment_with_state(cfg: &SimConfig) -> Result<(ExperimentReport, SimState)> {
    let mut state = init_sim(cfg)?;
    let probes = cfg.resolved_probes();
    let initial_ratios = measure_ratio(&state, cfg, &probes)?;
    let u0: Vec<f64> = initial_ratios.iter().map(|s| s.velocity).collect();
    let dt = cfg.resolved_dt()?;
    let n_steps = (cfg.t_end / dt - 1e-9).ceil().max(0.0) as usize;

    let mut series: Vec<SeriesRow> = initial_ratios
        .iter()
        .map(|s| SeriesRow {
            t: 0.0,
            probe_r: s.r,
            u_t: s.velocity,
            ratio: s.ratio,
        })
        .collect();
    let initial_energy = state.kinetic_energy();
    let mut max_div: f64 = 0.0;
    let mut max_slip: f64 = state.no_slip_residual();
    let mut max_iter = state.last_solve.iterations;
    for k in 1..=n_steps {
        step(&mut state, cfg)?;
        max_div = max_div.max(state.scaled_divergence());
        max_slip = max_slip.max(state.no_slip_residual());
        max_iter = max_iter.max(state.last_solve.iterations);
        if k % cfg.record_every == 0 || k == n_steps {
            for (&r, &u0) in probes.iter().zip(&u0) {
                let (visc, gp, u) = probe(&state, r)?;
                series.push(SeriesRow {
                    t: state.t,
                    probe_r: r,
                    u_t: u,
                    ratio: (visc - gp) / u0,
                });
            }
        }
    }
    let first_negative = probes
        .iter()
        .map(|&r| (r, series.iter().find(|s| s.probe_r == r && s.u_t < 0.0).map(|s| s.t)))
        .collect();
    let report = ExperimentReport {
        dt,
        steps: n_steps,
        grid: [state.grid.n_s, state.grid.n_r],
        outer_offset: state.grid.extent,
        initial_ratios,
        series,
        first_negative,
        max_scaled_divergence: max_div,
        max_no_slip_residual: max_slip,
        initial_energy,
        final_energy: state.kinetic_energy(),
        max_solver_iterations: max_iter,
    };
    Ok((report, state))
}

/// Writes `t,probe_r,u_t,ratio` rows.
pub fn write_series_csv<W: Write>(series: &[SeriesRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in series {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one row per cell with face velocities averaged to the center:
/// `i,j,x,y,rho,angle,u_theta,u_rho,p`.
pub fn write_field_csv<W: Write>(state: &SimState, center: [f64; 2], out: W) -> Result<()> {
    let g = state.grid;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "x", "y", "rho", "angle", "u_theta", "u_rho", "p"])?;
    for i in 0..g.n_s {
        for j in 0..g.n_r {
            let (rho, a) = (g.rho_c(j), g.theta_c(i));
            let ut = 0.5 * (state.u_theta.get(i, j + 1) + state.u_theta.get(i + 1, j + 1));
            let ur = 0.5 * (state.u_rho.get(i + 1, j) + state.u_rho.get(i + 1, j + 1));
            w.write_record(&[
                i.to_string(),
                j.to_string(),
                (center[0] + rho * a.sin()).to_string(),
                (center[1] + rho * a.cos()).to_string(),
                rho.to_string(),
                a.to_string(),
                ut.to_string(),
                ur.to_string(),
                state.p.get(i, j).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
