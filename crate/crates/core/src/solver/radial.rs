//! Leapfrog solver for spherically symmetric solutions of
//! `u_tt = u_rr + (2/r) u_r + N(du, d2u) + F(t, r)` outside a ball, with
//! `u_r = 0` on the ball.
//!
//! The new level solves a per-step fixed point: the `Q^{00} u_tt` term is
//! moved to the left, the rest of `N` is evaluated with the candidate new
//! level (through `u_t` and `u_tr`) and iterated to convergence.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::initial::{build_psi2, CompatibilitySequence, InitialData, DEGENERACY_TOLERANCE};
use crate::nullform::{NullFormSpec, RadialJet, RadialNonlinearity};

/// Forcing term `F(t, r)`.
pub type Forcing = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub const MAX_CFL: f64 = 0.5;

/// New-level values below this are set to zero. The solution ahead of a wave
/// front decays super-exponentially and would otherwise run through the slow
/// subnormal range.
pub const FLUSH_BELOW: f64 = 1e-100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterBoundary {
    /// Zero beyond the last node; exact as long as the grid outruns the waves.
    DomainOfDependence,
    /// First-order radiation condition `(d_t + d_r + 1/r) u = 0`.
    Sommerfeld,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub cfl: f64,
    pub outer: OuterBoundary,
    pub picard_tolerance: f64,
    pub picard_max_iterations: usize,
    /// Blowup when `sup |du|` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            cfl: 0.5,
            outer: OuterBoundary::DomainOfDependence,
            picard_tolerance: 1e-12,
            picard_max_iterations: 25,
            blowup_factor: 1e3,
        }
    }
}

/// Two leapfrog levels and the time of the newer one.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub step: usize,
}

impl FieldState {
    pub fn is_finite(&self) -> bool {
        self.u_curr.iter().all(|v| v.is_finite())
    }

    /// Swaps the two levels, which runs the linear scheme backwards.
    pub fn reversed(&self) -> Self {
        FieldState { u_prev: self.u_curr.clone(), u_curr: self.u_prev.clone(), t: self.t, dt: -self.dt, step: self.step }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepStatus {
    Converged { iterations: usize },
    /// A non-finite value appeared; the state was not advanced.
    NonFinite,
}

pub struct RadialSolver {
    grid: RadialGrid,
    spec: NullFormSpec,
    nl: RadialNonlinearity,
    settings: SolverSettings,
    forcing: Option<Forcing>,
    dt: f64,
    base: Vec<f64>,
    cand: Vec<f64>,
    ut: Vec<f64>,
    ur: Vec<f64>,
    urr: Vec<f64>,
    forcing_now: Vec<f64>,
    box_u: Vec<f64>,
    contraction: f64,
    inv_r: Vec<f64>,
    active: Option<(usize, usize)>,
}

impl RadialSolver {
    pub fn new(
        grid: RadialGrid,
        spec: NullFormSpec,
        settings: SolverSettings,
        t_final: f64,
        forcing: Option<Forcing>,
    ) -> Result<Self> {
        if !(settings.cfl > 0.0 && settings.cfl <= MAX_CFL) {
            return Err(Error::config("grid.cfl", format!("{} exceeds {MAX_CFL}", settings.cfl)));
        }
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::config("t_final", format!("must be nonnegative, got {t_final}")));
        }
        if settings.picard_max_iterations == 0 {
            return Err(Error::config("solver.picard_max_iterations", "must be at least 1"));
        }
        if !spec.is_isotropic() {
            return Err(Error::config("nonlinearity", "radial mode needs a rotation-invariant nonlinearity"));
        }
        let n = grid.len();
        let max_dt = settings.cfl * grid.dr();
        let dt = if t_final > 0.0 { t_final / (t_final / max_dt).ceil() } else { max_dt };
        let inv_r = (0..n).map(|j| 1.0 / grid.r(j)).collect();
        Ok(RadialSolver {
            nl: RadialNonlinearity::new(&spec),
            grid,
            spec,
            settings,
            forcing,
            dt,
            base: vec![0.0; n],
            cand: vec![0.0; n],
            ut: vec![0.0; n],
            ur: vec![0.0; n],
            urr: vec![0.0; n],
            forcing_now: vec![0.0; n],
            box_u: vec![0.0; n],
            contraction: 0.0,
            inv_r,
            active: None,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn spec(&self) -> &NullFormSpec {
        &self.spec
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn nonlinearity(&self) -> &RadialNonlinearity {
        &self.nl
    }

    /// Time step: the largest `t_final / k` not exceeding `cfl * dr`.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn forcing_at(&self, t: f64, r: f64) -> f64 {
        self.forcing.as_ref().map_or(0.0, |f| f(t, r))
    }

    pub fn sample_forcing(&self, t: f64) -> Option<Vec<f64>> {
        self.forcing.as_ref().map(|f| self.grid.radii().iter().map(|&r| f(t, r)).collect())
    }

    /// `psi_0, psi_1, psi_2` of the data, including the forcing at `t = 0`.
    pub fn compatibility(&self, data: &InitialData) -> Result<CompatibilitySequence> {
        let f0 = self.sample_forcing(0.0);
        build_psi2(data, &self.spec, &self.grid, f0.as_deref())
    }

    /// Leapfrog start: `u(-dt) = psi_0 - dt psi_1 + dt^2/2 psi_2`.
    pub fn initial_state(&self, data: &InitialData) -> Result<FieldState> {
        let seq = self.compatibility(data)?;
        let dt = self.dt;
        let [p0, p1, p2] = &seq.psis;
        let u_prev = (0..self.grid.len()).map(|j| p0[j] - dt * p1[j] + 0.5 * dt * dt * p2[j]).collect();
        Ok(FieldState { u_prev, u_curr: p0.clone(), t: 0.0, dt, step: 0 })
    }

    /// Centered `u_t` of the level that was current before the last step.
    pub fn level_ut(&self) -> &[f64] {
        &self.ut
    }

    /// `u_r` of that level.
    pub fn level_ur(&self) -> &[f64] {
        &self.ur
    }

    /// `N + F` of that level, i.e. the wave operator applied to the solution.
    pub fn level_box(&self) -> &[f64] {
        &self.box_u
    }

    /// Ratio of the last two fixed-point updates of the most recent step.
    pub fn last_contraction(&self) -> f64 {
        self.contraction
    }

    /// Nodes the solver has touched so far. Every field it stores, and every
    /// level it produced, vanishes outside this range.
    pub fn active_range(&self) -> Range<usize> {
        match self.active {
            Some((lo, hi)) => lo..hi + 1,
            None => 0..0,
        }
    }

    /// Grows the active range to cover the support of both levels plus one
    /// stencil width. Outside it a step maps zeros to zeros.
    fn update_active(&mut self, um: &[f64], u0: &[f64]) -> (usize, usize) {
        let n = self.grid.len();
        let nz = |j: usize| um[j] != 0.0 || u0[j] != 0.0;
        let (mut lo, mut hi) = match self.active {
            Some(r) => r,
            None => match (0..n).find(|&j| nz(j)) {
                Some(j) => (j, j),
                None if self.forcing.is_none() => return (1, 0),
                None => (0, n - 1),
            },
        };
        if self.forcing.is_some() {
            lo = 0;
            hi = n - 1;
        }
        if let Some(j) = (0..lo).find(|&j| nz(j)) {
            lo = j;
        }
        if let Some(j) = (hi + 1..n).rev().find(|&j| nz(j)) {
            hi = j;
        }
        lo = lo.saturating_sub(1);
        hi = (hi + 1).min(n - 1);
        if self.settings.outer == OuterBoundary::Sommerfeld && hi + 2 >= n {
            hi = n - 1;
        }
        self.active = Some((lo, hi));
        (lo, hi)
    }

    /// Advances `state` by one step. On success `state.u_prev` holds the level
    /// whose `u_t`, `u_r` and wave operator are exposed by the `level_*`
    /// accessors.
    pub fn step(&mut self, state: &mut FieldState) -> Result<StepStatus> {
        let n = self.grid.len();
        let dt = state.dt;
        let dt2 = dt * dt;
        let h = self.grid.dr();
        let t = state.t;
        let (lo, hi) = self.update_active(&state.u_prev, &state.u_curr);
        if lo > hi {
            self.contraction = 0.0;
            state.t = t + dt;
            state.step += 1;
            return Ok(StepStatus::Converged { iterations: 1 });
        }
        let (um, u0) = (&state.u_prev[..], &state.u_curr[..]);
        if let Some(f) = &self.forcing {
            for j in lo..=hi {
                self.forcing_now[j] = f(t, self.grid.r(j));
            }
        }
        let inv2h = 0.5 / h;
        let invh2 = 1.0 / (h * h);
        {
            let (ur, urr, base) = (&mut self.ur[..], &mut self.urr[..], &mut self.base[..]);
            let (fnow, inv_r, cand) = (&self.forcing_now[..], &self.inv_r[..], &mut self.cand[..]);
            let a = lo.max(1);
            let b = hi.min(n - 2);
            if lo == 0 {
                ur[0] = 0.0;
                urr[0] = 2.0 * (u0[1] - u0[0]) * invh2;
                base[0] = urr[0] + fnow[0];
                cand[0] = 2.0 * u0[0] - um[0] + dt2 * base[0];
            }
            if a <= b {
                let w = &u0[a - 1..b + 2];
                let k = b + 1 - a;
                let it = w
                    .windows(3)
                    .zip(&mut ur[a..=b])
                    .zip(&mut urr[a..=b])
                    .zip(&mut base[a..=b])
                    .zip(&mut cand[a..=b])
                    .zip(&um[a..=b])
                    .zip(&fnow[a..=b])
                    .zip(&inv_r[a..=b]);
                for (((((((s, ur), urr), base), cand), &m), &f), &ir) in it.take(k) {
                    let d1 = (s[2] - s[0]) * inv2h;
                    let d2 = (s[2] - 2.0 * s[1] + s[0]) * invh2;
                    *ur = d1;
                    *urr = d2;
                    let bj = d2 + 2.0 * d1 * ir + f;
                    *base = bj;
                    *cand = 2.0 * s[1] - m + dt2 * bj;
                }
            }
            if hi == n - 1 {
                let j = n - 1;
                ur[j] = self.grid.d_r(u0, j);
                urr[j] = self.grid.d_rr(u0, j);
                // Zero beyond the grid; the Sommerfeld node is overwritten below.
                base[j] = (u0[j - 1] - 2.0 * u0[j]) * invh2 - 2.0 * u0[j - 1] * inv2h * inv_r[j] + fnow[j];
                cand[j] = 2.0 * u0[j] - um[j] + dt2 * base[j];
            }
        }

        let nonlinear = !self.nl.is_zero();
        let mut iterations = 1;
        self.contraction = 0.0;
        if nonlinear {
            let max_iter = self.settings.picard_max_iterations;
            let inv2dt = 0.5 / dt;
            let mut last_change = 0.0;
            let mut converged = false;
            for it in 1..=max_iter {
                iterations = it;
                for j in lo..=hi {
                    self.ut[j] = (self.cand[j] - um[j]) * inv2dt;
                }
                let mut change: f64 = 0.0;
                for j in lo..=hi {
                    let jet = RadialJet {
                        u_t: self.ut[j],
                        u_r: self.ur[j],
                        u_tt: 0.0,
                        u_tr: self.grid.d_r(&self.ut, j),
                        u_rr: self.urr[j],
                        r: self.grid.r(j),
                    };
                    let denom = 1.0 - self.nl.time_coefficient(jet.u_t, jet.u_r);
                    if denom.abs() < DEGENERACY_TOLERANCE {
                        return Err(Error::Degenerate(format!("1 - Q^00 = {denom:e} at t = {t}, r = {}", jet.r)));
                    }
                    let new = 2.0 * u0[j] - um[j] + dt2 * (self.base[j] + self.nl.remainder(&jet)) / denom;
                    change = change.max((new - self.cand[j]).abs());
                    self.cand[j] = new;
                }
                if !change.is_finite() {
                    return Ok(StepStatus::NonFinite);
                }
                if it > 1 && last_change > 0.0 {
                    self.contraction = change / last_change;
                }
                last_change = change;
                if change <= self.settings.picard_tolerance {
                    converged = true;
                    break;
                }
            }
            if !converged {
                for j in lo..=hi {
                    self.ut[j] = (self.cand[j] - um[j]) * inv2dt;
                }
                return Err(Error::NonlinearDivergence { t, change: last_change });
            }
        }
        if self.settings.outer == OuterBoundary::Sommerfeld {
            self.sommerfeld_update(state);
        }
        let mut finite = true;
        for v in &mut self.cand[lo..=hi] {
            finite &= v.is_finite();
            if v.abs() < FLUSH_BELOW {
                *v = 0.0;
            }
        }
        if !finite {
            return Ok(StepStatus::NonFinite);
        }
        // Level-n diagnostics: centered u_t and the wave operator.
        let inv2dt = 0.5 / dt;
        let invdt2 = 1.0 / dt2;
        let it = self.cand[lo..=hi]
            .iter()
            .zip(&state.u_curr[lo..=hi])
            .zip(&state.u_prev[lo..=hi])
            .zip(&mut self.ut[lo..=hi])
            .zip(&mut self.box_u[lo..=hi])
            .zip(&self.base[lo..=hi])
            .zip(&self.forcing_now[lo..=hi]);
        for ((((((&c, &u), &m), ut), bx), &b), &f) in it {
            *ut = (c - m) * inv2dt;
            *bx = (c - 2.0 * u + m) * invdt2 - (b - f);
        }
        core::mem::swap(&mut state.u_prev, &mut state.u_curr);
        core::mem::swap(&mut state.u_curr, &mut self.cand);
        state.t = t + dt;
        state.step += 1;
        Ok(StepStatus::Converged { iterations })
    }

    /// Replaces the last node with the radiation-condition update. The ghost
    /// value `g` comes from `(u_t + u_r + u / r) = 0` discretized at the node.
    fn sommerfeld_update(&mut self, state: &FieldState) {
        let n = self.grid.len();
        let j = n - 1;
        let h = self.grid.dr();
        let dt = state.dt;
        let r = self.grid.r(j);
        let (um, u0) = (&state.u_prev, &state.u_curr);
        let alpha = dt * dt * (1.0 / (h * h) + 1.0 / (r * h));
        let rest = 2.0 * u0[j] - um[j]
            + dt * dt * ((u0[j - 1] - 2.0 * u0[j]) / (h * h) - u0[j - 1] / (r * h) + self.forcing_now[j]);
        let g0 = u0[j - 1] - 2.0 * h * u0[j] / r;
        let k = h / dt;
        self.cand[j] = (rest + alpha * g0 + alpha * k * um[j]) / (1.0 + alpha * k);
    }

    /// `sup |du|` over the grid for fields `u_t`, `u_r`.
    pub fn sup_gradient(ut: &[f64], ur: &[f64]) -> f64 {
        ut.iter().zip(ur).fold(0.0f64, |m, (a, b)| m.max(a * a + b * b)).sqrt()
    }

    /// `sup |du|` of the data.
    pub fn initial_sup_gradient(&self, data: &InitialData) -> f64 {
        let p0 = data.psi0();
        let p1 = data.psi1();
        let ur = self.grid.gradient(&p0);
        Self::sup_gradient(&p1, &ur)
    }
}
