//! Linear waves `v_tt = lap v + F` outside a star-shaped obstacle, solved on
//! the flattened domain `1 <= |y| <= y_max` in spherical coordinates
//! `q = (rho, theta, phi)` of `y`.
//!
//! The Laplacian is written in divergence form,
//! `lap v = G^{-1/2} d_a (G^{1/2} G^{ab} d_b v)` with
//! `G^{ab} = grad_x q^a . grad_x q^b`, and discretized by finite volumes:
//! nodes in `rho` (the wall `rho = 1` is a node row), cell centers in the
//! angles. The Neumann condition is the vanishing conormal flux through
//! `rho = 1`, which carries the tangential terms of the metric. Faces at the
//! poles have zero area. The last `rho` row is held at zero.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::report::{BlowupEvent, BlowupReason, DiagnosticsReport, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::geometry::{FlattenMap, ObstacleShape};
use crate::linalg::{det3, matmul3, norm3, Mat3, Vec3};
use crate::nullform::NullFormSpec;

/// Scalar field on the physical domain.
pub type Field3 = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
/// Forcing `F(t, x)`.
pub type Forcing3 = Arc<dyn Fn(f64, &Vec3) -> f64 + Send + Sync>;

pub const MAX_RADIAL_NODES: usize = 64;
pub const MAX_POLAR_CELLS: usize = 32;
pub const MAX_AZIMUTHAL_CELLS: usize = 64;
/// Fraction of the Gershgorin stability limit used for the suggested step.
pub const STABILITY_MARGIN: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flat3dGrid {
    radial: usize,
    polar: usize,
    azimuthal: usize,
    y_max: f64,
}

impl Flat3dGrid {
    pub fn new(radial: usize, polar: usize, azimuthal: usize, y_max: f64) -> Result<Self> {
        if !(8..=MAX_RADIAL_NODES).contains(&radial) {
            return Err(Error::config("grid3d.radial", format!("{radial} not in [8, {MAX_RADIAL_NODES}]")));
        }
        if !(4..=MAX_POLAR_CELLS).contains(&polar) {
            return Err(Error::config("grid3d.polar", format!("{polar} not in [4, {MAX_POLAR_CELLS}]")));
        }
        if !(8..=MAX_AZIMUTHAL_CELLS).contains(&azimuthal) || !azimuthal.is_multiple_of(2) {
            return Err(Error::config(
                "grid3d.azimuthal",
                format!("{azimuthal} must be even and in [8, {MAX_AZIMUTHAL_CELLS}]"),
            ));
        }
        if !(y_max > 1.0) || !y_max.is_finite() {
            return Err(Error::config("grid3d.y_max", format!("must exceed 1, got {y_max}")));
        }
        Ok(Flat3dGrid { radial, polar, azimuthal, y_max })
    }

    pub fn radial(&self) -> usize {
        self.radial
    }

    pub fn polar(&self) -> usize {
        self.polar
    }

    pub fn azimuthal(&self) -> usize {
        self.azimuthal
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn len(&self) -> usize {
        self.radial * self.polar * self.azimuthal
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d_rho(&self) -> f64 {
        (self.y_max - 1.0) / (self.radial - 1) as f64
    }

    pub fn d_theta(&self) -> f64 {
        PI / self.polar as f64
    }

    pub fn d_phi(&self) -> f64 {
        2.0 * PI / self.azimuthal as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        1.0 + i as f64 * self.d_rho()
    }

    pub fn theta(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.d_theta()
    }

    pub fn phi(&self, k: usize) -> f64 {
        k as f64 * self.d_phi()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.polar + j) * self.azimuthal + k
    }

    /// Flattened-domain point at radius `rho` and angles `(theta, phi)`.
    pub fn point(rho: f64, theta: f64, phi: f64) -> Vec3 {
        let s = theta.sin();
        [rho * s * phi.cos(), rho * s * phi.sin(), rho * theta.cos()]
    }

    /// Neighbor across the pole for polar index `j - 1` or `j + 1` leaving
    /// `[0, polar)`.
    fn polar_neighbor(&self, j: isize, k: usize) -> (usize, usize) {
        let half = self.azimuthal / 2;
        if j < 0 {
            (0, (k + half) % self.azimuthal)
        } else if j as usize >= self.polar {
            (self.polar - 1, (k + half) % self.azimuthal)
        } else {
            (j as usize, k)
        }
    }
}

/// `sqrt(G)` and `G^{ab}` of the coordinates `q` at the flattened point `y`,
/// together with the physical point and `det(dy/dx)`.
fn metric(map: &FlattenMap, rho: f64, theta: f64, phi: f64) -> Result<(f64, Mat3, Vec3, f64)> {
    let y = Flat3dGrid::point(rho, theta, phi);
    let x = map.inverse(&y)?;
    let jy = map.jacobian(&x)?;
    let (st, ct, sp, cp) = (theta.sin(), theta.cos(), phi.sin(), phi.cos());
    // Rows: grad_y rho, grad_y theta, grad_y phi.
    let a: Mat3 = [
        [st * cp, st * sp, ct],
        [ct * cp / rho, ct * sp / rho, -st / rho],
        [-sp / (rho * st), cp / (rho * st), 0.0],
    ];
    let m = matmul3(&a, &jy);
    let mut g = [[0.0; 3]; 3];
    for p in 0..3 {
        for q in 0..3 {
            g[p][q] = (0..3).map(|s| m[p][s] * m[q][s]).sum();
        }
    }
    let det_jy = det3(&jy);
    // det(dx/dq) = rho^2 sin(theta) / det(dy/dx).
    let sqrt_g = rho * rho * st / det_jy;
    Ok((sqrt_g, g, x, det_jy))
}

/// Flux coefficients of one face: `main` multiplies the difference across
/// the face, `cross` the two tangential derivative estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Face {
    main: f64,
    cross: [f64; 2],
}

/// The assembled finite-volume Laplacian.
#[derive(Debug, Clone)]
pub struct FlatOperator {
    grid: Flat3dGrid,
    x: Vec<Vec3>,
    weight: Vec<f64>,
    rho_faces: Vec<Face>,
    theta_faces: Vec<Face>,
    phi_faces: Vec<Face>,
    has_cross: bool,
    min_det: f64,
    lambda_max: f64,
}

impl FlatOperator {
    pub fn new(shape: &ObstacleShape, grid: Flat3dGrid) -> Result<Self> {
        let map = FlattenMap::new(shape.clone());
        let (nr, nt, np) = (grid.radial, grid.polar, grid.azimuthal);
        let (dr, dt, dp) = (grid.d_rho(), grid.d_theta(), grid.d_phi());
        let n = grid.len();
        let width = |i: usize| if i == 0 || i == nr - 1 { 0.5 * dr } else { dr };
        let mut x = vec![[0.0; 3]; n];
        let mut weight = vec![0.0; n];
        let mut min_det = f64::INFINITY;
        for i in 0..nr {
            for j in 0..nt {
                for k in 0..np {
                    let (sg, _, xp, det) = metric(&map, grid.rho(i), grid.theta(j), grid.phi(k))?;
                    let c = grid.index(i, j, k);
                    x[c] = xp;
                    weight[c] = sg * width(i) * dt * dp;
                    min_det = min_det.min(det);
                }
            }
        }
        // rho faces between rows i and i + 1 (index by the lower row).
        let mut rho_faces = vec![Face::default(); n];
        let mut theta_faces = vec![Face::default(); n];
        let mut phi_faces = vec![Face::default(); n];
        let mut has_cross = false;
        let tiny = 1e-13;
        for i in 0..nr {
            for j in 0..nt {
                for k in 0..np {
                    let c = grid.index(i, j, k);
                    if i + 1 < nr {
                        let (sg, g, _, _) = metric(&map, grid.rho(i) + 0.5 * dr, grid.theta(j), grid.phi(k))?;
                        let area = dt * dp;
                        rho_faces[c] = Face { main: sg * g[0][0] * area / dr, cross: [sg * g[0][1] * area, sg * g[0][2] * area] };
                    }
                    if j + 1 < nt {
                        let (sg, g, _, _) = metric(&map, grid.rho(i), grid.theta(j) + 0.5 * dt, grid.phi(k))?;
                        let area = width(i) * dp;
                        theta_faces[c] = Face { main: sg * g[1][1] * area / dt, cross: [sg * g[1][0] * area, sg * g[1][2] * area] };
                    }
                    let (sg, g, _, _) = metric(&map, grid.rho(i), grid.theta(j), grid.phi(k) + 0.5 * dp)?;
                    let area = width(i) * dt;
                    phi_faces[c] = Face { main: sg * g[2][2] * area / dp, cross: [sg * g[2][0] * area, sg * g[2][1] * area] };
                    for f in [&rho_faces[c], &theta_faces[c], &phi_faces[c]] {
                        if f.cross.iter().any(|v| v.abs() > tiny * f.main.abs().max(1.0)) {
                            has_cross = true;
                        }
                    }
                }
            }
        }
        let mut op = FlatOperator { grid, x, weight, rho_faces, theta_faces, phi_faces, has_cross, min_det, lambda_max: 0.0 };
        op.lambda_max = op.gershgorin_bound();
        Ok(op)
    }

    pub fn grid(&self) -> &Flat3dGrid {
        &self.grid
    }

    /// Physical position of every node.
    pub fn positions(&self) -> &[Vec3] {
        &self.x
    }

    /// Control volume of every node in physical measure.
    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// Smallest `det(dy/dx)` over the nodes.
    pub fn min_jacobian_determinant(&self) -> f64 {
        self.min_det
    }

    /// True when the metric has off-diagonal terms (non-spherical obstacles).
    pub fn has_cross_terms(&self) -> bool {
        self.has_cross
    }

    /// Largest stable leapfrog step, reduced by [`STABILITY_MARGIN`].
    pub fn suggested_dt(&self) -> f64 {
        STABILITY_MARGIN * 2.0 / self.lambda_max.sqrt()
    }

    fn gershgorin_bound(&self) -> f64 {
        let g = &self.grid;
        let (dr, dt, dp) = (g.d_rho(), g.d_theta(), g.d_phi());
        let mut row = vec![0.0; g.len()];
        let mut add = |c: usize, d: usize, f: &Face, d1: f64, d2: f64| {
            let s = 2.0 * f.main.abs() + 2.0 * (f.cross[0].abs() / d1 + f.cross[1].abs() / d2);
            row[c] += s;
            row[d] += s;
        };
        for i in 0..g.radial {
            for j in 0..g.polar {
                for k in 0..g.azimuthal {
                    let c = g.index(i, j, k);
                    if i + 1 < g.radial {
                        add(c, g.index(i + 1, j, k), &self.rho_faces[c], dt, dp);
                    }
                    if j + 1 < g.polar {
                        add(c, g.index(i, j + 1, k), &self.theta_faces[c], dr, dp);
                    }
                    add(c, g.index(i, j, (k + 1) % g.azimuthal), &self.phi_faces[c], dr, dt);
                }
            }
        }
        (0..g.len()).filter(|&c| c / (g.polar * g.azimuthal) < g.radial - 1).fold(0.0, |m, c| m.max(row[c] / self.weight[c]))
    }

    /// Centered coordinate derivatives `(d_rho, d_theta, d_phi)` of `v`.
    fn gradients(&self, v: &[f64], out: &mut [[f64; 3]]) {
        let g = &self.grid;
        let (nr, nt, np) = (g.radial, g.polar, g.azimuthal);
        let (dr, dt, dp) = (g.d_rho(), g.d_theta(), g.d_phi());
        for i in 0..nr {
            for j in 0..nt {
                for k in 0..np {
                    let c = g.index(i, j, k);
                    let d_rho = if i == 0 {
                        (v[g.index(1, j, k)] - v[c]) / dr
                    } else if i == nr - 1 {
                        (v[c] - v[g.index(i - 1, j, k)]) / dr
                    } else {
                        (v[g.index(i + 1, j, k)] - v[g.index(i - 1, j, k)]) / (2.0 * dr)
                    };
                    let (jm, km) = g.polar_neighbor(j as isize - 1, k);
                    let (jp, kp) = g.polar_neighbor(j as isize + 1, k);
                    let d_theta = (v[g.index(i, jp, kp)] - v[g.index(i, jm, km)]) / (2.0 * dt);
                    let d_phi = (v[g.index(i, j, (k + 1) % np)] - v[g.index(i, j, (k + np - 1) % np)]) / (2.0 * dp);
                    out[c] = [d_rho, d_theta, d_phi];
                }
            }
        }
    }

    /// `out = lap v` at every node; zero on the outer row.
    pub fn apply(&self, v: &[f64], out: &mut [f64], grad: &mut Vec<[f64; 3]>) {
        let g = &self.grid;
        let (nr, nt, np) = (g.radial, g.polar, g.azimuthal);
        if self.has_cross {
            grad.resize(g.len(), [0.0; 3]);
            self.gradients(v, grad);
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..nr {
            for j in 0..nt {
                for k in 0..np {
                    let c = g.index(i, j, k);
                    let mut flux = |d: usize, f: &Face, a: usize, b: usize| {
                        let mut q = f.main * (v[d] - v[c]);
                        if self.has_cross {
                            q += f.cross[0] * 0.5 * (grad[c][a] + grad[d][a]) + f.cross[1] * 0.5 * (grad[c][b] + grad[d][b]);
                        }
                        out[c] += q;
                        out[d] -= q;
                    };
                    if i + 1 < nr {
                        flux(g.index(i + 1, j, k), &self.rho_faces[c], 1, 2);
                    }
                    if j + 1 < nt {
                        flux(g.index(i, j + 1, k), &self.theta_faces[c], 0, 2);
                    }
                    flux(g.index(i, j, (k + 1) % np), &self.phi_faces[c], 0, 1);
                }
            }
        }
        for (c, o) in out.iter_mut().enumerate() {
            if c / (nt * np) == nr - 1 {
                *o = 0.0;
            } else {
                *o /= self.weight[c];
            }
        }
    }

    /// Discrete energy between levels `prev` and `curr`:
    /// `1/2 sum W [((curr - prev)/dt)^2 - curr . lap prev]`, conserved by the
    /// linear leapfrog update.
    pub fn energy(&self, prev: &[f64], curr: &[f64], dt: f64, scratch: &mut [f64], grad: &mut Vec<[f64; 3]>) -> f64 {
        self.apply(prev, scratch, grad);
        let mut e = 0.0;
        for c in 0..curr.len() {
            let vt = (curr[c] - prev[c]) / dt;
            e += self.weight[c] * (vt * vt - curr[c] * scratch[c]);
        }
        0.5 * e
    }
}

pub struct Flat3dConfig {
    pub shape: ObstacleShape,
    pub spec: NullFormSpec,
    pub grid: Flat3dGrid,
    pub t_final: f64,
    /// Time step; the stability limit is used when absent.
    pub dt: Option<f64>,
    pub u0: Field3,
    pub u1: Field3,
    pub forcing: Option<Forcing3>,
    pub sample_every: f64,
    pub snapshot_times: Vec<f64>,
}

impl Flat3dConfig {
    /// Data `(u0(|x|), u1(|x|))` that depend on the radius only.
    pub fn spherical(
        shape: ObstacleShape,
        grid: Flat3dGrid,
        t_final: f64,
        u0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u1: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Flat3dConfig {
            shape,
            spec: NullFormSpec::zero(),
            grid,
            t_final,
            dt: None,
            u0: Arc::new(move |x: &Vec3| u0(norm3(x))),
            u1: Arc::new(move |x: &Vec3| u1(norm3(x))),
            forcing: None,
            sample_every: 0.5,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flat3dOutput {
    /// Rows carry `t`, the discrete energy (`e00`, `grad_norm2 = 2 e00`) and
    /// `sup |u|`.
    pub report: DiagnosticsReport,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    /// Solution at `t_final`.
    pub last: Vec<f64>,
    pub min_jacobian_determinant: f64,
}

/// Evolves `config` with leapfrog and a Taylor start
/// `u(-dt) = u0 - dt u1 + dt^2/2 (lap u0 + F(0))`.
pub fn run_3d_linear(config: &Flat3dConfig) -> Result<(FlatOperator, Flat3dOutput)> {
    if !config.spec.is_zero() {
        return Err(Error::config("nonlinearity", "the 3-D mode is linear only"));
    }
    if !(config.t_final >= 0.0) || !config.t_final.is_finite() {
        return Err(Error::config("t_final", format!("must be nonnegative, got {}", config.t_final)));
    }
    let op = FlatOperator::new(&config.shape, config.grid)?;
    if op.min_jacobian_determinant() <= 0.0 {
        return Err(Error::Geometry(format!("flattening Jacobian determinant {} is not positive", op.min_det)));
    }
    let limit = op.suggested_dt();
    let max_dt = match config.dt {
        Some(dt) if !(dt > 0.0) || dt > limit / STABILITY_MARGIN => {
            return Err(Error::config(
                "grid3d.dt",
                format!("{dt} violates the angular-grid stability limit; use dt <= {limit:.6e}"),
            ));
        }
        Some(dt) => dt,
        None => limit,
    };
    let steps = if config.t_final > 0.0 { (config.t_final / max_dt).ceil() as usize } else { 0 };
    let dt = if steps > 0 { config.t_final / steps as f64 } else { max_dt };
    let n = config.grid.len();
    let outer = |c: usize| c / (config.grid.polar * config.grid.azimuthal) == config.grid.radial - 1;
    let sample = |f: &Field3| -> Vec<f64> {
        op.positions().iter().enumerate().map(|(c, x)| if outer(c) { 0.0 } else { f(x) }).collect()
    };
    let forcing_at = |t: f64, out: &mut [f64]| {
        if let Some(f) = &config.forcing {
            for (c, x) in op.positions().iter().enumerate() {
                out[c] = if outer(c) { 0.0 } else { f(t, x) };
            }
        }
    };
    let u0 = sample(&config.u0);
    let u1 = sample(&config.u1);
    let mut lap = vec![0.0; n];
    let mut grad = Vec::new();
    let mut force = vec![0.0; n];
    op.apply(&u0, &mut lap, &mut grad);
    forcing_at(0.0, &mut force);
    let mut prev: Vec<f64> =
        (0..n).map(|c| u0[c] - dt * u1[c] + 0.5 * dt * dt * (lap[c] + force[c])).collect();
    for c in (0..n).filter(|&c| outer(c)) {
        prev[c] = 0.0;
    }
    let mut curr = u0;
    let mut next = vec![0.0; n];
    let mut report = DiagnosticsReport { dt, steps, ..Default::default() };
    let sample_stride = ((config.sample_every / dt).round() as usize).max(1);
    let snapshot_steps: Vec<usize> = config.snapshot_times.iter().map(|t| ((t / dt).round() as usize).min(steps)).collect();
    let mut snapshots = Vec::new();
    let mut scratch = vec![0.0; n];
    let mut record = |step: usize, prev: &[f64], curr: &[f64], report: &mut DiagnosticsReport| {
        let t = step as f64 * dt;
        let e = op.energy(prev, curr, dt, &mut scratch, &mut Vec::new());
        let sup_u = curr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        report.rows.push(DiagnosticsRow { t, e00: e, grad_norm2: 2.0 * e, sup_u, ..Default::default() });
    };
    for &s in &snapshot_steps {
        if s == 0 {
            snapshots.push((0.0, curr.clone()));
        }
    }
    record(0, &prev, &curr, &mut report);
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        op.apply(&curr, &mut lap, &mut grad);
        forcing_at(t, &mut force);
        for c in 0..n {
            next[c] = if outer(c) { 0.0 } else { 2.0 * curr[c] - prev[c] + dt * dt * (lap[c] + force[c]) };
        }
        if next.iter().any(|v| !v.is_finite()) {
            report.blowup = Some(BlowupEvent { t: step as f64 * dt, reason: BlowupReason::NonFinite, sup_du: f64::INFINITY });
            break;
        }
        core::mem::swap(&mut prev, &mut curr);
        core::mem::swap(&mut curr, &mut next);
        if step % sample_stride == 0 || step == steps {
            record(step, &prev, &curr, &mut report);
        }
        for &s in &snapshot_steps {
            if s == step {
                snapshots.push((step as f64 * dt, curr.clone()));
            }
        }
    }
    let min_det = op.min_jacobian_determinant();
    Ok((op, Flat3dOutput { report, snapshots, last: curr, min_jacobian_determinant: min_det }))
}

/// Relative weighted `L^2` distance between a 3-D field and a radial profile
/// `f(|x|)` sampled at the node positions, skipping the fixed outer row.
pub fn relative_l2_to_profile(op: &FlatOperator, v: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let g = op.grid();
    let (mut num, mut den) = (0.0, 0.0);
    for (c, x) in op.positions().iter().enumerate() {
        if c / (g.polar() * g.azimuthal()) == g.radial() - 1 {
            continue;
        }
        let r = f(norm3(x));
        num += op.weights()[c] * (v[c] - r).powi(2);
        den += op.weights()[c] * r * r;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}
