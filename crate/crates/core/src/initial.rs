//! Initial data, the compatibility sequence `psi_0, psi_1, psi_2` and the
//! boundary compatibility check.
//!
//! Data are kept clear of the obstacle, so every compatibility condition
//! holds exactly; `psi_2` is still built explicitly because the leapfrog
//! start needs it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::ObstacleShape;
use crate::grid::RadialGrid;
use crate::nullform::{NullFormSpec, RadialJet, RadialNonlinearity};

/// Smallest accepted `|1 - Q^{00}|` when solving for `u_tt`.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;

/// `exp(-1 / (1 - s^2))` on `|s| < 1`, zero elsewhere.
pub fn bump(s: f64) -> f64 {
    bump_jet(s).0
}

/// Bump value and its first two derivatives in `s`.
pub fn bump_jet(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (-1.0 / q).exp();
    let g1 = -2.0 * s / (q * q);
    let g2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
    (b, b * g1, b * (g1 * g1 + g2))
}

/// Radial bump `amplitude * bump((r - center) / width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl BumpProfile {
    pub fn value(&self, r: f64) -> f64 {
        self.amplitude * bump((r - self.center) / self.width)
    }

    /// `(f, f_r, f_rr)`.
    pub fn jet(&self, r: f64) -> (f64, f64, f64) {
        let (b, b1, b2) = bump_jet((r - self.center) / self.width);
        let w = self.width;
        (self.amplitude * b, self.amplitude * b1 / w, self.amplitude * b2 / (w * w))
    }

    pub fn inner_edge(&self) -> f64 {
        self.center - self.width
    }

    pub fn outer_edge(&self) -> f64 {
        self.center + self.width
    }
}

/// How the data fields are shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// `u0 = u0_amp * bump`, `u1 = u1_amp * bump`.
    Bump,
    /// `u0 = u0_amp * bump`, `u1 = -(u0 / r + d_r u0)`: to leading order a
    /// purely outgoing spherical wave.
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataDescription {
    pub kind: DataKind,
    pub center: f64,
    pub width: f64,
    pub u0_amp: f64,
    pub u1_amp: f64,
    pub epsilon: f64,
}

impl Default for DataDescription {
    fn default() -> Self {
        DataDescription { kind: DataKind::Bump, center: 3.0, width: 1.0, u0_amp: 1.0, u1_amp: 0.0, epsilon: 0.01 }
    }
}

impl DataDescription {
    pub fn profile(&self, amplitude: f64) -> BumpProfile {
        BumpProfile { center: self.center, width: self.width, amplitude }
    }

    pub fn validate(&self, shape: &ObstacleShape) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(Error::config("data.width", format!("must be positive, got {}", self.width)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::config("data.epsilon", format!("must be nonnegative, got {}", self.epsilon)));
        }
        let edge = self.center - self.width;
        let b = shape.max_b();
        if edge <= b {
            return Err(Error::config(
                "data.center",
                format!(
                    "bump support [{edge}, {}] reaches the obstacle (boundary radius up to {b}); need center - width > {b}",
                    self.center + self.width
                ),
            ));
        }
        Ok(())
    }

    /// Samples the data on a radial grid.
    pub fn build(&self, grid: &RadialGrid, shape: &ObstacleShape) -> Result<InitialData> {
        self.validate(shape)?;
        let p0 = self.profile(self.u0_amp);
        let radii = grid.radii();
        let u0: Vec<f64> = radii.iter().map(|&r| p0.value(r)).collect();
        let u1: Vec<f64> = match self.kind {
            DataKind::Bump => {
                let p1 = self.profile(self.u1_amp);
                radii.iter().map(|&r| p1.value(r)).collect()
            }
            DataKind::Outgoing => radii
                .iter()
                .map(|&r| {
                    let (f, fr, _) = p0.jet(r);
                    -(f / r + fr)
                })
                .collect(),
        };
        Ok(InitialData { u0, u1, epsilon: self.epsilon, support_radius: p0.outer_edge() })
    }
}

/// Unscaled data `(u0, u1)` on a radial grid; the physical data are
/// `epsilon * (u0, u1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub epsilon: f64,
    pub support_radius: f64,
}

impl InitialData {
    pub fn zero(grid: &RadialGrid) -> Self {
        InitialData { u0: vec![0.0; grid.len()], u1: vec![0.0; grid.len()], epsilon: 0.0, support_radius: grid.r_min() }
    }

    pub fn psi0(&self) -> Vec<f64> {
        self.u0.iter().map(|v| self.epsilon * v).collect()
    }

    pub fn psi1(&self) -> Vec<f64> {
        self.u1.iter().map(|v| self.epsilon * v).collect()
    }
}

/// `u0` bump with zero velocity and unit scale.
pub fn make_bump_data(
    center: f64,
    width: f64,
    amplitude: f64,
    grid: &RadialGrid,
    shape: &ObstacleShape,
) -> Result<InitialData> {
    DataDescription { kind: DataKind::Bump, center, width, u0_amp: amplitude, u1_amp: 0.0, epsilon: 1.0 }
        .build(grid, shape)
}

/// Outgoing-wave data of the given amplitude and unit scale.
pub fn make_outgoing_data(
    center: f64,
    width: f64,
    amplitude: f64,
    grid: &RadialGrid,
    shape: &ObstacleShape,
) -> Result<InitialData> {
    DataDescription { kind: DataKind::Outgoing, center, width, u0_amp: amplitude, u1_amp: 0.0, epsilon: 1.0 }
        .build(grid, shape)
}

/// Time-derivative traces `psi_k = d_t^k u(0, .)` for `k = 0, 1, 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilitySequence {
    pub psis: [Vec<f64>; 3],
}

impl CompatibilitySequence {
    pub fn order(&self) -> usize {
        2
    }
}

/// Solves the equation for `u_tt` at `t = 0`:
/// `psi_2 = (lap psi_0 + N_rest + F(0)) / (1 - Q^{00})`.
///
/// `forcing0` is the forcing at `t = 0` sampled on the grid, if any.
pub fn build_psi2(
    data: &InitialData,
    spec: &NullFormSpec,
    grid: &RadialGrid,
    forcing0: Option<&[f64]>,
) -> Result<CompatibilitySequence> {
    if data.u0.len() != grid.len() || data.u1.len() != grid.len() {
        return Err(Error::config("data", "field length does not match the grid"));
    }
    if !spec.is_isotropic() {
        return Err(Error::config("nonlinearity", "not invariant under rotations; radial mode needs an isotropic nonlinearity"));
    }
    let nl = RadialNonlinearity::new(spec);
    let psi0 = data.psi0();
    let psi1 = data.psi1();
    let mut psi2 = vec![0.0; grid.len()];
    for j in 0..grid.len() {
        let jet = RadialJet {
            u_t: psi1[j],
            u_r: grid.d_r(&psi0, j),
            u_tt: 0.0,
            u_tr: grid.d_r(&psi1, j),
            u_rr: grid.d_rr(&psi0, j),
            r: grid.r(j),
        };
        let denom = 1.0 - nl.time_coefficient(jet.u_t, jet.u_r);
        if denom.abs() < DEGENERACY_TOLERANCE {
            return Err(Error::Degenerate(format!("1 - Q^00 = {denom:e} at r = {}", jet.r)));
        }
        let f = forcing0.map_or(0.0, |f| f[j]);
        psi2[j] = (grid.laplacian(&psi0, j) + nl.remainder(&jet) + f) / denom;
    }
    Ok(CompatibilitySequence { psis: [psi0, psi1, psi2] })
}

/// Largest `m <= 3` such that `d_nu psi_k` vanishes at the boundary within
/// `tol` for every `k < m`.
pub fn check_compatibility_order(seq: &CompatibilitySequence, grid: &RadialGrid, tol: f64) -> usize {
    seq.psis
        .iter()
        .take_while(|psi| grid.boundary_normal_derivative(psi).abs() <= tol)
        .count()
}

/// `sum_{k<=2} ||<x>^k grad^k u0|| + sum_{k<=1} ||<x>^{1+k} grad^k u1||`,
/// with `grad^k` the full tensor of order-`k` derivatives.
pub fn weighted_data_norm(data: &InitialData, grid: &RadialGrid) -> f64 {
    let jb = |j: usize| (1.0 + grid.r(j) * grid.r(j)).sqrt();
    let (u0, u1) = (data.psi0(), data.psi1());
    let hess2 = |u: &[f64], j: usize| {
        let ur = grid.d_r(u, j);
        let urr = grid.d_rr(u, j);
        let t = ur / grid.r(j);
        urr * urr + 2.0 * t * t
    };
    let n = |f: &dyn Fn(usize) -> f64| grid.weighted_sum(f).sqrt();
    n(&|j| u0[j] * u0[j])
        + n(&|j| (jb(j) * grid.d_r(&u0, j)).powi(2))
        + n(&|j| jb(j).powi(4) * hess2(&u0, j))
        + n(&|j| (jb(j) * u1[j]).powi(2))
        + n(&|j| (jb(j).powi(2) * grid.d_r(&u1, j)).powi(2))
}
