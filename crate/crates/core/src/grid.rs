//! Uniform radial grid on `[r_min, r_max]` with the second-order stencils
//! shared by the solver, the compatibility checks and the diagnostics.
//!
//! At the inner boundary the stencils use the even ghost node
//! `u[-1] = u[1]`, which imposes `d_r u = 0`. At the outer end they fall back
//! to second-order one-sided differences.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    dr: f64,
    n: usize,
}

impl RadialGrid {
    pub const MIN_NODES: usize = 16;

    /// Grid with spacing `dr` covering `[r_min, r_max]`; `r_max` is rounded up
    /// to a whole number of cells.
    pub fn new(r_min: f64, r_max: f64, dr: f64) -> Result<Self> {
        if !(dr > 0.0) || !dr.is_finite() {
            return Err(Error::config("grid.dr", format!("must be positive, got {dr}")));
        }
        if !(r_min > 0.0) {
            return Err(Error::config("grid.r_min", format!("must be positive, got {r_min}")));
        }
        let cells = ((r_max - r_min) / dr - 1e-9).ceil().max(0.0) as usize;
        let n = cells + 1;
        if n < Self::MIN_NODES {
            return Err(Error::config(
                "grid",
                format!("{n} nodes on [{r_min}, {r_max}] with dr = {dr}; need at least {}", Self::MIN_NODES),
            ));
        }
        Ok(RadialGrid { r_min, dr, n })
    }

    /// Outer radius large enough that nothing reaches it before `t_final`.
    pub fn domain_of_dependence_radius(r_min: f64, support_radius: f64, t_final: f64) -> f64 {
        r_min + support_radius + 1.2 * t_final + 2.0
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.n - 1)
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        self.r_min + j as f64 * self.dr
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.r(j)).collect()
    }

    /// Trapezoid weights for `int f dx = 4 pi int f r^2 dr`.
    pub fn volume_weights(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                let end = if j == 0 || j == self.n - 1 { 0.5 } else { 1.0 };
                4.0 * PI * self.r(j) * self.r(j) * self.dr * end
            })
            .collect()
    }

    /// Index of the last node with `r <= radius`.
    pub fn last_index_within(&self, radius: f64) -> usize {
        if radius < self.r_min {
            return 0;
        }
        (((radius - self.r_min) / self.dr + 1e-9).floor() as usize).min(self.n - 1)
    }

    #[inline]
    pub fn d_r(&self, u: &[f64], j: usize) -> f64 {
        let n = self.n;
        if j == 0 {
            0.0
        } else if j == n - 1 {
            (3.0 * u[j] - 4.0 * u[j - 1] + u[j - 2]) / (2.0 * self.dr)
        } else {
            (u[j + 1] - u[j - 1]) / (2.0 * self.dr)
        }
    }

    /// `d_r u` with second-order one-sided stencils at both ends instead of the
    /// even reflection at the inner boundary.
    #[inline]
    pub fn d_r_one_sided(&self, u: &[f64], j: usize) -> f64 {
        if j == 0 {
            self.boundary_normal_derivative(u)
        } else {
            self.d_r(u, j)
        }
    }

    #[inline]
    pub fn d_rr(&self, u: &[f64], j: usize) -> f64 {
        let n = self.n;
        let h2 = self.dr * self.dr;
        if j == 0 {
            2.0 * (u[1] - u[0]) / h2
        } else if j == n - 1 {
            (2.0 * u[j] - 5.0 * u[j - 1] + 4.0 * u[j - 2] - u[j - 3]) / h2
        } else {
            (u[j + 1] - 2.0 * u[j] + u[j - 1]) / h2
        }
    }

    /// `u_rr + (2 / r) u_r`.
    #[inline]
    pub fn laplacian(&self, u: &[f64], j: usize) -> f64 {
        self.d_rr(u, j) + 2.0 * self.d_r(u, j) / self.r(j)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| self.d_r(u, j)).collect()
    }

    /// Second-order one-sided `d_r u` at the inner boundary, independent of
    /// the ghost-node convention.
    pub fn boundary_normal_derivative(&self, u: &[f64]) -> f64 {
        (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * self.dr)
    }

    /// `sqrt(int f^2 dx)` over the whole exterior domain.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.weighted_sum(|j| u[j] * u[j]).sqrt()
    }

    /// Trapezoid integral of a nodal function.
    pub fn weighted_sum<F: FnMut(usize) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.n {
            let end = if j == 0 || j == self.n - 1 { 0.5 } else { 1.0 };
            acc += end * self.r(j) * self.r(j) * f(j);
        }
        4.0 * PI * self.dr * acc
    }

    /// Linear interpolation of nodal values at radius `r` (clamped to the grid).
    pub fn interpolate(&self, u: &[f64], r: f64) -> f64 {
        let x = ((r - self.r_min) / self.dr).clamp(0.0, (self.n - 1) as f64);
        let j = (x.floor() as usize).min(self.n - 2);
        let f = x - j as f64;
        (1.0 - f) * u[j] + f * u[j + 1]
    }
}
