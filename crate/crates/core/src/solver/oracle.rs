//! Closed-form solution of the forced radial Neumann problem outside the unit
//! ball, evaluated by nested Simpson quadrature:
//!
//! `V_tt - V_rr - (2/r) V_r = F1(t, r)` for `r > 1`, `d_r V(t, 1) = F2(t)`,
//! `V = 0` for `t <= 0`.
//!
//! With `W = r V` the problem is a 1-D wave equation on the half line; the
//! solution is the boundary wave `V0(t - r + 1)` plus the forcing integrated
//! along incoming characteristics. `V0` solves `V0' + V0 = g` with
//! `g(p) = int_1^{p+1} s F1(p + 1 - s, s) ds - F2(p)`.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::quadrature::simpson;

pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type BoundaryFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed interval.
pub type Span = (f64, f64);

#[derive(Clone)]
pub struct SphericalOracleProblem {
    pub f1: SourceFn,
    pub f2: BoundaryFn,
    /// Time and radius intervals containing the support of `F1`, if known.
    /// Quadratures are clipped to them.
    pub f1_support: Option<(Span, Span)>,
    /// Time interval containing the support of `F2`, if known.
    pub f2_support: Option<Span>,
    /// Simpson intervals per one-dimensional integral.
    pub resolution: usize,
}

impl SphericalOracleProblem {
    pub fn unforced(resolution: usize) -> Self {
        SphericalOracleProblem {
            f1: Arc::new(|_, _| 0.0),
            f2: Arc::new(|_| 0.0),
            f1_support: Some(((0.0, 0.0), (1.0, 1.0))),
            f2_support: Some((0.0, 0.0)),
            resolution,
        }
    }

    fn s_window(&self) -> Span {
        self.f1_support.map_or((1.0, f64::INFINITY), |(_, rs)| rs)
    }

    fn t_window(&self) -> Span {
        self.f1_support.map_or((0.0, f64::INFINITY), |(ts, _)| ts)
    }

    /// `int_{lo}^{hi} s F1(c - s, s) ds`: the source along the incoming
    /// characteristic `t + s = c`.
    fn characteristic_integral(&self, c: f64, lo: f64, hi: f64) -> f64 {
        let (s0, s1) = self.s_window();
        let (t0, t1) = self.t_window();
        let a = lo.max(s0).max(c - t1);
        let b = hi.min(s1).min(c - t0);
        if !(b > a) {
            return 0.0;
        }
        simpson(|s| s * (self.f1)(c - s, s), a, b, self.resolution)
    }

    fn g(&self, p: f64) -> f64 {
        self.characteristic_integral(p + 1.0, 1.0, p + 1.0) - (self.f2)(p)
    }

    /// The boundary wave `V0(p) = e^{-p} int_0^p e^l g(l) dl`.
    pub fn boundary_wave(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        // Support of g in l.
        let mut hi = 0.0f64;
        let mut lo = f64::INFINITY;
        match self.f1_support {
            Some(((t0, t1), (s0, s1))) => {
                if t1 > t0 && s1 > s0 {
                    lo = lo.min((t0 + s0 - 1.0).max(0.0));
                    hi = hi.max(t1 + s1 - 1.0);
                }
            }
            None => {
                lo = 0.0;
                hi = f64::INFINITY;
            }
        }
        match self.f2_support {
            Some((t0, t1)) => {
                if t1 > t0 {
                    lo = lo.min(t0.max(0.0));
                    hi = hi.max(t1);
                }
            }
            None => {
                lo = 0.0;
                hi = f64::INFINITY;
            }
        }
        let b = p.min(hi);
        if !(b > lo) {
            return 0.0;
        }
        simpson(|l| (l - p).exp() * self.g(l), lo, b, self.resolution)
    }

    /// `V(t, r)`.
    pub fn evaluate(&self, t: f64, r: f64) -> f64 {
        spherical_oracle(self, t, r)
    }
}

/// `V(t, r)`. The boundary wave only reaches `r` once `t >= r - 1`; before
/// that only the forcing contributes.
pub fn spherical_oracle(problem: &SphericalOracleProblem, t: f64, r: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let boundary = problem.boundary_wave(t - r + 1.0);
    let (_, s1) = problem.s_window();
    let top = r.min(s1);
    let forced = if top > 1.0 {
        simpson(
            |rp| {
                let c = t - r + 2.0 * rp;
                problem.characteristic_integral(c, rp, c)
            },
            1.0,
            top,
            problem.resolution,
        )
    } else {
        0.0
    };
    (boundary + forced) / r
}

/// Largest finite-difference residuals of the oracle output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResidual {
    /// `|V_tt - V_rr - (2/r) V_r - F1|` at the interior sample points.
    pub pde: f64,
    /// `|d_r V(t, 1) - F2(t)|` with a second-order one-sided stencil.
    pub boundary: f64,
}

/// Substitutes the quadrature output into the equation and the boundary
/// condition with second-order differences of step `h`.
pub fn oracle_residual(problem: &SphericalOracleProblem, interior: &[(f64, f64)], boundary_times: &[f64], h: f64) -> OracleResidual {
    let v = |t: f64, r: f64| spherical_oracle(problem, t, r);
    let mut pde: f64 = 0.0;
    for &(t, r) in interior {
        let c = v(t, r);
        let vtt = (v(t + h, r) - 2.0 * c + v(t - h, r)) / (h * h);
        let vrr = (v(t, r + h) - 2.0 * c + v(t, r - h)) / (h * h);
        let vr = (v(t, r + h) - v(t, r - h)) / (2.0 * h);
        pde = pde.max((vtt - vrr - 2.0 * vr / r - (problem.f1)(t, r)).abs());
    }
    let mut boundary: f64 = 0.0;
    for &t in boundary_times {
        let vr = (-3.0 * v(t, 1.0) + 4.0 * v(t, 1.0 + h) - v(t, 1.0 + 2.0 * h)) / (2.0 * h);
        boundary = boundary.max((vr - (problem.f2)(t)).abs());
    }
    OracleResidual { pde, boundary }
}

/// The oracle sampled at the radii of a grid.
pub fn oracle_profile(problem: &SphericalOracleProblem, t: f64, radii: &[f64]) -> Vec<f64> {
    radii.iter().map(|&r| spherical_oracle(problem, t, r)).collect()
}
