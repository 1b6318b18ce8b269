//! Obstacle geometry: the radial profile `b(omega)` of the convex obstacle,
//! the cutoff profile used by the modified scaling field, and the
//! boundary-flattening diffeomorphism that sends the obstacle surface to the
//! unit sphere while leaving `|x| >= 3` untouched.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    dot3, inv3, norm3, normalize3, scale3, sub3, Mat3, Vec3, IDENTITY3,
};

/// Lower and upper bounds for `b(omega)`.
pub const B_MIN: f64 = 0.75;
pub const B_MAX: f64 = 1.0;

/// Beyond this radius the flattening map is the identity.
pub const FAR_FIELD_RADIUS: f64 = 3.0;

/// One real spherical-harmonic perturbation `coefficient * Y_degree^order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub degree: u32,
    pub order: i32,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObstacleShape {
    Ball { radius: f64 },
    StarShaped { base: f64, harmonics: Vec<Harmonic> },
}

impl ObstacleShape {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius > B_MIN && radius < B_MAX) {
            return Err(Error::Geometry(format!(
                "ball radius {radius} outside (3/4, 1)"
            )));
        }
        Ok(ObstacleShape::Ball { radius })
    }

    /// Builds a star-shaped obstacle and verifies the profile bounds and
    /// convexity on a deterministic set of surface samples.
    pub fn star(base: f64, harmonics: Vec<Harmonic>) -> Result<Self> {
        for h in &harmonics {
            if h.order.unsigned_abs() > h.degree {
                return Err(Error::Geometry(format!(
                    "harmonic order {} exceeds degree {}",
                    h.order, h.degree
                )));
            }
        }
        let shape = ObstacleShape::StarShaped { base, harmonics };
        for omega in fibonacci_sphere(2000) {
            let b = shape.b_unchecked(&omega);
            if !(b > B_MIN && b < B_MAX) {
                return Err(Error::Geometry(format!(
                    "b(omega) = {b} outside (3/4, 1) at omega = {omega:?}"
                )));
            }
        }
        let worst = shape.min_surface_curvature(600);
        if worst < -1e-6 {
            return Err(Error::Geometry(format!(
                "surface is not convex: tangential Hessian eigenvalue {worst:e}"
            )));
        }
        Ok(shape)
    }

    /// `b(omega)`; `omega` must be a unit vector to within 1e-12.
    pub fn eval_b(&self, omega: &Vec3) -> Result<f64> {
        let n = norm3(omega);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("direction has norm {n}, expected 1")));
        }
        Ok(self.b_unchecked(omega))
    }

    pub(crate) fn b_unchecked(&self, omega: &Vec3) -> f64 {
        match self {
            ObstacleShape::Ball { radius } => *radius,
            ObstacleShape::StarShaped { base, harmonics } => {
                harmonics.iter().fold(*base, |acc, h| {
                    acc + h.coefficient * real_spherical_harmonic(h.degree, h.order, omega)
                })
            }
        }
    }

    /// Largest value of `b` over a deterministic direction sample (exact for balls).
    pub fn max_b(&self) -> f64 {
        match self {
            ObstacleShape::Ball { radius } => *radius,
            ObstacleShape::StarShaped { .. } => fibonacci_sphere(4000)
                .iter()
                .map(|w| self.b_unchecked(w))
                .fold(f64::MIN, f64::max),
        }
    }

    /// Level-set function whose zero set is the obstacle surface; positive in
    /// the exterior domain.
    fn level(&self, x: &Vec3) -> f64 {
        let r = norm3(x);
        r - self.b_unchecked(&scale3(x, 1.0 / r))
    }

    fn level_gradient(&self, x: &Vec3) -> Vec3 {
        if let ObstacleShape::Ball { .. } = self {
            return normalize3(x);
        }
        let h = 1e-6;
        let mut g = [0.0; 3];
        for k in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[k] += h;
            xm[k] -= h;
            g[k] = (self.level(&xp) - self.level(&xm)) / (2.0 * h);
        }
        g
    }

    /// Unit normal at the surface point `b(omega) omega`, pointing out of the
    /// obstacle into the exterior domain (for a ball, `nu = omega`). Only
    /// `d_nu u = 0` is ever imposed, so the orientation is a convention.
    pub fn outward_normal(&self, omega: &Vec3) -> Result<Vec3> {
        let b = self.eval_b(omega)?;
        Ok(normalize3(&self.level_gradient(&scale3(omega, b))))
    }

    /// Smallest eigenvalue of the tangential Hessian of the level function
    /// over `n` surface samples. Nonnegative means convex.
    pub fn min_surface_curvature(&self, n: usize) -> f64 {
        let h = 1e-4;
        let mut worst = f64::MAX;
        for omega in fibonacci_sphere(n) {
            let x = scale3(&omega, self.b_unchecked(&omega));
            let nu = normalize3(&self.level_gradient(&x));
            let (t1, t2) = tangent_basis(&nu);
            let mut hess = [[0.0; 3]; 3];
            let f0 = self.level(&x);
            for i in 0..3 {
                for j in i..3 {
                    let v = if i == j {
                        let mut xp = x;
                        let mut xm = x;
                        xp[i] += h;
                        xm[i] -= h;
                        (self.level(&xp) - 2.0 * f0 + self.level(&xm)) / (h * h)
                    } else {
                        let mut s = 0.0;
                        for (si, sj, sign) in [(1.0, 1.0, 1.0), (-1.0, -1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0)] {
                            let mut xe = x;
                            xe[i] += si * h;
                            xe[j] += sj * h;
                            s += sign * self.level(&xe);
                        }
                        s / (4.0 * h * h)
                    };
                    hess[i][j] = v;
                    hess[j][i] = v;
                }
            }
            let q = |a: &Vec3, b: &Vec3| -> f64 {
                (0..3)
                    .map(|i| (0..3).map(|j| a[i] * hess[i][j] * b[j]).sum::<f64>())
                    .sum()
            };
            let (a, b, c) = (q(&t1, &t1), q(&t1, &t2), q(&t2, &t2));
            let mean = 0.5 * (a + c);
            let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            worst = worst.min(mean - disc);
        }
        worst
    }
}

/// Two unit vectors orthogonal to `n` and to each other.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let seed = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let t1 = normalize3(&sub3(&seed, &scale3(n, dot3(&seed, n))));
    let t2 = crate::linalg::cross3(n, &t1);
    (t1, t2)
}

/// Quasi-uniform deterministic points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5.0.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [s * phi.cos(), s * phi.sin(), z]
        })
        .collect()
}

/// Orthonormal real spherical harmonic (no Condon-Shortley phase). Positive
/// orders use `cos(m phi)`, negative orders `sin(|m| phi)`.
pub fn real_spherical_harmonic(degree: u32, order: i32, omega: &Vec3) -> f64 {
    let l = degree as i64;
    let m = order.unsigned_abs() as i64;
    let z = omega[2].clamp(-1.0, 1.0);
    let phi = omega[1].atan2(omega[0]);
    let s = (1.0 - z * z).max(0.0).sqrt();
    // P_m^m, P_{m+1}^m, then upward recurrence in l.
    let mut pmm = 1.0;
    for k in 1..=m {
        pmm *= (2 * k - 1) as f64 * s;
    }
    let plm = if l == m {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = z * (2 * m + 1) as f64 * pmm;
        for ll in (m + 2)..=l {
            let p2 = ((2 * ll - 1) as f64 * z * p1 - (ll + m - 1) as f64 * p0) / (ll - m) as f64;
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    match order {
        0 => norm * plm,
        o if o > 0 => 2.0.sqrt() * norm * plm * (m as f64 * phi).cos(),
        _ => 2.0.sqrt() * norm * plm * (m as f64 * phi).sin(),
    }
}

/// Smooth radial cutoff: zero for `s <= 1`, one for `s >= 3/2`.
///
/// The derivative is a smooth trapezoid (quintic-smoothstep ramps of
/// normalized width [`CutoffProfile::RAMP`]) so the profile is C^3 with peak
/// slope `2 / (1 - RAMP) = 2.5`. A C^1 step over an interval of length 1/2
/// cannot keep its slope below 2, so the peak is kept as low as the ramps
/// allow; with it `d/dr (r / divisor)` stays positive for every `b` in (3/4, 1).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub const START: f64 = 1.0;
    pub const END: f64 = 1.5;
    pub const RAMP: f64 = 0.2;

    pub fn max_derivative(&self) -> f64 {
        2.0 / (1.0 - Self::RAMP)
    }

    pub fn value(&self, s: f64) -> f64 {
        if s <= Self::START {
            return 0.0;
        }
        if s >= Self::END {
            return 1.0;
        }
        let tau = (s - Self::START) / (Self::END - Self::START);
        let w = Self::RAMP;
        let g = if tau <= w {
            w * smoothstep_integral(tau / w)
        } else if tau <= 1.0 - w {
            0.5 * w + (tau - w)
        } else {
            (1.0 - w) - w * smoothstep_integral((1.0 - tau) / w)
        };
        g / (1.0 - w)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        if s <= Self::START || s >= Self::END {
            return 0.0;
        }
        let tau = (s - Self::START) / (Self::END - Self::START);
        let w = Self::RAMP;
        let g = if tau <= w {
            smoothstep(tau / w)
        } else if tau <= 1.0 - w {
            1.0
        } else {
            smoothstep((1.0 - tau) / w)
        };
        g / ((1.0 - w) * (Self::END - Self::START))
    }
}

fn smoothstep(x: f64) -> f64 {
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Integral of [`smoothstep`] from 0 to x.
fn smoothstep_integral(x: f64) -> f64 {
    let x4 = x * x * x * x;
    x4 * (2.5 - 3.0 * x + x * x)
}

/// The boundary-flattening map `y = x / ((1 - rho(|x|/2)) b(omega) + rho(|x|/2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlattenMap {
    pub shape: ObstacleShape,
    pub cutoff: CutoffProfile,
}

impl FlattenMap {
    pub fn new(shape: ObstacleShape) -> Self {
        FlattenMap { shape, cutoff: CutoffProfile }
    }

    fn divisor(&self, r: f64, b: f64) -> f64 {
        let c = self.cutoff.value(0.5 * r);
        (1.0 - c) * b + c
    }

    fn divisor_dr(&self, r: f64, b: f64) -> f64 {
        0.5 * (1.0 - b) * self.cutoff.derivative(0.5 * r)
    }

    /// `d/dr (r / divisor(r))` along a fixed direction; the diffeomorphism
    /// witness.
    pub fn radial_derivative(&self, r: f64, omega: &Vec3) -> f64 {
        let b = self.shape.b_unchecked(omega);
        let d = self.divisor(r, b);
        (d - r * self.divisor_dr(r, b)) / (d * d)
    }

    pub fn flatten(&self, x: &Vec3) -> Result<Vec3> {
        let r = norm3(x);
        if r >= FAR_FIELD_RADIUS {
            return Ok(*x);
        }
        if r == 0.0 {
            return Err(Error::Domain("origin lies inside the obstacle".into()));
        }
        let omega = scale3(x, 1.0 / r);
        let b = self.shape.b_unchecked(&omega);
        if r < b * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "point at radius {r} lies inside the obstacle (b = {b})"
            )));
        }
        Ok(scale3(x, 1.0 / self.divisor(r, b)))
    }

    fn flatten_unchecked(&self, x: &Vec3) -> Vec3 {
        let r = norm3(x);
        if r >= FAR_FIELD_RADIUS {
            return *x;
        }
        let b = self.shape.b_unchecked(&scale3(x, 1.0 / r));
        scale3(x, 1.0 / self.divisor(r, b))
    }

    /// Inverse map from `|y| >= 1` back to the exterior domain.
    pub fn inverse(&self, y: &Vec3) -> Result<Vec3> {
        let rho = norm3(y);
        if rho >= FAR_FIELD_RADIUS {
            return Ok(*y);
        }
        if rho < 1.0 - 1e-12 {
            return Err(Error::Domain(format!("|y| = {rho} < 1")));
        }
        let omega = scale3(y, 1.0 / rho);
        let b = self.shape.b_unchecked(&omega);
        let (mut lo, mut hi) = (b, FAR_FIELD_RADIUS);
        let mut r = (b * rho).clamp(lo, hi);
        for _ in 0..200 {
            let f = r / self.divisor(r, b) - rho;
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let step = f / self.radial_derivative(r, &omega);
            let mut next = r - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 1e-15 * r {
                r = next;
                break;
            }
            r = next;
        }
        Ok(scale3(&omega, r))
    }

    /// `dy/dx` at a point of the exterior domain. Analytic for balls, central
    /// differences (step 1e-5) for star-shaped obstacles, identity for `|x| >= 3`.
    pub fn jacobian(&self, x: &Vec3) -> Result<Mat3> {
        let r = norm3(x);
        if r >= FAR_FIELD_RADIUS {
            return Ok(IDENTITY3);
        }
        self.flatten(x)?;
        let jac = match &self.shape {
            ObstacleShape::Ball { radius } => {
                let omega = scale3(x, 1.0 / r);
                let d = self.divisor(r, *radius);
                let k = r * self.divisor_dr(r, *radius) / d;
                let mut m = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        m[i][j] = (delta - k * omega[i] * omega[j]) / d;
                    }
                }
                m
            }
            ObstacleShape::StarShaped { .. } => self.fd_jacobian(x, 1e-5),
        };
        if crate::linalg::det3(&jac) < 1e-8 {
            return Err(Error::Geometry(format!(
                "near-singular flattening Jacobian at {x:?}"
            )));
        }
        Ok(jac)
    }

    pub(crate) fn fd_jacobian(&self, x: &Vec3, h: f64) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (self.flatten_unchecked(&xp), self.flatten_unchecked(&xm));
            for i in 0..3 {
                m[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        m
    }

    /// `dx/dy` at a point `y` with `|y| >= 1`.
    pub fn inverse_jacobian(&self, y: &Vec3) -> Result<Mat3> {
        let x = self.inverse(y)?;
        let j = self.jacobian(&x)?;
        inv3(&j, 1e-8).ok_or_else(|| Error::Geometry(format!("singular Jacobian at {x:?}")))
    }
}
