//! The nonlinearity `N(du, d2u) = S^{ab} du_a du_b + Q^{ab}(du) d2u_ab` as
//! explicit coefficient tensors, plus the structural checks run against it:
//! symmetry, the null condition on the light cone, and the admissible
//! boundary condition on the obstacle surface.
//!
//! Index 0 is time and indices 1..=3 are space. Contractions are plain sums,
//! no metric is applied, so `S = diag(1, -1, -1, -1)` is the classical null
//! form `(d_t u)^2 - |grad u|^2`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{fibonacci_sphere, ObstacleShape};
use crate::linalg::{dot3, scale3, sub3, Mat4, Vec3, Vec4};

/// `q[a][b][m]` is the coefficient of `du_m d2u_ab`.
pub type QuasilinearTensor = [[[f64; 4]; 4]; 4];
/// `r[a][b][m][n]` is the coefficient of `du_m du_n d2u_ab`.
pub type QuadraticCoefficientTensor = [[[[f64; 4]; 4]; 4]; 4];

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 256;
const CHECK_SEED: u64 = 0x6e75_6c6c;

/// Higher-order part of `Q^{ab}(du)`, quadratic in `du`.
#[derive(Debug, Clone, PartialEq)]
pub enum CubicPart {
    None,
    /// `Q^{ij} += -du_i du_j + |grad u|^2 delta_ij`.
    Chaplygin,
    Custom(Box<QuadraticCoefficientTensor>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullFormSpec {
    s: Mat4,
    q: QuasilinearTensor,
    cubic: CubicPart,
    normalized: bool,
}

fn symmetric_scale(v: f64) -> f64 {
    1e-14 * (1.0 + v.abs())
}

impl NullFormSpec {
    /// Rejects tensors that are not symmetric in their second-derivative
    /// index pair.
    pub fn new(s: Mat4, q: QuasilinearTensor, cubic: CubicPart) -> Result<Self> {
        for a in 0..4 {
            for b in 0..4 {
                if (s[a][b] - s[b][a]).abs() > symmetric_scale(s[a][b]) {
                    return Err(Error::config(
                        "nonlinearity.S",
                        format!("S[{a}][{b}] = {} differs from S[{b}][{a}] = {}", s[a][b], s[b][a]),
                    ));
                }
                for m in 0..4 {
                    if (q[a][b][m] - q[b][a][m]).abs() > symmetric_scale(q[a][b][m]) {
                        return Err(Error::config(
                            "nonlinearity.Q",
                            format!("Q[{a}][{b}][{m}] differs from Q[{b}][{a}][{m}]"),
                        ));
                    }
                    if let CubicPart::Custom(r) = &cubic {
                        for n in 0..4 {
                            if (r[a][b][m][n] - r[b][a][m][n]).abs() > symmetric_scale(r[a][b][m][n]) {
                                return Err(Error::config(
                                    "nonlinearity.cubic",
                                    format!("R[{a}][{b}][{m}][{n}] not symmetric in (a, b)"),
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(NullFormSpec { s, q, cubic, normalized: false })
    }

    pub fn zero() -> Self {
        NullFormSpec {
            s: [[0.0; 4]; 4],
            q: [[[0.0; 4]; 4]; 4],
            cubic: CubicPart::None,
            normalized: false,
        }
    }

    /// `(d_t u)^2 - |grad u|^2`.
    pub fn null_q0() -> Self {
        let mut spec = Self::zero();
        spec.s[0][0] = 1.0;
        for i in 1..4 {
            spec.s[i][i] = -1.0;
        }
        spec
    }

    /// `(d_t u)^2`, which violates the null condition.
    pub fn nonnull_dt2() -> Self {
        let mut spec = Self::zero();
        spec.s[0][0] = 1.0;
        spec
    }

    /// Potential equation of an irrotational Chaplygin gas:
    /// `-2 d_i phi d_t d_i phi - d_i phi d_j phi d_ij phi + (2 d_t phi + |grad phi|^2) lap phi`.
    pub fn chaplygin() -> Self {
        let mut spec = Self::zero();
        for i in 1..4 {
            spec.q[0][i][i] = -1.0;
            spec.q[i][0][i] = -1.0;
            spec.q[i][i][0] = 2.0;
        }
        spec.cubic = CubicPart::Chaplygin;
        spec
    }

    pub fn semilinear(&self) -> &Mat4 {
        &self.s
    }

    pub fn quasilinear(&self) -> &QuasilinearTensor {
        &self.q
    }

    pub fn cubic(&self) -> &CubicPart {
        &self.cubic
    }

    pub fn is_zero(&self) -> bool {
        self.s.iter().flatten().all(|v| *v == 0.0)
            && self.q.iter().flatten().flatten().all(|v| *v == 0.0)
            && matches!(self.cubic, CubicPart::None)
    }

    /// True when the quasilinear part vanishes (only `S` is present).
    pub fn is_semilinear(&self) -> bool {
        self.q.iter().flatten().flatten().all(|v| *v == 0.0) && matches!(self.cubic, CubicPart::None)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Enforces the normalization used for the compatibility functions:
    /// `Q^{00} = 0` and `sum_{a,b} |Q^{ab}(du)| <= 1/2` whenever every component
    /// of `du` is at most `amplitude` in magnitude.
    pub fn with_assume(mut self, amplitude: f64) -> Result<Self> {
        for m in 0..4 {
            if self.q[0][0][m] != 0.0 {
                return Err(Error::config("nonlinearity.Q", "Q^{00} must vanish"));
            }
        }
        let linear: f64 = self.q.iter().flatten().flatten().map(|v| v.abs()).sum();
        let quadratic = match &self.cubic {
            CubicPart::None => 0.0,
            // sum_{ij} |-p_i p_j + |p|^2 delta_ij| <= 6 a^2 + 3 * 3 a^2
            CubicPart::Chaplygin => 15.0,
            CubicPart::Custom(r) => {
                for m in 0..4 {
                    for n in 0..4 {
                        if r[0][0][m][n] != 0.0 {
                            return Err(Error::config("nonlinearity.cubic", "Q^{00} must vanish"));
                        }
                    }
                }
                r.iter().flatten().flatten().flatten().map(|v| v.abs()).sum()
            }
        };
        let bound = linear * amplitude + quadratic * amplitude * amplitude;
        if bound > 0.5 {
            return Err(Error::config(
                "nonlinearity",
                format!("sum |Q^ab| may reach {bound} > 1/2 at amplitude {amplitude}"),
            ));
        }
        self.normalized = true;
        Ok(self)
    }

    /// The full coefficient matrix `Q^{ab}(p)`.
    pub fn q_matrix(&self, p: &Vec4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                out[a][b] = (0..4).map(|m| self.q[a][b][m] * p[m]).sum();
            }
        }
        match &self.cubic {
            CubicPart::None => {}
            CubicPart::Chaplygin => {
                let grad2 = p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
                for i in 1..4 {
                    for j in 1..4 {
                        out[i][j] -= p[i] * p[j];
                    }
                    out[i][i] += grad2;
                }
            }
            CubicPart::Custom(r) => {
                for a in 0..4 {
                    for b in 0..4 {
                        let mut acc = 0.0;
                        for m in 0..4 {
                            for n in 0..4 {
                                acc += r[a][b][m][n] * p[m] * p[n];
                            }
                        }
                        out[a][b] += acc;
                    }
                }
            }
        }
        out
    }

    pub fn semilinear_form(&self, du: &Vec4, dv: &Vec4) -> f64 {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                acc += self.s[a][b] * du[a] * dv[b];
            }
        }
        acc
    }

    /// `N(du, d2u)`.
    pub fn evaluate(&self, du: &Vec4, d2u: &Mat4) -> f64 {
        let qm = self.q_matrix(du);
        let mut acc = self.semilinear_form(du, du);
        for a in 0..4 {
            for b in 0..4 {
                acc += qm[a][b] * d2u[a][b];
            }
        }
        acc
    }

    /// Symbols restricted to a covector `omega`: `(S w w, Q_m w_m w w, R w^4)`.
    pub fn symbols(&self, omega: &Vec4) -> (f64, f64, f64) {
        let s = self.semilinear_form(omega, omega);
        let mut q = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for m in 0..4 {
                    q += self.q[a][b][m] * omega[m] * omega[a] * omega[b];
                }
            }
        }
        let full = self.q_matrix(omega);
        let mut quad = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                quad += full[a][b] * omega[a] * omega[b];
            }
        }
        (s, q, quad - q)
    }

    /// Checks that the value of `N` at a radial jet does not depend on the
    /// ray direction, which is what a spherically symmetric reduction needs.
    pub fn is_isotropic(&self) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED ^ 0x150);
        let dirs = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            crate::linalg::normalize3(&[0.3, -0.5, 0.8]),
        ];
        for _ in 0..8 {
            let jet = RadialJet {
                u_t: rng.gen_range(-1.0..1.0),
                u_r: rng.gen_range(-1.0..1.0),
                u_tt: rng.gen_range(-1.0..1.0),
                u_tr: rng.gen_range(-1.0..1.0),
                u_rr: rng.gen_range(-1.0..1.0),
                r: rng.gen_range(1.0..3.0),
            };
            let values: Vec<f64> = dirs
                .iter()
                .map(|w| {
                    let (du, d2u) = jet.cartesian(w);
                    self.evaluate(&du, &d2u)
                })
                .collect();
            let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if values.iter().any(|v| (v - values[0]).abs() > 1e-12 * scale) {
                return false;
            }
        }
        true
    }
}

/// Derivatives of a spherically symmetric field `u(t, r)` at radius `r`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RadialJet {
    pub u_t: f64,
    pub u_r: f64,
    pub u_tt: f64,
    pub u_tr: f64,
    pub u_rr: f64,
    pub r: f64,
}

impl RadialJet {
    /// Cartesian gradient and Hessian at the point `r * omega`.
    pub fn cartesian(&self, omega: &Vec3) -> (Vec4, Mat4) {
        let du = [self.u_t, omega[0] * self.u_r, omega[1] * self.u_r, omega[2] * self.u_r];
        let mut d2u = [[0.0; 4]; 4];
        d2u[0][0] = self.u_tt;
        let tangential = self.u_r / self.r;
        for i in 0..3 {
            d2u[0][i + 1] = omega[i] * self.u_tr;
            d2u[i + 1][0] = d2u[0][i + 1];
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                d2u[i + 1][j + 1] =
                    omega[i] * omega[j] * self.u_rr + (delta - omega[i] * omega[j]) * tangential;
            }
        }
        (du, d2u)
    }

    /// Jet along the `x_1` axis, the ray used by the radial solver.
    pub fn on_axis(&self) -> (Vec4, Mat4) {
        self.cartesian(&[1.0, 0.0, 0.0])
    }
}

/// Linear-plus-quadratic polynomial in `(u_t, u_r)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Poly2 {
    l0: f64,
    l1: f64,
    m00: f64,
    m01: f64,
    m11: f64,
}

impl Poly2 {
    fn fit<F: Fn(f64, f64) -> f64>(f: F) -> Self {
        let (p0, n0, p1, n1, pp) = (f(1.0, 0.0), f(-1.0, 0.0), f(0.0, 1.0), f(0.0, -1.0), f(1.0, 1.0));
        let l0 = 0.5 * (p0 - n0);
        let m00 = 0.5 * (p0 + n0);
        let l1 = 0.5 * (p1 - n1);
        let m11 = 0.5 * (p1 + n1);
        Poly2 { l0, l1, m00, m11, m01: pp - l0 - l1 - m00 - m11 }
    }

    #[inline]
    fn eval(&self, a: f64, b: f64) -> f64 {
        a * (self.l0 + self.m00 * a + self.m01 * b) + b * (self.l1 + self.m11 * b)
    }
}

/// `N` restricted to spherically symmetric fields, reduced to a handful of
/// polynomial coefficients so the radial solver can evaluate it cheaply.
///
/// Only meaningful for isotropic specs (see [`NullFormSpec::is_isotropic`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNonlinearity {
    semi: Poly2,
    tt: Poly2,
    tr: Poly2,
    rr: Poly2,
    ang: Poly2,
    zero: bool,
}

impl RadialNonlinearity {
    pub fn new(spec: &NullFormSpec) -> Self {
        let q = |a: f64, b: f64| spec.q_matrix(&[a, b, 0.0, 0.0]);
        RadialNonlinearity {
            semi: Poly2::fit(|a, b| spec.semilinear_form(&[a, b, 0.0, 0.0], &[a, b, 0.0, 0.0])),
            tt: Poly2::fit(|a, b| q(a, b)[0][0]),
            tr: Poly2::fit(|a, b| q(a, b)[0][1] + q(a, b)[1][0]),
            rr: Poly2::fit(|a, b| q(a, b)[1][1]),
            ang: Poly2::fit(|a, b| q(a, b)[2][2] + q(a, b)[3][3]),
            zero: spec.is_zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Coefficient `Q^{00}` of `u_tt`.
    #[inline]
    pub fn time_coefficient(&self, u_t: f64, u_r: f64) -> f64 {
        self.tt.eval(u_t, u_r)
    }

    /// Everything in `N` except the `Q^{00} u_tt` term.
    #[inline]
    pub fn remainder(&self, jet: &RadialJet) -> f64 {
        let (a, b) = (jet.u_t, jet.u_r);
        self.semi.eval(a, b)
            + self.tr.eval(a, b) * jet.u_tr
            + self.rr.eval(a, b) * jet.u_rr
            + self.ang.eval(a, b) * jet.u_r / jet.r
    }

    #[inline]
    pub fn eval(&self, jet: &RadialJet) -> f64 {
        self.remainder(jet) + self.time_coefficient(jet.u_t, jet.u_r) * jet.u_tt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    NullCone { omega: Vec4, residual: f64 },
    Tangent { point: Vec3, normal: Vec3, p: Vec4, q: Vec4, residual: f64 },
}

impl Witness {
    pub fn residual(&self) -> f64 {
        match self {
            Witness::NullCone { residual, .. } | Witness::Tangent { residual, .. } => *residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVerdict {
    pub holds: bool,
    pub max_residual: f64,
    pub samples: usize,
    /// Worst sample when the condition fails.
    pub witness: Option<Witness>,
}

fn sample_directions(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let mut dirs = Vec::with_capacity(n.max(26));
    for a in -1i32..=1 {
        for b in -1i32..=1 {
            for c in -1i32..=1 {
                if (a, b, c) != (0, 0, 0) {
                    dirs.push(crate::linalg::normalize3(&[a as f64, b as f64, c as f64]));
                }
            }
        }
    }
    while dirs.len() < n {
        dirs.push(random_unit(rng));
    }
    dirs
}

pub(crate) fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Samples the null symbols at `omega = (+-1, w)` for `n_samples` unit
/// vectors `w` (26 fixed lattice directions, the rest seeded random).
pub fn check_null(spec: &NullFormSpec, tol: f64, n_samples: usize) -> ConditionVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    let mut worst: Option<Witness> = None;
    let mut max_residual: f64 = 0.0;
    let dirs = sample_directions(n_samples, &mut rng);
    for w in &dirs {
        for sign in [1.0, -1.0] {
            let omega = [sign, w[0], w[1], w[2]];
            let (s, q, c) = spec.symbols(&omega);
            let residual = s.abs().max(q.abs()).max(c.abs());
            if residual > max_residual || worst.is_none() {
                max_residual = max_residual.max(residual);
                worst = Some(Witness::NullCone { omega, residual });
            }
        }
    }
    let holds = max_residual <= tol;
    ConditionVerdict {
        holds,
        max_residual,
        samples: dirs.len() * 2,
        witness: if holds { None } else { worst },
    }
}

/// Closed-form null test for the semilinear part alone:
/// `S^{0i} = 0` and `S^{ij} = -S^{00} delta_ij`.
pub fn null_semilinear_algebraic(spec: &NullFormSpec, tol: f64) -> bool {
    let s = spec.semilinear();
    (1..4).all(|i| s[0][i].abs() <= tol)
        && (1..4).all(|i| {
            (1..4).all(|j| {
                let target = if i == j { -s[0][0] } else { 0.0 };
                (s[i][j] - target).abs() <= tol
            })
        })
}

/// Evaluates `Q^{ab}(p) nu^a q_b` at surface points with tangential `p`, `q`
/// (the first-jet form of `d_nu v = d_nu w = 0`).
pub fn check_admissible(
    spec: &NullFormSpec,
    shape: &ObstacleShape,
    tol: f64,
    n_samples: usize,
) -> ConditionVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED ^ 0xad);
    let mut worst: Option<Witness> = None;
    let mut max_residual: f64 = 0.0;
    let points = fibonacci_sphere(n_samples.max(1));
    for omega in &points {
        let b = shape.b_unchecked(omega);
        let point = scale3(omega, b);
        let normal = match shape.outward_normal(omega) {
            Ok(n) => n,
            Err(_) => continue,
        };
        let tangential = |rng: &mut ChaCha8Rng| -> Vec4 {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let t = sub3(&v, &scale3(&normal, dot3(&v, &normal)));
            [rng.gen_range(-1.0..1.0), t[0], t[1], t[2]]
        };
        let p = tangential(&mut rng);
        let q = tangential(&mut rng);
        let qm = spec.q_matrix(&p);
        let nu4 = [0.0, normal[0], normal[1], normal[2]];
        let mut value = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                value += qm[a][b] * nu4[a] * q[b];
            }
        }
        let residual = value.abs();
        if residual > max_residual || worst.is_none() {
            max_residual = max_residual.max(residual);
            worst = Some(Witness::Tangent { point, normal, p, q, residual });
        }
    }
    let holds = max_residual <= tol;
    ConditionVerdict {
        holds,
        max_residual,
        samples: points.len(),
        witness: if holds { None } else { worst },
    }
}
