//! Scalar measures of radial fields: KSS space-time norms, local energy and
//! its exponential fit, the decay envelope, the Hardy ratio and the null-form
//! bound constant.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::nullform::NullFormSpec;

/// `int |du|^2 / <x> dx` at one time.
pub fn kss_density(grid: &RadialGrid, ut: &[f64], ur: &[f64]) -> f64 {
    grid.weighted_sum(|j| {
        let r = grid.r(j);
        (ut[j] * ut[j] + ur[j] * ur[j]) / (1.0 + r * r).sqrt()
    })
}

/// Trapezoid-in-time accumulation of the two sides of the KSS estimate.
///
/// `lhs(T) = (ln(2 + T))^{-1/2} (int_0^T int |du|^2 / <x> dx dt)^{1/2}` and
/// `rhs(T) = int_0^T ||box u|| dt`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KssAccumulator {
    lhs_area: f64,
    rhs_area: f64,
    last_lhs: f64,
    last_rhs: f64,
    last_t: f64,
    samples: usize,
}

impl KssAccumulator {
    /// Adds the integrands at time `t`; samples must come in increasing time.
    pub fn push(&mut self, t: f64, density: f64, box_norm: f64) {
        if self.samples > 0 {
            let dt = t - self.last_t;
            self.lhs_area += 0.5 * dt * (density + self.last_lhs);
            self.rhs_area += 0.5 * dt * (box_norm + self.last_rhs);
        }
        self.last_lhs = density;
        self.last_rhs = box_norm;
        self.last_t = t;
        self.samples += 1;
    }

    pub fn time(&self) -> f64 {
        self.last_t
    }

    pub fn lhs(&self) -> f64 {
        (self.lhs_area / (2.0 + self.last_t).ln()).sqrt()
    }

    pub fn rhs(&self) -> f64 {
        self.rhs_area
    }

    /// `lhs / rhs`, or `None` while the forcing side is zero.
    pub fn ratio(&self) -> Option<f64> {
        (self.rhs_area > 0.0).then(|| self.lhs() / self.rhs())
    }
}

/// `||du||_{L^2(|x| <= radius)}`.
pub fn local_energy(grid: &RadialGrid, ut: &[f64], ur: &[f64], radius: f64) -> f64 {
    let last = grid.last_index_within(radius);
    let h = grid.dr();
    let mut acc = 0.0;
    for j in 0..=last {
        let end = if j == 0 || j == last { 0.5 } else { 1.0 };
        let r = grid.r(j);
        acc += end * r * r * (ut[j] * ut[j] + ur[j] * ur[j]);
    }
    (4.0 * core::f64::consts::PI * h * acc).sqrt()
}

/// `max (1 + t + r)(|u| + |du|)`.
pub fn decay_envelope(grid: &RadialGrid, t: f64, u: &[f64], ut: &[f64], ur: &[f64]) -> f64 {
    (0..grid.len()).fold(0.0, |m, j| {
        let du = (ut[j] * ut[j] + ur[j] * ur[j]).sqrt();
        m.max((1.0 + t + grid.r(j)) * (u[j].abs() + du))
    })
}

/// Least-squares fit `ln E(t) ~ a - c t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Time at which the series dropped below the floor, if it did.
    pub truncated_at: Option<f64>,
}

pub const LOCAL_ENERGY_FLOOR: f64 = 1e-14;

/// Fits the exponential decay rate of a local-energy series over
/// `[t_start, t_end]`, stopping at the first value below the floor.
pub fn local_energy_decay_fit(times: &[f64], values: &[f64], t_start: f64, t_end: f64) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut truncated_at = None;
    for (&t, &v) in times.iter().zip(values) {
        if t < t_start || t > t_end {
            continue;
        }
        if !(v >= LOCAL_ENERGY_FLOOR) {
            truncated_at = Some(t);
            break;
        }
        xs.push(t);
        ys.push(v.ln());
    }
    if xs.len() < 3 {
        return Err(Error::Degenerate(format!(
            "{} usable local-energy samples in [{t_start}, {t_end}]",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(DecayFit { rate: -slope, intercept: my - slope * mx, r_squared, points: xs.len(), truncated_at })
}

/// `||v / r|| / ||d_r v||`; bounded by 2 for fields vanishing at infinity.
pub fn hardy_check(grid: &RadialGrid, v: &[f64]) -> Result<f64> {
    let num = grid.weighted_sum(|j| (v[j] / grid.r(j)).powi(2)).sqrt();
    let den = grid.weighted_sum(|j| grid.d_r_one_sided(v, j).powi(2)).sqrt();
    if !(den > 0.0) {
        return Err(Error::Degenerate("field has zero gradient".into()));
    }
    Ok(num / den)
}

/// A radial field with its first derivatives at one time.
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile<'a> {
    pub u: &'a [f64],
    pub ut: &'a [f64],
    pub ur: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullBound {
    /// Largest measured ratio.
    pub constant: f64,
    /// Radius where it was attained.
    pub radius: f64,
    pub nodes: usize,
}

pub const NULL_BOUND_SKIP: f64 = 1e-14;

/// Measured constant in
/// `|S(dw, dv)| <x> <= C (|Gamma w| |dv| + |dw| |Gamma v|)` for radial fields,
/// where `Gamma` runs over translations, rotations and the scaling field.
/// Rotations vanish on radial fields, so `|Gamma w|^2 = w_t^2 + w_r^2 + (L w)^2`.
pub fn null_bound_check(
    spec: &NullFormSpec,
    grid: &RadialGrid,
    t: f64,
    w: RadialProfile<'_>,
    v: RadialProfile<'_>,
) -> Result<NullBound> {
    let mut best = NullBound { constant: 0.0, radius: grid.r_min(), nodes: 0 };
    for j in 0..grid.len() {
        let r = grid.r(j);
        let dw = [w.ut[j], w.ur[j], 0.0, 0.0];
        let dv = [v.ut[j], v.ur[j], 0.0, 0.0];
        let s = spec.semilinear_form(&dw, &dv);
        let gamma = |p: &RadialProfile<'_>| {
            let l = t * p.ut[j] + r * p.ur[j];
            (p.ut[j] * p.ut[j] + p.ur[j] * p.ur[j] + l * l).sqrt()
        };
        let grad = |p: &RadialProfile<'_>| (p.ut[j] * p.ut[j] + p.ur[j] * p.ur[j]).sqrt();
        let den = gamma(&w) * grad(&v) + grad(&w) * gamma(&v);
        if den < NULL_BOUND_SKIP {
            continue;
        }
        best.nodes += 1;
        let c = s.abs() * (1.0 + r * r).sqrt() / den;
        if c > best.constant {
            best.constant = c;
            best.radius = r;
        }
    }
    if best.nodes == 0 {
        return Err(Error::Degenerate("no node with a nonzero denominator".into()));
    }
    Ok(best)
}
