//! Commuting vector fields applied to discrete solutions, and the energy
//! hierarchy built from them.
//!
//! A field is stored as a polynomial in `omega = x / |x|` whose coefficients
//! are radial functions sampled on the grid, one copy per time level. This
//! closes under every operator used here:
//!
//! - `d_j (f omega^a) = f_r omega_j omega^a + (f / r)(a_j omega^{a - e_j} - |a| omega_j omega^a)`
//! - `Omega_ij omega^a = a_j omega^{a - e_j + e_i} - a_i omega^{a - e_i + e_j}`, `Omega_ij f = 0`
//! - `L (f omega^a) = (t f_t + r f_r) omega^a`, and the modified scaling uses
//!   `cutoff(r) r f_r` in place of `r f_r`.
//!
//! Time derivatives are centered differences across levels, so each one
//! costs a level on both sides.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::energy::{energy_form_e0, h_matrix};
use crate::error::{Error, Result};
use crate::geometry::CutoffProfile;
use crate::grid::RadialGrid;
use crate::nullform::NullFormSpec;
use crate::quadrature::sphere_rule;

/// Relative size below which grid nodes are left out of the hierarchy.
pub const ACTIVE_CUTOFF: f64 = 1e-20;
const ACTIVE_PAD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VectorFieldOp {
    /// `d_alpha`, with `0` the time direction.
    Translation(u8),
    /// `x_i d_j - x_j d_i`, spatial indices `1..=3`.
    Rotation(u8, u8),
    /// `t d_t + x . grad`.
    Scaling,
    /// `t d_t + cutoff(|x|) x . grad`.
    ModifiedScaling,
}

impl VectorFieldOp {
    /// The family `Z = {d_alpha, Omega_ij}`.
    pub const Z: [VectorFieldOp; 7] = [
        VectorFieldOp::Translation(0),
        VectorFieldOp::Translation(1),
        VectorFieldOp::Translation(2),
        VectorFieldOp::Translation(3),
        VectorFieldOp::Rotation(1, 2),
        VectorFieldOp::Rotation(1, 3),
        VectorFieldOp::Rotation(2, 3),
    ];

    /// Time levels consumed on each side.
    pub fn time_cost(&self) -> usize {
        match self {
            VectorFieldOp::Translation(0) | VectorFieldOp::Scaling | VectorFieldOp::ModifiedScaling => 1,
            _ => 0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            VectorFieldOp::Translation(a) => format!("d{a}"),
            VectorFieldOp::Rotation(i, j) => format!("O{i}{j}"),
            VectorFieldOp::Scaling => "L".into(),
            VectorFieldOp::ModifiedScaling => "Lmod".into(),
        }
    }
}

type Monomial = [u8; 3];

fn monomial_value(a: &Monomial, w: &[f64; 3]) -> f64 {
    let mut v = 1.0;
    for k in 0..3 {
        for _ in 0..a[k] {
            v *= w[k];
        }
    }
    v
}

/// A discrete field `sum_a c_a(t, r) omega^a` on a window of grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ZField {
    lo: usize,
    len: usize,
    times: Vec<f64>,
    dt: f64,
    terms: BTreeMap<Monomial, Vec<Vec<f64>>>,
}

impl ZField {
    /// Radial field from consecutive time levels (oldest first, odd count,
    /// `t_center` the time of the middle one). Only nodes where some level is
    /// above `ACTIVE_CUTOFF` times the maximum, plus a margin, are kept.
    pub fn from_levels(grid: &RadialGrid, levels: &[&[f64]], t_center: f64, dt: f64) -> Result<Self> {
        if levels.is_empty() || levels.len().is_multiple_of(2) {
            return Err(Error::Staging { needed: levels.len() | 1, available: levels.len() });
        }
        let n = grid.len();
        let peak = levels.iter().flat_map(|l| l.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let active = |j: usize| levels.iter().any(|l| l[j].abs() > ACTIVE_CUTOFF * peak);
        let (lo, hi) = match ((0..n).find(|&j| active(j)), (0..n).rev().find(|&j| active(j))) {
            (Some(a), Some(b)) if peak > 0.0 => (a.saturating_sub(ACTIVE_PAD), (b + ACTIVE_PAD).min(n - 1)),
            _ => (0, 0),
        };
        let depth = levels.len() / 2;
        let times = (0..levels.len()).map(|k| t_center + (k as f64 - depth as f64) * dt).collect();
        let mut terms = BTreeMap::new();
        if peak > 0.0 {
            terms.insert([0, 0, 0], levels.iter().map(|l| l[lo..=hi].to_vec()).collect());
        }
        Ok(ZField { lo, len: hi - lo + 1, times, dt, terms })
    }

    /// Levels available on each side of the center.
    pub fn depth(&self) -> usize {
        self.times.len() / 2
    }

    pub fn t_center(&self) -> f64 {
        self.times[self.depth()]
    }

    /// Global index of the first stored node.
    pub fn offset(&self) -> usize {
        self.lo
    }

    pub fn window_len(&self) -> usize {
        self.len
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    /// Coefficient of `omega^a` at the center level, if present.
    pub fn center_coefficient(&self, a: &Monomial) -> Option<&[f64]> {
        self.terms.get(a).map(|levels| levels[self.depth()].as_slice())
    }

    /// Value at the center level at grid node `j` in direction `omega`.
    pub fn value(&self, j: usize, omega: &[f64; 3]) -> f64 {
        if j < self.lo || j >= self.lo + self.len {
            return 0.0;
        }
        let d = self.depth();
        self.terms.iter().map(|(a, c)| c[d][j - self.lo] * monomial_value(a, omega)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().flat_map(|l| l.iter().flatten()).fold(0.0, |m, v| m.max(v.abs()))
    }

    fn r(&self, grid: &RadialGrid, i: usize) -> f64 {
        grid.r(self.lo + i)
    }

    fn d_r(&self, grid: &RadialGrid, f: &[f64], i: usize) -> f64 {
        let h = grid.dr();
        let n = f.len();
        if n < 3 {
            return 0.0;
        }
        if i == 0 {
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h)
        } else {
            (f[i + 1] - f[i - 1]) / (2.0 * h)
        }
    }

    fn with_terms(&self, times: Vec<f64>, terms: BTreeMap<Monomial, Vec<Vec<f64>>>) -> ZField {
        let terms = terms.into_iter().filter(|(_, c)| c.iter().flatten().any(|v| *v != 0.0)).collect();
        ZField { lo: self.lo, len: self.len, times, dt: self.dt, terms }
    }

    fn add_into(map: &mut BTreeMap<Monomial, Vec<Vec<f64>>>, a: Monomial, level: usize, levels: usize, i: usize, len: usize, v: f64) {
        let entry = map.entry(a).or_insert_with(|| vec![vec![0.0; len]; levels]);
        entry[level][i] += v;
    }

    pub fn apply(&self, op: VectorFieldOp, grid: &RadialGrid) -> Result<ZField> {
        let d = self.depth();
        if op.time_cost() > d {
            return Err(Error::Staging { needed: 2 * op.time_cost() + 1, available: self.times.len() });
        }
        let levels = self.times.len();
        let len = self.len;
        let mut out: BTreeMap<Monomial, Vec<Vec<f64>>> = BTreeMap::new();
        match op {
            VectorFieldOp::Translation(0) => {
                let times = self.times[1..levels - 1].to_vec();
                for (a, c) in &self.terms {
                    let new: Vec<Vec<f64>> = (0..levels - 2)
                        .map(|k| (0..len).map(|i| (c[k + 2][i] - c[k][i]) / (2.0 * self.dt)).collect())
                        .collect();
                    out.insert(*a, new);
                }
                Ok(self.with_terms(times, out))
            }
            VectorFieldOp::Translation(j) => {
                if !(1..=3).contains(&j) {
                    return Err(Error::Domain(format!("translation index {j} outside 0..=3")));
                }
                let j = (j - 1) as usize;
                for (a, c) in &self.terms {
                    let deg: u8 = a.iter().sum();
                    let mut up = *a;
                    up[j] += 1;
                    for (k, f) in c.iter().enumerate() {
                        for i in 0..len {
                            let r = self.r(grid, i);
                            let fr = self.d_r(grid, f, i);
                            Self::add_into(&mut out, up, k, levels, i, len, fr - deg as f64 * f[i] / r);
                            if a[j] > 0 {
                                let mut down = *a;
                                down[j] -= 1;
                                Self::add_into(&mut out, down, k, levels, i, len, a[j] as f64 * f[i] / r);
                            }
                        }
                    }
                }
                Ok(self.with_terms(self.times.clone(), out))
            }
            VectorFieldOp::Rotation(p, q) => {
                if !(1..=3).contains(&p) || !(1..=3).contains(&q) || p == q {
                    return Err(Error::Domain(format!("rotation indices ({p}, {q}) invalid")));
                }
                let (ii, jj) = ((p - 1) as usize, (q - 1) as usize);
                for (a, c) in &self.terms {
                    // a_j omega^{a - e_j + e_i} - a_i omega^{a - e_i + e_j}
                    for (src, dst, sign) in [(jj, ii, 1.0), (ii, jj, -1.0)] {
                        if a[src] == 0 {
                            continue;
                        }
                        let mut b = *a;
                        b[src] -= 1;
                        b[dst] += 1;
                        let w = sign * a[src] as f64;
                        for (k, f) in c.iter().enumerate() {
                            for i in 0..len {
                                Self::add_into(&mut out, b, k, levels, i, len, w * f[i]);
                            }
                        }
                    }
                }
                Ok(self.with_terms(self.times.clone(), out))
            }
            VectorFieldOp::Scaling | VectorFieldOp::ModifiedScaling => {
                let cutoff = CutoffProfile;
                let times = self.times[1..levels - 1].to_vec();
                for (a, c) in &self.terms {
                    let new: Vec<Vec<f64>> = (0..levels - 2)
                        .map(|k| {
                            let t = self.times[k + 1];
                            (0..len)
                                .map(|i| {
                                    let r = self.r(grid, i);
                                    let weight = if op == VectorFieldOp::Scaling { 1.0 } else { cutoff.value(r) };
                                    let ft = (c[k + 2][i] - c[k][i]) / (2.0 * self.dt);
                                    t * ft + weight * r * self.d_r(grid, &c[k + 1], i)
                                })
                                .collect()
                        })
                        .collect();
                    out.insert(*a, new);
                }
                Ok(self.with_terms(times, out))
            }
        }
    }

    /// Applies `ops` right to left, so `ops = [A, B]` yields `A B u`.
    pub fn apply_all(&self, ops: &[VectorFieldOp], grid: &RadialGrid) -> Result<ZField> {
        let mut f = self.clone();
        for op in ops.iter().rev() {
            f = f.apply(*op, grid)?;
        }
        Ok(f)
    }
}

/// `op u` for a radial solution given by consecutive time levels.
pub fn apply_field(op: VectorFieldOp, history: &[&[f64]], grid: &RadialGrid, t_center: f64, dt: f64) -> Result<ZField> {
    ZField::from_levels(grid, history, t_center, dt)?.apply(op, grid)
}

/// Integrals of `e0` over the sampled vector-field derivatives of a radial
/// solution, combined into `Emod_{mu,nu} = sum_{i<=mu, j<=nu} int e0(Lmod^i d_t^j u)`
/// and `E_{mu,nu} = sum_{i<=mu, |alpha|<=nu} int e0(L^i Z^alpha u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyHierarchy {
    pub t: f64,
    pub order_cap: usize,
    /// `(name, value)` with names `Emod_mu_nu` and `E_mu_nu`, `mu + nu <= cap`.
    pub entries: Vec<(String, f64)>,
}

impl EnergyHierarchy {
    /// Levels needed for a given order cap.
    pub fn levels_needed(order_cap: usize) -> usize {
        2 * (order_cap + 1) + 1
    }

    pub fn compute(
        grid: &RadialGrid,
        spec: &NullFormSpec,
        levels: &[&[f64]],
        t_center: f64,
        dt: f64,
        order_cap: usize,
    ) -> Result<Self> {
        let needed = Self::levels_needed(order_cap);
        if levels.len() < needed {
            return Err(Error::Staging { needed, available: levels.len() });
        }
        let skip = (levels.len() - needed) / 2;
        let levels = &levels[skip..skip + needed];
        let base = ZField::from_levels(grid, levels, t_center, dt)?;
        let (dirs, weights) = sphere_rule(6, 12);
        let d = base.depth();
        // Solution gradient at the center level, for h.
        let mid = levels[d];
        let quasilinear = !spec.is_semilinear();

        let integral = |w: &ZField| -> Result<f64> {
            if w.is_zero() {
                return Ok(0.0);
            }
            let g0 = w.apply(VectorFieldOp::Translation(0), grid)?;
            let gs = [
                w.apply(VectorFieldOp::Translation(1), grid)?,
                w.apply(VectorFieldOp::Translation(2), grid)?,
                w.apply(VectorFieldOp::Translation(3), grid)?,
            ];
            let lo = w.offset();
            let mut acc = 0.0;
            for i in 0..w.window_len() {
                let j = lo + i;
                let r = grid.r(j);
                let end = if j == 0 || j + 1 == grid.len() { 0.5 } else { 1.0 };
                let u_t = (levels[d + 1][j] - levels[d - 1][j]) / (2.0 * dt);
                let u_r = grid.d_r(mid, j);
                let mut shell = 0.0;
                for (omega, wq) in dirs.iter().zip(&weights) {
                    let dw = [g0.value(j, omega), gs[0].value(j, omega), gs[1].value(j, omega), gs[2].value(j, omega)];
                    let e = if quasilinear {
                        let du = [u_t, omega[0] * u_r, omega[1] * u_r, omega[2] * u_r];
                        energy_form_e0(&dw, &h_matrix(spec, &du))
                    } else {
                        dw.iter().map(|v| v * v).sum()
                    };
                    shell += wq * e;
                }
                acc += end * r * r * shell;
            }
            Ok(acc * grid.dr())
        };

        let mut cache: BTreeMap<Vec<VectorFieldOp>, f64> = BTreeMap::new();
        let mut value = |ops: Vec<VectorFieldOp>| -> Result<f64> {
            if let Some(v) = cache.get(&ops) {
                return Ok(*v);
            }
            let v = integral(&base.apply_all(&ops, grid)?)?;
            cache.insert(ops, v);
            Ok(v)
        };

        let multisets = z_multisets(order_cap);
        let mut entries = Vec::new();
        for mu in 0..=order_cap {
            for nu in 0..=order_cap - mu {
                let mut modified = 0.0;
                for i in 0..=mu {
                    for j in 0..=nu {
                        let mut ops = vec![VectorFieldOp::ModifiedScaling; i];
                        ops.extend(core::iter::repeat_n(VectorFieldOp::Translation(0), j));
                        modified += value(ops)?;
                    }
                }
                entries.push((format!("Emod_{mu}_{nu}"), modified));
                let mut full = 0.0;
                for i in 0..=mu {
                    for alpha in multisets.iter().filter(|m| m.len() <= nu) {
                        let mut ops = vec![VectorFieldOp::Scaling; i];
                        ops.extend(alpha.iter().copied());
                        full += value(ops)?;
                    }
                }
                entries.push((format!("E_{mu}_{nu}"), full));
            }
        }
        Ok(EnergyHierarchy { t: t_center, order_cap, entries })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// All multisets of `Z` of size at most `order`, each in a fixed order.
fn z_multisets(order: usize) -> Vec<Vec<VectorFieldOp>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(usize, Vec<VectorFieldOp>)> = vec![(0, Vec::new())];
    for _ in 0..order {
        let mut next = Vec::new();
        for (start, m) in &frontier {
            for k in *start..VectorFieldOp::Z.len() {
                let mut m2 = m.clone();
                m2.push(VectorFieldOp::Z[k]);
                out.push(m2.clone());
                next.push((k, m2));
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::bump_jet;

    fn radial_levels(grid: &RadialGrid, f: impl Fn(f64, f64) -> f64, t0: f64, dt: f64, n: usize) -> Vec<Vec<f64>> {
        let d = n / 2;
        (0..n).map(|k| grid.radii().iter().map(|&r| f(t0 + (k as f64 - d as f64) * dt, r)).collect()).collect()
    }

    fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
        v.iter().map(|l| l.as_slice()).collect()
    }

    #[test]
    fn rotations_annihilate_radial_fields() {
        let g = RadialGrid::new(0.875, 8.0, 0.01).unwrap();
        let lv = radial_levels(&g, |t, r| bump_jet((r - 3.0 - t) / 1.5).0, 1.0, 0.005, 3);
        for op in [VectorFieldOp::Rotation(1, 2), VectorFieldOp::Rotation(1, 3), VectorFieldOp::Rotation(2, 3)] {
            let f = apply_field(op, &refs(&lv), &g, 1.0, 0.005).unwrap();
            assert!(f.is_zero() && f.max_abs() <= 1e-12);
        }
    }

    #[test]
    fn scaling_of_time_is_time() {
        let g = RadialGrid::new(1.0, 3.0, 0.01).unwrap();
        let lv = radial_levels(&g, |t, _| t, 2.0, 0.01, 3);
        let f = apply_field(VectorFieldOp::Scaling, &refs(&lv), &g, 2.0, 0.01).unwrap();
        let c = f.center_coefficient(&[0, 0, 0]).unwrap();
        assert!(c.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn modified_scaling_agrees_away_from_obstacle() {
        let g = RadialGrid::new(0.875, 8.0, 0.01).unwrap();
        let lv = radial_levels(&g, |t, r| bump_jet((r - 4.0 - t) / 1.5).0, 0.5, 0.005, 3);
        let a = apply_field(VectorFieldOp::Scaling, &refs(&lv), &g, 0.5, 0.005).unwrap();
        let b = apply_field(VectorFieldOp::ModifiedScaling, &refs(&lv), &g, 0.5, 0.005).unwrap();
        let (ca, cb) = (a.center_coefficient(&[0, 0, 0]).unwrap(), b.center_coefficient(&[0, 0, 0]).unwrap());
        assert!(ca.iter().zip(cb).all(|(x, y)| (x - y).abs() <= 1e-12));
        // Near the obstacle the two differ.
        let lv = radial_levels(&g, |_, r| (-(r - 0.875) * (r - 0.875)).exp() * r, 0.5, 0.005, 3);
        let a = apply_field(VectorFieldOp::Scaling, &refs(&lv), &g, 0.5, 0.005).unwrap();
        let b = apply_field(VectorFieldOp::ModifiedScaling, &refs(&lv), &g, 0.5, 0.005).unwrap();
        assert!(a.value(5, &[1.0, 0.0, 0.0]) != b.value(5, &[1.0, 0.0, 0.0]));
    }

    #[test]
    fn staging_error_without_history() {
        let g = RadialGrid::new(1.0, 3.0, 0.01).unwrap();
        let lv = radial_levels(&g, |t, r| t * r, 0.0, 0.01, 1);
        assert!(matches!(
            apply_field(VectorFieldOp::Translation(0), &refs(&lv), &g, 0.0, 0.01),
            Err(Error::Staging { .. })
        ));
        assert!(apply_field(VectorFieldOp::Translation(2), &refs(&lv), &g, 0.0, 0.01).is_ok());
    }

    #[test]
    fn translations_are_second_order_and_compose_to_laplacian() {
        let f = |r: f64| (-(r - 2.0) * (r - 2.0)).exp();
        let fr = |r: f64| -2.0 * (r - 2.0) * f(r);
        let frr = |r: f64| (4.0 * (r - 2.0) * (r - 2.0) - 2.0) * f(r);
        let omega = crate::linalg::normalize3(&[0.3, -0.4, 0.5]);
        let mut errs = Vec::new();
        let mut lap_errs = Vec::new();
        for &h in &[0.02, 0.01] {
            let g = RadialGrid::new(0.875, 7.0, h).unwrap();
            let lv = radial_levels(&g, |_, r| f(r), 0.0, h, 1);
            let base = ZField::from_levels(&g, &refs(&lv), 0.0, h).unwrap();
            let d2 = base.apply(VectorFieldOp::Translation(2), &g).unwrap();
            let mut e: f64 = 0.0;
            let mut lap_e: f64 = 0.0;
            let lap = [1u8, 2, 3]
                .iter()
                .map(|&k| base.apply(VectorFieldOp::Translation(k), &g).unwrap().apply(VectorFieldOp::Translation(k), &g).unwrap())
                .collect::<Vec<_>>();
            for j in 0..g.len() {
                let r = g.r(j);
                e = e.max((d2.value(j, &omega) - omega[1] * fr(r)).abs());
                let l: f64 = lap.iter().map(|z| z.value(j, &omega)).sum();
                if j > 2 && j + 3 < g.len() {
                    lap_e = lap_e.max((l - frr(r) - 2.0 * fr(r) / r).abs());
                }
            }
            errs.push(e);
            lap_errs.push(lap_e);
        }
        let order = (errs[0] / errs[1]).log2();
        let lap_order = (lap_errs[0] / lap_errs[1]).log2();
        assert!((order - 2.0).abs() < 0.3, "{errs:?}");
        assert!((lap_order - 2.0).abs() < 0.3, "{lap_errs:?}");
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(z_multisets(0).len(), 1);
        assert_eq!(z_multisets(1).len(), 8);
        assert_eq!(z_multisets(2).len(), 36);
    }

    #[test]
    fn hierarchy_base_entry_matches_flat_energy() {
        let g = RadialGrid::new(0.875, 10.0, 0.01).unwrap();
        let dt = 0.005;
        let u = |t: f64, r: f64| bump_jet((r - 4.0 - t) / 1.0).0 / r;
        let lv = radial_levels(&g, u, 1.0, dt, 7);
        let hier = EnergyHierarchy::compute(&g, &NullFormSpec::zero(), &refs(&lv), 1.0, dt, 2).unwrap();
        // E_0_0 = int |du|^2 dx
        let mid = &lv[3];
        let ut: Vec<f64> = (0..g.len()).map(|j| (lv[4][j] - lv[2][j]) / (2.0 * dt)).collect();
        let ur = g.gradient(mid);
        let flat = g.weighted_sum(|j| ut[j] * ut[j] + ur[j] * ur[j]);
        let e00 = hier.get("E_0_0").unwrap();
        assert!((e00 - flat).abs() / flat < 1e-3, "{e00} {flat}");
        assert_eq!(hier.get("Emod_0_0"), Some(e00));
        assert_eq!(hier.entries.len(), 12);
        assert!(hier.entries.iter().all(|(_, v)| *v >= 0.0));
        // E_0_1 adds the three spatial translations and d_t: bigger than E_0_0.
        assert!(hier.get("E_0_1").unwrap() > e00);
    }
}
