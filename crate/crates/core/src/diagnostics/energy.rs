//! The energy form `e0` and its integral for radial fields.

#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::RadialGrid;
use crate::linalg::{Mat4, Vec4};
use crate::nullform::NullFormSpec;

/// `|du|^2 + 2 h^{0b} du_0 du_b - h^{ab} du_a du_b` (plain sums, index 0 is
/// time).
pub fn energy_form_e0(du: &Vec4, h: &Mat4) -> f64 {
    let mut flat = 0.0;
    let mut time_row = 0.0;
    let mut full = 0.0;
    for a in 0..4 {
        flat += du[a] * du[a];
        time_row += h[0][a] * du[a];
        for b in 0..4 {
            full += h[a][b] * du[a] * du[b];
        }
    }
    flat + 2.0 * du[0] * time_row - full
}

/// The perturbation `h^{ab} = -Q^{ab}(du)` of the wave metric.
pub fn h_matrix(spec: &NullFormSpec, du: &Vec4) -> Mat4 {
    let mut h = spec.q_matrix(du);
    for row in h.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    h
}

/// `sum |h^{ab}|`.
pub fn h_size(h: &Mat4) -> f64 {
    h.iter().flatten().map(|v| v.abs()).sum()
}

/// `int e0(du) dx` for a radial field with `h` taken from the same field, plus
/// the largest `sum |h^{ab}|` over the grid.
pub fn radial_e00(grid: &RadialGrid, spec: &NullFormSpec, ut: &[f64], ur: &[f64]) -> (f64, f64) {
    let quasilinear = !spec.is_semilinear();
    let mut h_max: f64 = 0.0;
    let e = grid.weighted_sum(|j| {
        let du = [ut[j], ur[j], 0.0, 0.0];
        if quasilinear {
            let h = h_matrix(spec, &du);
            h_max = h_max.max(h_size(&h));
            energy_form_e0(&du, &h)
        } else {
            du[0] * du[0] + du[1] * du[1]
        }
    });
    (e, h_max)
}
