//! Per-run diagnostic time series.

use alloc::string::String;
use alloc::vec::Vec;

use crate::diagnostics::measures::DecayFit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowupReason {
    NonFinite,
    /// `sup |du|` passed the configured multiple of its initial value.
    Amplification,
    /// The per-step fixed point stopped contracting: the nonlinear time scale
    /// dropped to the time step.
    UnresolvedGrowth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupEvent {
    pub t: f64,
    pub reason: BlowupReason,
    pub sup_du: f64,
}

/// One sample of the scalar diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// `int e0(du) dx` with `h = -Q(du)`.
    pub e00: f64,
    /// `||du||^2`.
    pub grad_norm2: f64,
    /// Largest `sum |h^{ab}|` over the grid.
    pub h_max: f64,
    pub kss_lhs: f64,
    pub kss_rhs: f64,
    /// `||du||_{L^2(|x| <= 5)}`.
    pub local_energy: f64,
    pub envelope: f64,
    pub sup_u: f64,
    pub sup_du: f64,
    pub blowup: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyRow {
    pub t: f64,
    pub entries: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticsRow>,
    pub hierarchy: Vec<HierarchyRow>,
    pub initial_sup_du: f64,
    /// Largest `sup |du|` over every step, not only the sampled ones.
    pub max_sup_du: f64,
    pub blowup: Option<BlowupEvent>,
    pub steps: usize,
    pub dt: f64,
    pub max_picard_iterations: usize,
    pub decay_fit: Option<DecayFit>,
}

impl DiagnosticsReport {
    /// `max_t sup |du| / sup |du|(0)`, `None` for zero data.
    pub fn amplification(&self) -> Option<f64> {
        (self.initial_sup_du > 0.0).then(|| self.max_sup_du / self.initial_sup_du)
    }

    pub fn max_envelope(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.envelope))
    }

    pub fn last(&self) -> Option<&DiagnosticsRow> {
        self.rows.last()
    }

    /// Relative drift `max |E(t) - E(0)| / E(0)` of the base energy.
    pub fn energy_drift(&self) -> Option<f64> {
        let e0 = self.rows.first()?.e00;
        if !(e0 > 0.0) {
            return None;
        }
        Some(self.rows.iter().fold(0.0, |m: f64, r| m.max((r.e00 - e0).abs() / e0)))
    }
}
