//! Measured functionals of a run: energies and the vector-field hierarchy,
//! weighted space-time norms, decay fits, the Hardy ratio and the null-form
//! bound constant.

pub mod energy;
pub mod fields;
pub mod measures;
pub mod report;

pub use energy::{energy_form_e0, h_matrix, radial_e00};
pub use fields::{apply_field, EnergyHierarchy, VectorFieldOp, ZField};
pub use measures::{
    decay_envelope, hardy_check, kss_density, local_energy, local_energy_decay_fit, null_bound_check, DecayFit,
    KssAccumulator, NullBound, RadialProfile,
};
pub use report::{BlowupEvent, BlowupReason, DiagnosticsReport, DiagnosticsRow, HierarchyRow};
