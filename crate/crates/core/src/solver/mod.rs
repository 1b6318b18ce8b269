//! Time integration: the radial leapfrog solver with its run driver, the
//! flattened 3-D linear solver and the closed-form spherical oracle.

pub mod flat3d;
pub mod oracle;
pub mod radial;
pub mod run;

pub use flat3d::{run_3d_linear, Flat3dConfig, Flat3dGrid, Flat3dOutput, FlatOperator};
pub use oracle::{spherical_oracle, SphericalOracleProblem};
pub use radial::{FieldState, Forcing, OuterBoundary, RadialSolver, SolverSettings, StepStatus};
