//! Null against non-null nonlinearity on identical data.

use nullwave_core::diagnostics::BlowupEvent;
use nullwave_core::geometry::ObstacleShape;
use nullwave_core::initial::{DataDescription, DataKind};
use nullwave_core::nullform::NullFormSpec;
use nullwave_core::solver::run::{run_radial, RadialProblem, RunSettings};
use nullwave_core::solver::SolverSettings;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::parallel::parallel_map;

/// Largest amplitude accepted by [`compare_null_vs_nonnull`].
pub const MAX_EPSILON: f64 = 0.2;

/// Data and resolution shared by both runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastSetup {
    pub ball: f64,
    /// `epsilon` is overridden per call.
    pub data: DataDescription,
    pub dr: f64,
}

impl Default for ContrastSetup {
    /// An outgoing pulse of unscaled height 3 on `[2, 4]`: large enough for the
    /// quadratic term to act before the pulse disperses.
    fn default() -> Self {
        ContrastSetup {
            ball: 0.875,
            data: DataDescription { kind: DataKind::Outgoing, center: 3.0, width: 1.0, u0_amp: 3.0, u1_amp: 0.0, epsilon: 0.0 },
            dr: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastRun {
    /// `max_t sup |du| / sup |du|(0)` up to the end of the run.
    pub amplification: Option<f64>,
    pub blowup_time: Option<f64>,
    pub blowup_reason: Option<String>,
    pub error: Option<String>,
}

impl ContrastRun {
    pub fn blew_up(&self) -> bool {
        self.blowup_time.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub epsilon: f64,
    pub t_final: f64,
    pub null: ContrastRun,
    pub nonnull: ContrastRun,
    /// Non-null over null amplification.
    pub ratio: Option<f64>,
    /// Zero data: both runs vanish and no ratio exists.
    pub degenerate: bool,
}

fn contrast_run(spec: NullFormSpec, epsilon: f64, t_final: f64, setup: &ContrastSetup) -> Result<ContrastRun> {
    let shape = ObstacleShape::ball(setup.ball)?;
    let data = DataDescription { epsilon, ..setup.data };
    let problem = RadialProblem::from_description(&shape, spec, &data, setup.dr, None, SolverSettings::default(), t_final)?;
    let settings = RunSettings { order_cap: 0, sample_every: 1.0, ..Default::default() };
    Ok(match run_radial(&problem, &settings, None) {
        Ok(out) => {
            let report = out.report;
            let blowup: Option<BlowupEvent> = report.blowup;
            ContrastRun {
                amplification: report.amplification(),
                blowup_time: blowup.map(|b| b.t),
                blowup_reason: blowup.map(|b| format!("{:?}", b.reason)),
                error: None,
            }
        }
        Err(e @ nullwave_core::Error::Config { .. }) => return Err(e.into()),
        Err(e) => ContrastRun { amplification: None, blowup_time: None, blowup_reason: None, error: Some(e.to_string()) },
    })
}

/// Runs the null `Q0` and the non-null `(d_t u)^2` scenario on the default
/// [`ContrastSetup`].
pub fn compare_null_vs_nonnull(epsilon: f64, t_final: f64) -> Result<ContrastReport> {
    compare_with(epsilon, t_final, &ContrastSetup::default())
}

/// Fails with a numerical error only when both runs fail.
pub fn compare_with(epsilon: f64, t_final: f64, setup: &ContrastSetup) -> Result<ContrastReport> {
    if !(0.0..=MAX_EPSILON).contains(&epsilon) {
        return Err(CliError::config("epsilon", format!("must lie in (0, {MAX_EPSILON}], got {epsilon}")));
    }
    let specs = [NullFormSpec::null_q0(), NullFormSpec::nonnull_dt2()];
    let mut runs = parallel_map(&specs, |spec| contrast_run(spec.clone(), epsilon, t_final, setup))?.into_iter();
    let null = runs.next().expect("two runs")?;
    let nonnull = runs.next().expect("two runs")?;
    if let (Some(a), Some(_)) = (&null.error, &nonnull.error) {
        return Err(CliError::Numerical(nullwave_core::Error::Degenerate(format!("both contrast runs failed: {a}"))));
    }
    let degenerate = epsilon == 0.0;
    let ratio = match (degenerate, null.amplification, nonnull.amplification) {
        (false, Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    Ok(ContrastReport { epsilon, t_final, null, nonnull, ratio, degenerate })
}
