//! Measured, thresholded experiment suites over trajectories of the damped
//! KdV flow, their persistence, and an `X_{s,b}` diagnostic.
//!
//! Every suite returns a typed report together with a [`TrajectoryRecord`]
//! and can render a [`Summary`] whose verdicts compare measurements with the
//! configured [`Thresholds`]. Runs are deterministic given their inputs.

mod fit;
mod record;
mod suites;
mod trajectory;
mod xsb;

use serde::{Deserialize, Serialize};

pub use fit::{linear_fit, FitReport};
pub use record::{persist, ParamSummary, Summary, TrajectoryRecord, CSV_HEADER};
pub use suites::{
    decay_threshold, drift_ratios, run_absorbing_ball, run_decay, run_energy_identity, run_omega_limit,
    run_simulation, run_smoothing, run_split_consistency, run_xsb, smoothing_study, AbsorbingReport, DecayReport,
    DriftRow, EnergyIdentityReport, OmegaReport, SimulationReport, SmoothingReport, SmoothingStudy, SplitReport,
    XsbReport, BALL_FACTOR, ETA_STEPS, REPORTS, UNDERFLOW,
};
pub use trajectory::{evolve_full, evolve_split, run_members, Schedule};
pub use xsb::{xsb_norm_estimate, MIN_SNAPSHOTS};

/// Acceptance constants reported next to every measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Relative drift of `‖u‖_{L²}` allowed in an unforced undamped run.
    pub conservation_l2: f64,
    /// Relative drift of the Hamiltonian allowed in the same run.
    pub conservation_hamiltonian: f64,
    /// Allowed `max ‖(v+w) − u‖_{L²}` per unit time.
    pub split_defect_rate: f64,
    /// Allowed relative spread of tail sups across initial radii.
    pub tail_agreement: f64,
    /// Minimum `r²` of the entry-time vs log-radius fit.
    pub entry_fit_r2: f64,
    /// Tail sup required of an unforced run once `γT` reaches `control_gamma_t`.
    pub control_floor: f64,
    pub control_gamma_t: f64,
    /// Required decay slope `≤ −c·γ`.
    pub decay_rate_factor: f64,
    /// Required `‖w(T)‖/‖w(0)‖` once `γT` reaches `decay_gamma_t`.
    pub decay_ratio: f64,
    pub decay_gamma_t: f64,
    /// Allowed relative variation of the smoothing tail sup across radii.
    pub smoothing_radius_variation: f64,
    /// Allowed relative change of the smoothing tail sup under `K → 2K`.
    pub smoothing_refinement: f64,
    /// Minimum observed order of the energy-identity residual.
    pub energy_order: f64,
    /// Allowed late-time distance as a fraction of the absorbing radius.
    pub attractor_thickness: f64,
    /// Minimum `r²` of the equicontinuity fit in `η`.
    pub equicontinuity_r2: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            conservation_l2: 1e-8,
            conservation_hamiltonian: 1e-6,
            split_defect_rate: 1e-9,
            tail_agreement: 0.10,
            entry_fit_r2: 0.9,
            control_floor: 1e-4,
            control_gamma_t: 20.0,
            decay_rate_factor: 0.5,
            decay_ratio: 1e-3,
            decay_gamma_t: 10.0,
            smoothing_radius_variation: 0.20,
            smoothing_refinement: 0.05,
            energy_order: 1.8,
            attractor_thickness: 0.10,
            equicontinuity_r2: 0.9,
        }
    }
}

/// `(max − min)/max` of positive values; `0` for fewer than two.
pub fn relative_spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.len() < 2 || hi <= 0.0 {
        return 0.0;
    }
    (hi - lo) / hi
}
