//! Stationary solutions by backward iteration, coalescence for finite
//! alphabets, Lyapunov exponents and condition checks.

pub mod backward;
pub mod certificate;
pub mod coalescence;
pub mod lyapunov;

pub use backward::{
    backward_sample, forward_sample, gap_profile, initialization_gap, run_forward, state_gap, stationary_path,
    ConvergenceReport, Trajectory, DEFAULT_S_MAX, DEFAULT_TOL,
};
pub use certificate::{check_conditions, CheckReport, Condition, ContractionCertificate, Verdict};
pub use coalescence::{coalescence_time, coalescence_times, CoalescenceReport, DEFAULT_CAP};
pub use lyapunov::{lyapunov_estimate, lyapunov_path, LyapunovEstimate};
