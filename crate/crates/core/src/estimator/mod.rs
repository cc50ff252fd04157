//! Verification harness for the `Lᵖ–L^{p′}` and Besov decay estimates.
//!
//! True operator norms are not computable, so every check measures ratios
//! over a finite [`ProbeFamily`] and compares them with the shape of the
//! claimed bound.

mod exponents;
mod fit;
mod probes;
mod ratios;
mod scans;

pub use exponents::{admissible_p_min, decay_exponent, riesz_alpha, ExponentSet};
pub use fit::{decay_fit, linear_fit, log2_slope, log_spaced, DecayFit, MIN_FIT_POINTS};
pub use probes::{
    gaussian_field, modulated_gaussian_field, shell_random_field, shell_window_width, Probe, ProbeFamily,
    ProbeFamilySpec, ProbeKind, PROBE_BOUNDARY_TOL,
};
pub use ratios::{
    family_ratios, interpolation_check, interpolation_check_multi, lemma1_constant, lemma1_lift_check, measured_ratio,
    ratio_with, InterpolationReport, Lemma1Report, Lemma1Row, INTERPOLATION_SLACK, KERNEL_BOUNDARY_TOL,
};
pub use scans::{
    besov_estimate_check, corollary_decay_scan, corollary_from_rows, kernel_bound_violations, littman_decay_scan,
    littman_decay_scan_on, littman_grid, littman_phase_variation, littman_sup, propagate, propagator_ratios,
    scaling_identity_check, shell_grid, shell_grid_points, shell_slopes, shell_sup_bounds, shell_sup_bounds_on,
    spread_factor, write_shell_csv, BesovRow, BesovScan, CorollaryScan, LittmanScan, RatioRow, Regime, ShellBound,
    ShellSlopes, COROLLARY_SLOPE_SLACK, LITTMAN_PHASE_GUARD,
};
