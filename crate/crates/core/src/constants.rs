//! Frozen regression constants.
//!
//! Measured once with `cargo run --release --example calibrate` and asserted
//! thereafter. Bump [`CONSTANTS_VERSION`] whenever a value changes; it is part
//! of every cache key and of `summary.json`.

pub const CONSTANTS_VERSION: &str = "1";

/// Stages computed when no range is given.
pub const DEFAULT_K_MAX: u64 = 10;
/// Largest stage a run may request.
pub const MAX_K_LIMIT: u64 = 40;

/// `|t_{k+1} - t_k - log(a_{2k+3} a_{2k+2})|` allowed for `k >= 3`.
pub const GAP_GROWTH_TOLERANCE: f64 = 0.01;
pub const GAP_GROWTH_FROM_K: u64 = 3;
/// Bound on the fitted `C` in `t_{k+1} - t_k <= C log t_k` (measured 4.4698 at k = 1).
pub const GAP_GROWTH_C_BOUND: f64 = 4.5;

/// Floor on the empirical thickness over the stage range (measured 0.9992).
pub const EPSILON_FLOOR: f64 = 0.5;
/// Allowed relative drop of the running systole minimum over the last half of the range.
pub const EPSILON_STABILITY: f64 = 0.1;

/// Window for `|zeta_k| a_{2k+2}` (measured 1.9838 to 2.0052 for k <= 13).
pub const LEN_TIMES_A_WINDOW: (f64, f64) = (0.5, 8.0);
/// `hyperbolic_upper` must decrease from this stage on.
pub const HYPERBOLIC_DECREASING_FROM_K: u64 = 2;

/// Bound on the largest horizontal gap times `k^4`, curve `k + 3` seen at
/// stage `k` (measured max 1.7456e-6 at k = 2, k <= 10).
pub const GAP_K4_BOUND: f64 = 2.0e-6;
/// Window for `gap(observe 1, curve 4) * q_9 / q_7` (measured 7.2685e-3).
pub const SPOT_GAP_WINDOW: (f64, f64) = (0.05, 20.0);

/// Bound on `r_k k^4` (measured 0.3505 at k = 10, 0.5816 at k = 56).
pub const RATIO_K4_BOUND: f64 = 1.0;

/// Birkhoff calibration run: sheet 0, `c = 0`, default checkpoints and burn-in.
pub const BIRKHOFF_N: u64 = 10_000_000;
pub const BIRKHOFF_START: &str = "1/3";
/// Oscillation amplitude of the skew trace past burn-in.
pub const BIRKHOFF_AMPLITUDE: f64 = 0.062244415283203125;
/// Oscillation amplitude of the plain rotation on `[0, 1/2)` at the same checkpoints.
pub const BIRKHOFF_CONTROL_AMPLITUDE: f64 = 0.0001211703125;
/// `BIRKHOFF_AMPLITUDE / BIRKHOFF_CONTROL_AMPLITUDE`.
pub const BIRKHOFF_RATIO: f64 = 513.694;
/// Relative tolerance for both the amplitude and the ratio.
pub const BIRKHOFF_TOLERANCE: f64 = 0.1;

pub const DIAGNOSTIC_DISCLAIMER: &str = "diagnostic only: no lower bound computed";
