//! Ground-truth-known image stacks: `z_i(x) = u(x − τ_i) + n_i(x)`, with
//! configurable noise level, frame count and shift trajectory.

mod prepare;
mod scenes;
mod snr;
mod stack;
mod trajectory;

pub use prepare::{band_limit, periodic_component, prepare_truth, BAND_LIMIT_FRACTION};
pub use scenes::dead_leaves;
pub use snr::{gradient_energy, measure_snr_db, sigma2_for_snr_db};
pub use stack::{make_stack, SyntheticStack};
pub use trajectory::{draw_shifts, TrajectoryModel};
