//! Classical iterative reconstruction and the view-count sweep harness.

mod sart;
mod sweep;
mod tv;

pub use sart::{
    data_residual, normalized_gpi, sart_reconstruct, sart_reconstruct_from, SartParams,
};
pub use sweep::{
    reconstruct, view_sweep, view_sweep_dataset, ReconMethod, SweepConfig, SweepReport, SweepRow,
    DEFAULT_SWEEP_COUNTS,
};
pub use tv::{isotropic_tv, tv_denoise_step, tv_gradient, TV_EPSILON};
