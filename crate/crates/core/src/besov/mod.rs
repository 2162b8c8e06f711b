//! Littlewood–Paley analysis on the periodic grid, negative-order Besov
//! drifts and their mollification.

mod checks;
mod drift;
mod field;
mod mollifier;
mod partition;

pub use checks::{
    bernstein_check, block_orthogonality_residual, interpolation_check, partition_residual_on_grid,
    reconstruction_residual, BernsteinReport, InterpolationReport, C_BERNSTEIN, C_INTERPOLATION,
};
pub use drift::{write_fields_csv, DriftKind, DriftSpec, DriftTerm};
pub use field::{besov_norm, besov_norm_vector, vector_max_norm, FieldOnGrid, MAX_M_1D, MAX_M_2D};
pub(crate) use field::{fft_nd, signed_index};
pub use mollifier::Mollifier;
pub use partition::{smooth_step, DyadicPartition};
