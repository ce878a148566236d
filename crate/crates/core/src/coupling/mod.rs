//! Poisson field, comonotone Gaussianization of its cell increments, pinned
//! Brownian sheets and the assembled coupled sheet W.

mod field;
mod gaussian;
mod pinned;
mod sheet;
mod yamada;

pub use field::{
    compensated_increment, sample_poisson_field, CellGrid, PoissonField, PoissonFieldSample, Slab,
    DEFAULT_POINT_CAP,
};
pub use gaussian::{comonotone_gaussianize, Gaussianizer};
pub use pinned::{sample_pinned_sheet, PinnedSource};
pub use sheet::{assemble_sheet, CoupledSheet};
pub use yamada::{build_yamada, YamadaFunction};

/// `k = ⌊T^{4/5}⌋ + 1`.
pub fn default_k(horizon: f64) -> usize {
    horizon.powf(0.8).floor() as usize + 1
}
