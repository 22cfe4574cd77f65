//! Exact workbench for point sets with finite local complexity in `R^n` and
//! the Heisenberg group: lattices and cut-and-project model sets, anchored
//! patch catalogs approximating the discrete hull, truncations of the
//! groupoid `G(Λ)`, and the positive-type witness `δ_e(x⁻¹y)`.

pub mod config;
pub mod error;
pub mod group;
pub mod groupoid;
pub mod hull;
pub mod output;
pub mod pointset;
pub mod regularity;
pub mod scalar;
pub mod suite;
pub mod window;
pub mod witness;

pub use error::{Error, Result};
