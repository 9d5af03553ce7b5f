//! Scalar numerical kernels shared by the higher-level modules.

pub mod banded;
pub mod quad;
pub mod roots;
pub mod search;

pub use banded::{BandedLu, BandedMatrix};
pub use quad::{gauss_kronrod, integrate_adaptive};
pub use roots::{bisect_sign_change, sup_below};
pub use search::golden_section_min;
