//! Pixel-level primitives: image containers, filters, contrast enhancement,
//! morphology, distance transform, labeling and sub-pixel sampling.

mod clahe;
mod distance;
mod filter;
mod image;
mod label;
mod morphology;
mod sample;

pub use self::clahe::clahe;
pub use self::distance::distance_transform;
pub use self::filter::{gaussian_blur, gaussian_kernel, gaussian_sigma, median_filter};
pub use self::image::{BinaryMask, GrayImage, RealGrid};
pub use self::label::{connected_components, remove_small_components, Components, Connectivity};
pub use self::morphology::{close, dilate, erode, morphology, MorphOp, SeShape, StructuringElement};
pub use self::sample::bilinear_sample;
