//! Shared numerical kernels: special functions, adaptive quadrature,
//! characteristic-function density inversion, and kernel density estimation.

pub mod fft;
pub mod kde;
pub mod quad;
pub mod special;

pub use fft::{chf_to_pdf_fft, DensityGrid, FftConfig, SpanRule};
pub use kde::{kde, kde_bandwidth};
pub use quad::{adaptive_quad, QuadResult};
pub use special::{
    bessel_k0, bessel_k1, bessel_k1_scaled, erf, erfc, inv_norm_cdf, ln_gamma,
    lower_inc_gamma_reg, norm_cdf, norm_pdf,
};
