//! Special functions, quadrature and test statistics.

mod diffusion;
mod gof;
mod quadrature;
mod special;
mod watts;

pub use diffusion::{
    bessel3_hit, generator_residual, scale_function, scale_hit, GeneratorResidual, TestFunction,
};
pub use gof::{
    chi_square_gof, chi_square_homogeneity, chi_square_sf, chi_square_uniform, kolmogorov_sf, ks_critical,
    ks_test, ks_uniform, ChiSquare, KolmogorovSmirnov, MIN_EXPECTED,
};
pub use quadrature::{Integral, Quadrature};
pub use special::{beta, gamma, hyp2f1, ln_gamma, reg_inc_beta};
pub use watts::{
    curves_csv, sc_deriv, sc_inverse, sc_map, watts_closed, watts_composed, watts_via_hypergeometric,
    watts_via_integral,
};
