//! Rough test functions: lacunary cosine series with random phases, a
//! pair-sampling Hölder probe, and bump-series synthesis on d-sets.

mod holder;
mod wavelet;
mod weierstrass;

pub use holder::{estimate_holder_exponent, estimate_holder_exponent_with, HolderReport};
pub use wavelet::{
    besov_synthesize, make_besov_coefficients, mother_bump, CoefficientMode, MotherBump,
    WaveletLevel, WaveletSeries, BUMP_GRADIENT_BOUND,
};
pub use weierstrass::{
    random_phases, weierstrass_eval, weierstrass_holder_constant, WeierstrassParams,
    DEFAULT_RHO, DEFAULT_TRUNCATION,
};
