//! Special functions, heat traces and the Mellin continuation engine.

pub mod heat;
pub mod mellin;
pub mod quadrature;
pub mod special;

pub use heat::{
    product_heat_trace, theta_expansion, Endpoint, HeatComponent, HeatTerm, HeatTrace,
    ModelFactor, SpectralFactor,
};
pub use mellin::{mellin_zeta, mellin_zeta_with_tol, quadrature_eps, ZetaEval};
pub use special::{
    hurwitz_zeta, hurwitz_zeta_prime0, hurwitz_zeta_with_derivative, riemann_zeta,
    riemann_zeta_prime0, riemann_zeta_with_derivative, EULER_GAMMA,
};
