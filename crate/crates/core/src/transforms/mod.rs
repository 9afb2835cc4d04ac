//! Cauchy, R- and S-transforms and Stieltjes inversion.

pub mod cauchy;
pub mod inversion;
pub mod lemma;
pub mod stransform;

pub use cauchy::{
    cauchy_eval, cauchy_from_square_pushforward, eval_reflected, CauchyField, ClosedForm, FieldKind, QuadratureField,
    SharedField, SquaredField, SymmetrizedField,
};
pub use inversion::{default_eps_schedule, stieltjes_invert, uniform_grid, DEFAULT_EPS_SCHEDULE};
pub use lemma::{square_pair_residuals, SquarePairResiduals};
pub use stransform::{
    free_add, free_mult, r_series, s_bernoulli_unit, s_from_cumulants, s_series, s_sqrt, s_standard, s_symmetric,
    s_symmetric_direct, SBranch, STransformSeries,
};
