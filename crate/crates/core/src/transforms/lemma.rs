//! Consistency checks between a symmetric measure `μ` and its square
//! push-forward `ν = μ^{(2)}` at the level of moments, Cauchy transforms,
//! R-transforms and S-transforms.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{compose, cumulants_to_moments, CumulantSequence, TruncatedSeries};
use crate::transforms::cauchy::{CauchyField, SharedField, SymmetrizedField};
use crate::transforms::stransform::{free_mult, s_bernoulli_unit, s_from_cumulants, s_sqrt, s_symmetric_direct};

/// Largest absolute residual of each identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquarePairResiduals {
    /// `τ_{2n}(μ) = τ_n(ν)`, relative to `max(1, |τ_n(ν)|)`.
    pub moments: f64,
    /// `G_μ(z) = z G_ν(z²)` on the sample points.
    pub cauchy: f64,
    /// `R_μ(z) = R_ν(z²/(R_μ(z) + 1))` coefficientwise.
    pub r: f64,
    /// `S_μ = S_d √S_ν` coefficientwise after clearing `z^{-1/2}`.
    pub s: f64,
}

impl SquarePairResiduals {
    pub fn max(&self) -> f64 {
        self.moments.max(self.cauchy).max(self.r).max(self.s)
    }
}

/// Residuals for the pair `(μ, ν)` at series order `k`. `kappa_mu` needs
/// order at least `2k + 2` and `kappa_nu` at least `k + 1`.
pub fn square_pair_residuals<T: Scalar>(
    mu_field: &dyn CauchyField<T>,
    nu_field: SharedField<T>,
    kappa_mu: &CumulantSequence<T>,
    kappa_nu: &CumulantSequence<T>,
    k: usize,
    z_samples: &[Complex<T>],
) -> Result<SquarePairResiduals> {
    if kappa_mu.order() < 2 * k + 2 || kappa_nu.order() < k + 1 {
        return Err(Error::InvalidInput(format!(
            "need cumulant orders {} and {}, got {} and {}",
            2 * k + 2,
            k + 1,
            kappa_mu.order(),
            kappa_nu.order()
        )));
    }
    crate::evolution::laws::check_symmetric(kappa_mu)?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);

    let tau_mu = cumulants_to_moments(kappa_mu);
    let tau_nu = cumulants_to_moments(&kappa_nu.truncate(k + 1));
    let moments = (1..=k)
        .map(|n| f((tau_mu.get(2 * n) - tau_nu.get(n)).abs() / tau_nu.get(n).abs().max(T::one())))
        .fold(0.0, f64::max);

    let lifted = SymmetrizedField::new(nu_field);
    let mut cauchy = 0.0f64;
    for &z in z_samples {
        cauchy = cauchy.max(f((mu_field.eval(z)? - lifted.eval(z)?).norm()));
    }

    let r_mu = kappa_mu.truncate(k).to_series();
    let r_nu = kappa_nu.truncate(k).to_series();
    let arg = TruncatedSeries::monomial(T::one(), 2, k).div(&r_mu.add_constant(T::one()))?;
    let r = f(r_mu.max_abs_diff(&compose(&r_nu, &arg)?));

    let s_mu = s_symmetric_direct(&cumulants_to_moments(&kappa_mu.truncate(2 * k + 2)))?;
    let s_nu = s_from_cumulants(&kappa_nu.truncate(k + 1))?;
    let rhs = free_mult(&s_bernoulli_unit(k), &s_sqrt(&s_nu)?);
    let s = f(s_mu.max_abs_diff(&rhs)?);

    Ok(SquarePairResiduals { moments, cauchy, r, s })
}
