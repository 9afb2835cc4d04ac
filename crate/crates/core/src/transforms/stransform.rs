//! R- and S-transforms as truncated series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{moments, MeasureSpec};
use crate::scalar::Scalar;
use crate::series::{
    lagrange_invert, moments_to_cumulants, sqrt_series, CumulantSequence, MomentSequence, TruncatedSeries,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SBranch {
    /// `S = ((1+z)/z) χ` with `χ` the compositional inverse of `Ψ`.
    Standard,
    /// Positive root of `S² = ((1+z)/z) S_{μ^{(2)}}` for symmetric `μ`.
    SymmetricPlus,
}

/// `S(z) = z^{half_power/2} · series(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct STransformSeries<T> {
    pub half_power: i32,
    pub series: TruncatedSeries<T>,
    pub branch: SBranch,
}

impl<T: Scalar> STransformSeries<T> {
    pub fn standard(series: TruncatedSeries<T>) -> Self {
        Self { half_power: 0, series, branch: SBranch::Standard }
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self { series: self.series.truncate(order), ..self.clone() }
    }

    /// Coefficient distance; the prefactors must agree.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.half_power != other.half_power {
            return Err(Error::InvalidInput(format!(
                "prefactor z^({}/2) against z^({}/2)",
                self.half_power, other.half_power
            )));
        }
        Ok(self.series.max_abs_diff(&other.series))
    }
}

/// Cumulants `κ_1..κ_K`, the coefficients of `R_μ`.
pub fn r_series<T: Scalar>(mu: &MeasureSpec<T>, k: usize) -> CumulantSequence<T> {
    moments_to_cumulants(&moments(mu, k))
}

fn origin_atom_check<T: Scalar>(mu: &MeasureSpec<T>) -> Result<()> {
    let m0 = mu.atom_mass_near(T::zero(), T::lit(crate::measures::ATOM_MERGE_TOL));
    if m0 >= T::one() - T::tol(1e-12) {
        return Err(Error::DegenerateMeasure(m0.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// `S_μ` to order `K`. Measures with `τ_1 ≠ 0` use the standard branch;
/// symmetric measures use the symmetric branch and carry `z^{-1/2}`.
pub fn s_series<T: Scalar>(mu: &MeasureSpec<T>, k: usize) -> Result<STransformSeries<T>> {
    origin_atom_check(mu)?;
    let tau1 = moments(mu, 1).get(1);
    if tau1.abs() > T::tol(1e-12) {
        return s_standard(&moments(mu, k + 1));
    }
    if mu.is_symmetric() {
        return s_symmetric(&moments(mu, 2 * k + 2));
    }
    Err(Error::SUndefined("first moment vanishes and the measure is not symmetric".into()))
}

/// Standard-branch `S` from `τ_1..τ_{K+1}`; the result has order `K`.
pub fn s_standard<T: Scalar>(tau: &MomentSequence<T>) -> Result<STransformSeries<T>> {
    if tau.get(1).abs() <= T::tol(1e-12) {
        return Err(Error::SUndefined("first moment vanishes".into()));
    }
    let psi = tau.to_series();
    let chi = lagrange_invert(&psi)?;
    let chi_over_z = chi.shift_down(T::tol(1e-12))?;
    let one_plus_z = TruncatedSeries::from_fn(chi_over_z.order(), |n| if n <= 1 { T::one() } else { T::zero() });
    Ok(STransformSeries::standard(&one_plus_z * &chi_over_z))
}

/// `S` of a free cumulant sequence (standard branch, order `K - 1`).
pub fn s_from_cumulants<T: Scalar>(kappa: &CumulantSequence<T>) -> Result<STransformSeries<T>> {
    s_standard(&crate::series::cumulants_to_moments(kappa))
}

/// Symmetric-branch `S_μ = z^{-1/2} √((1+z) S_ν)` with `ν = μ^{(2)}`, from
/// `τ_1..τ_{2K+2}` of `μ`. The result has order `K`.
pub fn s_symmetric<T: Scalar>(tau: &MomentSequence<T>) -> Result<STransformSeries<T>> {
    let k2 = tau.order() / 2;
    let nu = MomentSequence::new((1..=k2).map(|n| tau.get(2 * n)).collect());
    let s_nu = s_standard(&nu)?.series;
    let one_plus_z = TruncatedSeries::from_fn(s_nu.order(), |n| if n <= 1 { T::one() } else { T::zero() });
    let root = sqrt_series(&(&one_plus_z * &s_nu))?;
    Ok(STransformSeries { half_power: -1, series: root, branch: SBranch::SymmetricPlus })
}

/// Symmetric-branch `S_μ` computed without passing through `μ^{(2)}`:
/// with `f(w) = w √(τ_2 + τ_4 w² + ...)` one has `Ψ_μ = f²`, so
/// `χ_μ(z) = f^{<-1>}(√z) = √z E(z)` and `S_μ = z^{-1/2} (1+z) E(z)`.
/// Takes `τ_1..τ_{2K+2}` of `μ`; the result has order `K`.
pub fn s_symmetric_direct<T: Scalar>(tau: &MomentSequence<T>) -> Result<STransformSeries<T>> {
    let k = tau.order() / 2 - 1;
    let n = 2 * k + 1;
    // τ_2 + τ_4 w² + ... in the variable w.
    let even = TruncatedSeries::from_fn(n - 1, |j| if j % 2 == 0 { tau.get(j + 2) } else { T::zero() });
    let f = sqrt_series(&even)?.shift_up_extend();
    let finv = lagrange_invert(&f)?;
    // f^{<-1>}(u) = u E(u²): read off the odd coefficients.
    let e = TruncatedSeries::from_fn(k, |j| finv.coeff(2 * j + 1));
    let one_plus_z = TruncatedSeries::from_fn(k, |j| if j <= 1 { T::one() } else { T::zero() });
    Ok(STransformSeries { half_power: -1, series: &one_plus_z * &e, branch: SBranch::SymmetricPlus })
}

/// `R_{μ⊞ν} = R_μ + R_ν`.
pub fn free_add<T: Scalar>(a: &CumulantSequence<T>, b: &CumulantSequence<T>) -> Result<CumulantSequence<T>> {
    if a.order() != b.order() {
        return Err(Error::InvalidInput(format!("cumulant orders {} and {}", a.order(), b.order())));
    }
    Ok(CumulantSequence::new(a.values.iter().zip(&b.values).map(|(x, y)| *x + *y).collect()))
}

/// `S_{μ⊠ν} = S_μ S_ν`, truncated to the smaller order.
pub fn free_mult<T: Scalar>(a: &STransformSeries<T>, b: &STransformSeries<T>) -> STransformSeries<T> {
    let branch = if a.branch == SBranch::SymmetricPlus || b.branch == SBranch::SymmetricPlus {
        SBranch::SymmetricPlus
    } else {
        SBranch::Standard
    };
    STransformSeries { half_power: a.half_power + b.half_power, series: &a.series * &b.series, branch }
}

/// `S_d(z) = √((1+z)/z)`, the symmetric-branch S-transform of `d_1`.
pub fn s_bernoulli_unit<T: Scalar>(order: usize) -> STransformSeries<T> {
    STransformSeries {
        half_power: -1,
        series: TruncatedSeries::binomial(T::one(), T::half(), order),
        branch: SBranch::SymmetricPlus,
    }
}

/// Square root of a standard-branch transform; `half_power` is halved.
pub fn s_sqrt<T: Scalar>(s: &STransformSeries<T>) -> Result<STransformSeries<T>> {
    if s.half_power % 2 != 0 {
        return Err(Error::InvalidInput("square root of a half-integer prefactor".into()));
    }
    Ok(STransformSeries { half_power: s.half_power / 2, series: sqrt_series(&s.series)?, branch: s.branch })
}

impl<T: Scalar> TruncatedSeries<T> {
    /// Multiplies by `z` and grows the order by one, keeping every term.
    pub fn shift_up_extend(&self) -> Self {
        Self::from_fn(self.order() + 1, |n| if n == 0 { T::zero() } else { self.coeff(n - 1) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_bernoulli, make_dirac, make_marcenko_pastur, make_semicircle, push_forward_square};
    use crate::series::cumulants_to_moments;
    use proptest::prelude::*;

    fn atomic(atoms: &[(f64, f64)]) -> MeasureSpec<f64> {
        MeasureSpec::normalized(atoms.to_vec(), None, crate::measures::Domain::RealLine).unwrap()
    }

    #[test]
    fn r_series_examples() {
        let semi = r_series(&make_semicircle::<f64>(2.0).unwrap(), 4);
        assert!(semi.max_abs_diff(&CumulantSequence::new(vec![0.0, 2.0, 0.0, 0.0])) < 1e-5);
        let mp = r_series(&make_marcenko_pastur::<f64>(0.5, 1.0).unwrap(), 3);
        assert!(mp.max_abs_diff(&CumulantSequence::new(vec![0.5, 0.5, 0.5])) < 1e-5);
        let d1 = r_series(&make_bernoulli::<f64>(1.0).unwrap(), 6);
        assert!(d1.max_abs_diff(&CumulantSequence::new(vec![0.0, 1.0, 0.0, -1.0, 0.0, 2.0])) < 1e-14);
    }

    #[test]
    fn s_of_dirac_is_reciprocal_location() {
        for b in [0.7, 1.0] {
            let s = s_series(&make_dirac::<f64>(b), 8).unwrap();
            assert_eq!(s.half_power, 0);
            assert!((s.series.coeff(0) - 1.0 / b).abs() < 1e-14);
            for n in 1..=8 {
                assert!(s.series.coeff(n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn s_of_marcenko_pastur_matches_closed_form() {
        // 1/(t(z+λ)) = (1/(tλ)) Σ (-z/λ)^n, oracle from cumulants λ t^n.
        let (lambda, t) = (1.5f64, 0.8f64);
        let kappa = CumulantSequence::new((1..=11).map(|n| lambda * t.powi(n)).collect());
        let s = s_from_cumulants(&kappa).unwrap();
        let want = TruncatedSeries::geometric(-1.0 / lambda, 10).scale(1.0 / (t * lambda));
        assert!(s.series.max_abs_diff(&want) < 1e-9, "{:?} {:?}", s.series, want);
        let s_grid = s_series(&make_marcenko_pastur(lambda, t).unwrap(), 6).unwrap();
        assert!(s_grid.series.max_abs_diff(&want.truncate(6)) < 1e-4);
    }

    #[test]
    fn s_of_bernoulli_squares_to_one_plus_z_over_z() {
        let a = 2.0;
        let s = s_series(&make_bernoulli::<f64>(a).unwrap(), 10).unwrap();
        assert_eq!((s.half_power, s.branch), (-1, SBranch::SymmetricPlus));
        // (a S)² z = 1 + z.
        let sq = &s.series.scale(a) * &s.series.scale(a);
        let want = TruncatedSeries::from_fn(10, |n| if n <= 1 { 1.0 } else { 0.0 });
        assert!(sq.max_abs_diff(&want) < 1e-12);
        let unit = s_series(&make_bernoulli::<f64>(1.0).unwrap(), 10).unwrap();
        assert!(unit.max_abs_diff(&s_bernoulli_unit(10)).unwrap() < 1e-12);
    }

    #[test]
    fn semicircle_s_is_inverse_root() {
        // S = (tz)^{-1/2}: series part is the constant t^{-1/2}.
        let t = 1.7f64;
        let tau = cumulants_to_moments(&CumulantSequence::new((1..=14).map(|n| if n == 2 { t } else { 0.0 }).collect()));
        for s in [s_symmetric(&tau).unwrap(), s_symmetric_direct(&tau).unwrap()] {
            assert_eq!(s.half_power, -1);
            assert!((s.series.coeff(0) - 1.0 / t.sqrt()).abs() < 1e-14);
            for n in 1..=s.order() {
                assert!(s.series.coeff(n).abs() < 1e-12, "{:?}", s.series);
            }
        }
    }

    #[test]
    fn s_errors() {
        assert!(matches!(s_series(&make_dirac::<f64>(0.0), 4), Err(Error::DegenerateMeasure(_))));
        let centered = atomic(&[(-1.0, 0.25), (1.0 / 3.0, 0.75)]);
        assert!(matches!(s_series(&centered, 4), Err(Error::SUndefined(_))));
        assert!(free_add(&CumulantSequence::new(vec![1.0]), &CumulantSequence::new(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn free_add_and_mult_examples() {
        let a = CumulantSequence::new(vec![0.0, 0.5, 0.0, 0.0]);
        let b = CumulantSequence::new(vec![0.0, 1.25, 0.0, 0.0]);
        assert_eq!(free_add(&a, &b).unwrap().values, vec![0.0, 1.75, 0.0, 0.0]);
        assert_eq!(free_add(&a, &CumulantSequence::zeros(4)).unwrap(), a);
        let s1 = s_series(&make_dirac::<f64>(1.0), 6).unwrap();
        let s = s_series(&make_marcenko_pastur::<f64>(0.5, 1.0).unwrap(), 6).unwrap();
        assert!(free_mult(&s1, &s).max_abs_diff(&s).unwrap() < 1e-12);
        // δ_c ⊠ δ_b = δ_{cb}.
        let prod = free_mult(&s_series(&make_dirac(0.5f64), 6).unwrap(), &s_series(&make_dirac(3.0), 6).unwrap());
        assert!((prod.series.coeff(0) - 1.0 / 1.5).abs() < 1e-14);
    }

    #[test]
    fn dilation_by_free_multiplication() {
        // μ ⊠ δ_c scales τ_n by c^n: S_{μ⊠δ_c} = S_μ / c.
        let mu = atomic(&[(0.2, 0.3), (1.1, 0.5), (2.0, 0.2)]);
        let c = 1.7;
        let scaled = atomic(&[(0.2 * c, 0.3), (1.1 * c, 0.5), (2.0 * c, 0.2)]);
        let prod = free_mult(&s_series(&mu, 8).unwrap(), &s_series(&make_dirac(c), 8).unwrap());
        assert!(prod.max_abs_diff(&s_series(&scaled, 8).unwrap()).unwrap() < 1e-10);
    }

    proptest! {
        #[test]
        fn standard_s_constant_term_is_inverse_mean(atoms in proptest::collection::vec((0.05f64..3.0, 0.05f64..1.0), 1..6)) {
            let mu = atomic(&atoms);
            let s = s_series(&mu, 8).unwrap();
            prop_assert!((s.series.coeff(0) - 1.0 / moments(&mu, 1).get(1)).abs() < 1e-10);
        }

        #[test]
        fn r_and_s_reconstruct_the_same_moments(atoms in proptest::collection::vec((0.05f64..2.0, 0.05f64..1.0), 1..6)) {
            // Moments from S: χ = z S/(1+z), Ψ = χ^{<-1>}.
            let mu = atomic(&atoms);
            let k = 8;
            let s = s_series(&mu, k).unwrap().series;
            let one_plus_z = TruncatedSeries::from_fn(k, |n| if n <= 1 { 1.0 } else { 0.0 });
            let chi = s.div(&one_plus_z).unwrap().shift_up_extend().truncate(k);
            let psi = lagrange_invert(&chi).unwrap();
            let from_s = MomentSequence::from_series(&psi);
            let from_r = cumulants_to_moments(&r_series(&mu, k));
            prop_assert!(from_s.max_abs_diff(&from_r) < 1e-9 * (1.0 + from_r.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        }

        #[test]
        fn symmetric_routes_agree(atoms in proptest::collection::vec((0.1f64..2.0, 0.05f64..1.0), 1..5)) {
            let mut sym = vec![];
            for &(x, w) in &atoms {
                sym.push((x, w));
                sym.push((-x, w));
            }
            let mu = MeasureSpec::normalized(sym, None, crate::measures::Domain::Symmetric).unwrap();
            let tau = moments(&mu, 26);
            let a = s_symmetric(&tau).unwrap();
            let b = s_symmetric_direct(&tau).unwrap();
            let scale = 1.0 + a.series.max_abs();
            prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-8 * scale);
            // Lemma: S_μ = S_d √S_{μ^{(2)}} with μ^{(2)} from the measure map.
            let s_nu = s_series(&push_forward_square(&mu), 12).unwrap();
            let rhs = free_mult(&s_bernoulli_unit(12), &s_sqrt(&s_nu).unwrap());
            prop_assert!(b.max_abs_diff(&rhs).unwrap() < 1e-8 * scale, "{:?} {:?}", b, rhs);
        }
    }
}
