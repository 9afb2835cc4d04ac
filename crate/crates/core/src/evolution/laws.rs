//! Series-level evolution laws, closed-form solutions and the S-transform
//! identities along the three flows.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::scalar::Scalar;
use crate::series::{
    compose, cumulants_to_moments, moments_to_cumulants, sqrt_series, CumulantSequence, MomentSequence,
    TruncatedSeries,
};
use crate::transforms::cauchy::{eval_reflected, CauchyField};
use crate::transforms::stransform::{
    free_mult, r_series, s_bernoulli_unit, s_from_cumulants, s_sqrt, s_symmetric_direct, STransformSeries,
};

use super::solver::Family;
use super::EvolutionProblem;

fn f64_of<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `κ_2 += t`.
pub fn r_evolve_dyson<T: Scalar>(r0: &CumulantSequence<T>, t: T) -> CumulantSequence<T> {
    let mut out = r0.clone();
    if out.order() >= 2 {
        out.values[1] += t;
    }
    out
}

/// `R_t(z) = R_0(z/(1-tz))/(1-tz) + λtz/(1-tz)`.
pub fn r_evolve_wishart<T: Scalar>(r0: &CumulantSequence<T>, lambda: T, t: T) -> CumulantSequence<T> {
    let k = r0.order();
    let geo = TruncatedSeries::geometric(t, k);
    let arg = geo.shift_up();
    let inner = compose(&r0.to_series(), &arg).expect("argument has no constant term");
    let fundamental = geo.add_constant(-T::one()).scale(lambda);
    CumulantSequence::from_series(&(&(&geo * &inner) + &fundamental))
}

/// `R` of the chiral flow from a symmetric `R_0`, through the square
/// push-forward: the even moments of `μ_0` give `ν_0`, which follows the
/// Wishart law, and the moments of `ν_t` are the even moments of `μ_t`.
pub fn r_evolve_chiral<T: Scalar>(r0: &CumulantSequence<T>, lambda: T, t: T) -> Result<CumulantSequence<T>> {
    check_symmetric(r0)?;
    let k = r0.order();
    if t == T::zero() {
        return Ok(r0.clone());
    }
    let tau0 = cumulants_to_moments(r0);
    let nu0 = MomentSequence::new((1..=k / 2).map(|n| tau0.get(2 * n)).collect());
    let nu_t = cumulants_to_moments(&r_evolve_wishart(&moments_to_cumulants(&nu0), lambda, t));
    let tau_t = MomentSequence::new((1..=k).map(|n| if n % 2 == 0 { nu_t.get(n / 2) } else { T::zero() }).collect());
    let mut out = moments_to_cumulants(&tau_t);
    for n in (1..=k).step_by(2) {
        out.values[n - 1] = T::zero();
    }
    Ok(out)
}

pub(crate) fn check_symmetric<T: Scalar>(kappa: &CumulantSequence<T>) -> Result<()> {
    let scale = kappa.values.iter().fold(T::one(), |m, c| m.max(c.abs()));
    if (1..=kappa.order()).step_by(2).any(|n| kappa.get(n).abs() > T::tol(1e-8) * scale) {
        return Err(Error::InvalidInput("odd cumulants of a symmetric measure must vanish".into()));
    }
    Ok(())
}

/// Largest coefficient of `R_t - R_0 - t z²`.
pub fn dyson_r_residual<T: Scalar>(r_t: &CumulantSequence<T>, r0: &CumulantSequence<T>, t: T) -> T {
    r_t.max_abs_diff(&r_evolve_dyson(r0, t))
}

/// `(-1 + t z² + √(1 + 2(2λ-1) t z² + t² z⁴)) / 2`.
fn chiral_fundamental_r<T: Scalar>(lambda: T, t: T, k: usize) -> Result<TruncatedSeries<T>> {
    let mut radicand = TruncatedSeries::constant(T::one(), k);
    radicand.set_coeff(2, T::two() * (T::two() * lambda - T::one()) * t);
    radicand.set_coeff(4, t * t);
    let mut out = sqrt_series(&radicand)?.add_constant(-T::one());
    out.set_coeff(2, out.coeff(2) + t);
    Ok(out.scale(T::half()))
}

/// Largest coefficient of the difference of the two sides of the chiral
/// R-transform identity:
/// `R_t + (1-λ)tz²/(R_t+1) = R⁰_t + (1-λ)tz²/(R⁰_t+1) + R_0(z √(1 - (1-λ)(1/(R_t+1) - 1/(R_t+1-tz²))))`
/// with `R⁰_t` the transform of the flow started at the origin.
pub fn verify_chiral_r_identity<T: Scalar>(
    r_t: &CumulantSequence<T>,
    r0: &CumulantSequence<T>,
    lambda: T,
    t: T,
) -> Result<T> {
    check_symmetric(r_t)?;
    check_symmetric(r0)?;
    let k = r_t.order().min(r0.order());
    let rt = r_t.truncate(k).to_series();
    let rt1 = rt.add_constant(T::one());
    let tz2 = TruncatedSeries::monomial(t, 2, k);
    let c = T::one() - lambda;

    let lhs = &rt + &tz2.scale(c).div(&rt1)?;
    let p = &rt1.recip()? - &(&rt1 - &tz2).recip()?;
    let arg = sqrt_series(&p.scale(-c).add_constant(T::one()))?.shift_up();
    let fund = chiral_fundamental_r(lambda, t, k)?;
    let rhs = &(&fund + &tz2.scale(c).div(&fund.add_constant(T::one()))?) + &compose(&r0.truncate(k).to_series(), &arg)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// `[1 - (c/2)(√(1 + q z) - 1)/z]` with `c = s + u`, `q = 4u/c²`: the
/// bracket shared by both closed-form S-transforms.
fn closed_form_bracket<T: Scalar>(s: T, u: T, k: usize) -> TruncatedSeries<T> {
    let c = s + u;
    let q = T::lit(4.0) * u / (c * c);
    let root = TruncatedSeries::binomial(q, T::half(), k + 1);
    let tail = TruncatedSeries::from_fn(k, |n| root.coeff(n + 1));
    tail.scale(-c * T::half()).add_constant(T::one())
}

/// Spreads `c_j` to the coefficient of `z^{2j}`.
fn in_square<T: Scalar>(s: &TruncatedSeries<T>, k: usize) -> TruncatedSeries<T> {
    TruncatedSeries::from_fn(k, |n| if n % 2 == 0 { s.coeff(n / 2) } else { T::zero() })
}

/// Cumulants to order `k` and S-transform to order `k` of the Dyson flow
/// started at `d_a`.
pub fn explicit_wa<T: Scalar>(a: T, t: T, k: usize) -> Result<(CumulantSequence<T>, STransformSeries<T>)> {
    if !(a > T::zero()) || !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!("a = {a}, t = {t}")));
    }
    let root = in_square(&TruncatedSeries::binomial(T::lit(4.0) * a * a, T::half(), k / 2), k);
    let mut r = root.add_constant(-T::one()).scale(T::half());
    r.set_coeff(2, r.coeff(2) + t);
    let kappa = CumulantSequence::new(r.coeffs()[1..].to_vec());

    let s = if t == T::zero() {
        let unit = s_bernoulli_unit::<T>(k);
        STransformSeries { series: unit.series.scale(a.recip()), ..unit }
    } else {
        let bracket = closed_form_bracket(T::one(), a * a / t, k);
        STransformSeries {
            half_power: -1,
            series: sqrt_series(&bracket)?.scale(t.sqrt().recip()),
            branch: crate::transforms::stransform::SBranch::SymmetricPlus,
        }
    };
    Ok((kappa, s))
}

/// Cumulants to order `k` and S-transform to order `k` of the Wishart flow
/// started at `δ_b`.
pub fn explicit_ma<T: Scalar>(lambda: T, b: T, t: T, k: usize) -> Result<(CumulantSequence<T>, STransformSeries<T>)> {
    if !(lambda >= T::zero()) || !(b > T::zero()) || !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!("λ = {lambda}, b = {b}, t = {t}")));
    }
    // z((λt + b) - λt² z) / (1 - tz)².
    let geo = TruncatedSeries::geometric(t, k);
    let mut poly = TruncatedSeries::zeros(k);
    poly.set_coeff(1, lambda * t + b);
    poly.set_coeff(2, -lambda * t * t);
    let r = &(&geo * &geo) * &poly;
    let kappa = CumulantSequence::new(r.coeffs()[1..].to_vec());

    let series = if t == T::zero() {
        TruncatedSeries::constant(b.recip(), k)
    } else {
        let bracket = closed_form_bracket(lambda, b / t, k + 1);
        if lambda > T::tol(1e-12) {
            // 1/(t(λ + z)) = (1/(tλ)) Σ (-z/λ)^n.
            (&bracket.truncate(k) * &TruncatedSeries::geometric(-lambda.recip(), k)).scale((t * lambda).recip())
        } else {
            bracket.shift_down(T::tol(1e-9))?.scale(t.recip()).truncate(k)
        }
    };
    Ok((kappa, STransformSeries::standard(series)))
}

/// Residual series of `S_t/q = S_0(zq)` with `q = 1 - (S_t/S_{w⁰_t})²` and
/// `S_{w⁰_t} = (tz)^{-1/2}`, after clearing the common prefactor.
fn dyson_s_residual<T: Scalar>(
    s_t: &STransformSeries<T>,
    s_0: &STransformSeries<T>,
    t: T,
) -> Result<TruncatedSeries<T>> {
    let k = s_t.order().min(s_0.order());
    let (a, b) = (s_t.series.truncate(k), s_0.series.truncate(k));
    let sq = (&a * &a).scale(t);
    match (s_t.half_power, s_0.half_power) {
        (0, 0) => {
            let q = (-&sq.shift_up()).add_constant(T::one());
            Ok(&a.div(&q)? - &compose(&b, &q.shift_up())?)
        }
        (-1, -1) => {
            let q = (-&sq).add_constant(T::one());
            let rhs = &sqrt_series(&q)?.recip()? * &compose(&b, &q.shift_up())?;
            Ok(&a.div(&q)? - &rhs)
        }
        (h, h0) => Err(Error::InvalidInput(format!("prefactors z^({h}/2) and z^({h0}/2)"))),
    }
}

/// Residual series of the chiral S identity, prefactors cleared.
fn chiral_s_residual<T: Scalar>(
    s_t: &STransformSeries<T>,
    s_0: &STransformSeries<T>,
    lambda: T,
    t: T,
) -> Result<TruncatedSeries<T>> {
    if s_t.half_power != -1 || s_0.half_power != -1 {
        return Err(Error::InvalidInput("the chiral identity needs symmetric-branch transforms".into()));
    }
    let k = s_t.order().min(s_0.order());
    let (a, b) = (s_t.series.truncate(k), s_0.series.truncate(k));
    let sq = (&a * &a).scale(t);
    let inv_1pz = TruncatedSeries::geometric(-T::one(), k);
    let z_lambda = TruncatedSeries::identity(k).add_constant(lambda);
    // (S/S_{w⁰_{λ,t}})² = t A² (z+λ)/(1+z) and (S/S_{w⁰_t})² = z t A².
    let ratio = &(&sq * &z_lambda) * &inv_1pz;
    let q = (-&ratio).add_constant(T::one());
    let x = (-&(&ratio * &inv_1pz).shift_up()).add_constant(T::one());
    let y = (-&(&sq * &inv_1pz).shift_up()).add_constant(T::one());
    let lhs = &sqrt_series(&x.div(&y)?)? * &a.div(&q)?;
    let rhs = &sqrt_series(&q)?.recip()? * &compose(&b, &q.shift_up())?;
    Ok(&lhs - &rhs)
}

/// Largest coefficient of the Dyson S identity residual.
pub fn s_identity_dyson<T: Scalar>(s_t: &STransformSeries<T>, s_0: &STransformSeries<T>, t: T) -> Result<T> {
    Ok(dyson_s_residual(s_t, s_0, t)?.max_abs())
}

/// Largest coefficient of the Wishart S identity residual
/// `S_t/((1 - tz S_t)(1 - t(z+λ) S_t)) = S_0(z (1 - t(z+λ) S_t))`.
pub fn s_identity_wishart<T: Scalar>(
    s_t: &STransformSeries<T>,
    s_0: &STransformSeries<T>,
    lambda: T,
    t: T,
) -> Result<T> {
    if s_t.half_power != 0 || s_0.half_power != 0 {
        return Err(Error::InvalidInput("the wishart identity needs standard-branch transforms".into()));
    }
    let k = s_t.order().min(s_0.order());
    let (a, b) = (s_t.series.truncate(k), s_0.series.truncate(k));
    let at = a.scale(t);
    let p1 = (-&at.shift_up()).add_constant(T::one());
    let p2 = (-&(&at * &TruncatedSeries::identity(k).add_constant(lambda))).add_constant(T::one());
    let lhs = a.div(&(&p1 * &p2))?;
    Ok(lhs.max_abs_diff(&compose(&b, &p2.shift_up())?))
}

/// Largest coefficient of the chiral S identity residual.
pub fn s_identity_chiral<T: Scalar>(
    s_t: &STransformSeries<T>,
    s_0: &STransformSeries<T>,
    lambda: T,
    t: T,
) -> Result<T> {
    Ok(chiral_s_residual(s_t, s_0, lambda, t)?.max_abs())
}

/// Distance between `S_w` and `S_d √S_m`.
pub fn s_identity_multiple<T: Scalar>(s_w: &STransformSeries<T>, s_m: &STransformSeries<T>) -> Result<T> {
    let rhs = free_mult(&s_bernoulli_unit(s_m.order()), &s_sqrt(s_m)?);
    s_w.truncate(rhs.order().min(s_w.order())).max_abs_diff(&rhs)
}

/// Residuals of the S identities that apply to a problem; `None` where an
/// identity does not apply to the family or initial measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SIdentityResiduals {
    /// `S_w = S_d √S_m` between the chiral flow and its square push-forward.
    pub multiple: Option<f64>,
    pub dyson: Option<f64>,
    pub wishart: Option<f64>,
    pub chiral: Option<f64>,
    /// Distance between the chiral and Dyson residual series at `λ = 1`.
    pub reduction: Option<f64>,
}

impl SIdentityResiduals {
    pub fn max(&self) -> f64 {
        [self.multiple, self.dyson, self.wishart, self.chiral, self.reduction]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// Cumulants of a symmetric measure from those of its square push-forward.
fn lift_cumulants<T: Scalar>(kappa_nu: &CumulantSequence<T>) -> CumulantSequence<T> {
    let tau = cumulants_to_moments(kappa_nu);
    let k = 2 * kappa_nu.order();
    let lifted = MomentSequence::new((1..=k).map(|n| if n % 2 == 0 { tau.get(n / 2) } else { T::zero() }).collect());
    let mut out = moments_to_cumulants(&lifted);
    for n in (1..=k).step_by(2) {
        out.values[n - 1] = T::zero();
    }
    out
}

/// Cumulants of the square push-forward from those of a symmetric measure.
fn square_cumulants<T: Scalar>(kappa_mu: &CumulantSequence<T>) -> CumulantSequence<T> {
    let tau = cumulants_to_moments(kappa_mu);
    moments_to_cumulants(&MomentSequence::new((1..=kappa_mu.order() / 2).map(|n| tau.get(2 * n)).collect()))
}

fn s_symmetric_of<T: Scalar>(kappa: &CumulantSequence<T>) -> Result<STransformSeries<T>> {
    s_symmetric_direct(&cumulants_to_moments(kappa))
}

/// Symmetric and Wishart-side data of a chiral pair at times 0 and `t`.
struct ChiralPair<T: Scalar> {
    w0: CumulantSequence<T>,
    wt: CumulantSequence<T>,
    m0: CumulantSequence<T>,
    mt: CumulantSequence<T>,
}

impl<T: Scalar> ChiralPair<T> {
    fn from_nonneg(m0: CumulantSequence<T>, lambda: T, t: T) -> Self {
        let mt = r_evolve_wishart(&m0, lambda, t);
        Self { w0: lift_cumulants(&m0), wt: lift_cumulants(&mt), m0, mt }
    }

    /// `(multiple, wishart, chiral, chiral residual series)`.
    fn residuals(&self, lambda: T, t: T) -> Result<(T, T, TruncatedSeries<T>)> {
        let s_m0 = s_from_cumulants(&self.m0)?;
        let s_mt = s_from_cumulants(&self.mt)?;
        let s_w0 = s_symmetric_of(&self.w0)?;
        let s_wt = s_symmetric_of(&self.wt)?;
        let multiple = s_identity_multiple(&s_wt, &s_mt)?;
        let wishart = s_identity_wishart(&s_mt, &s_m0, lambda, t)?;
        Ok((multiple, wishart, chiral_s_residual(&s_wt, &s_w0, lambda, t)?))
    }
}

/// Evaluates every S identity that applies to `problem` at series order
/// `k`, using cumulants of the initial measure and the series evolution laws.
pub fn verify_s_identities<T: Scalar>(problem: &EvolutionProblem<T>, t: T, k: usize) -> Result<SIdentityResiduals> {
    verify_s_identities_for(problem.family, &problem.initial_measure, t, k)
}

pub(crate) fn verify_s_identities_for<T: Scalar>(
    family: Family<T>,
    initial: &MeasureSpec<T>,
    t: T,
    k: usize,
) -> Result<SIdentityResiduals> {
    let mut out = SIdentityResiduals::default();
    match family {
        Family::Wishart { lambda } => {
            let pair = ChiralPair::from_nonneg(r_series(initial, k + 1), lambda, t);
            let (multiple, wishart, chiral) = pair.residuals(lambda, t)?;
            out.multiple = Some(f64_of(multiple));
            out.wishart = Some(f64_of(wishart));
            out.chiral = Some(f64_of(chiral.max_abs()));
        }
        Family::Chiral { lambda } => {
            let w0 = symmetric_cumulants(initial, 2 * k + 2);
            let pair = ChiralPair::from_nonneg(square_cumulants(&w0), lambda, t);
            let (multiple, wishart, chiral) = pair.residuals(lambda, t)?;
            out.multiple = Some(f64_of(multiple));
            out.wishart = Some(f64_of(wishart));
            out.chiral = Some(f64_of(chiral.max_abs()));
            if lambda == T::one() {
                let dyson = dyson_s_residual(&s_symmetric_of(&pair.wt)?, &s_symmetric_of(&pair.w0)?, t)?;
                out.dyson = Some(f64_of(dyson.max_abs()));
                out.reduction = Some(f64_of(chiral.max_abs_diff(&dyson)));
            }
        }
        Family::Dyson if initial.is_symmetric() => {
            let w0 = symmetric_cumulants(initial, 2 * k + 2);
            let wt = r_evolve_dyson(&w0, t);
            let dyson = dyson_s_residual(&s_symmetric_of(&wt)?, &s_symmetric_of(&w0)?, t)?;
            let pair = ChiralPair::from_nonneg(square_cumulants(&w0), T::one(), t);
            let (multiple, wishart, chiral) = pair.residuals(T::one(), t)?;
            out.dyson = Some(f64_of(dyson.max_abs()));
            out.multiple = Some(f64_of(multiple));
            out.wishart = Some(f64_of(wishart));
            out.chiral = Some(f64_of(chiral.max_abs()));
            out.reduction = Some(f64_of(chiral.max_abs_diff(&dyson)));
        }
        Family::Dyson => {
            let w0 = r_series(initial, k + 1);
            let wt = r_evolve_dyson(&w0, t);
            let dyson = dyson_s_residual(&s_from_cumulants(&wt)?, &s_from_cumulants(&w0)?, t)?;
            out.dyson = Some(f64_of(dyson.max_abs()));
        }
    }
    Ok(out)
}

fn symmetric_cumulants<T: Scalar>(mu: &MeasureSpec<T>, k: usize) -> CumulantSequence<T> {
    let mut kappa = r_series(mu, k);
    for n in (1..=k).step_by(2) {
        kappa.values[n - 1] = T::zero();
    }
    kappa
}

/// Moments `τ_1..τ_k` from a Cauchy transform by the trapezoid rule on the
/// circle `|z| = radius`, which must enclose the support:
/// `τ_n = (1/2πi) ∮ z^n G(z) dz`. The lower half uses `G(z̄) = conj G(z)`.
pub fn contour_moments<T: Scalar>(
    field: &dyn CauchyField<T>,
    k: usize,
    radius: T,
    nodes: usize,
) -> Result<MomentSequence<T>> {
    if !(radius > T::zero()) || nodes < 2 * k + 2 {
        return Err(Error::InvalidParameter(format!("radius {radius} with {nodes} nodes")));
    }
    let m = T::from_count(nodes);
    let values: Vec<(Complex<T>, Complex<T>)> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = T::PI() * (T::from_count(j) + T::half()) / m;
            let z = Complex::from_polar(radius, theta);
            eval_reflected(field, z).map(|g| (z, g))
        })
        .collect::<Result<_>>()?;
    let tau = (1..=k)
        .map(|n| {
            let sum = values.iter().fold(T::zero(), |acc, &(z, g)| acc + (z.powu(n as u32 + 1) * g).re);
            sum / m
        })
        .collect();
    Ok(MomentSequence::new(tau))
}
