//! Pointwise solution of the functional equations by continuation in `t`.
//!
//! Each family is written through the starting point `v` of its
//! characteristic curve, `Φ(v) = 0` with `v ∈ ℂ⁺`:
//!
//! * Dyson: `Φ(ω) = ω + t G0(ω) - z`, `g = G0(ω)`.
//! * Wishart: `Φ(w) = w (1 + t G0(w))² - (1-λ) t (1 + t G0(w)) - z`,
//!   `g = G0(w) / (1 + t G0(w))`.
//!
//! Newton steps on `Φ` are accepted while they keep `v` in `ℂ⁺`, keep `g`
//! inside the Nevanlinna bound `-Im g ≥ Im z |g|²` and reduce `|Φ|`; the
//! damped fixed-point map takes over otherwise.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transforms::cauchy::{check_upper, eval_reflected, CauchyField, FieldKind, SharedField, SquaredField, SymmetrizedField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Residual at which iteration stops.
    pub target: f64,
    /// Largest residual of an accepted point.
    pub accept: f64,
    pub max_iter: usize,
    /// Initial damping of the fixed-point map.
    pub theta: f64,
    /// Consecutive step halvings allowed in the continuation.
    pub max_refinements: usize,
    /// Corrector calls allowed per point, over both continuation phases.
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { target: 1e-12, accept: 1e-10, max_iter: 200, theta: 0.5, max_refinements: 8, max_steps: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSolution<T> {
    pub g: Complex<T>,
    /// Starting point of the characteristic through `z`.
    pub v: Complex<T>,
    /// Residual of the functional equation written for `g`.
    pub residual: T,
    pub continuation_steps: usize,
}

/// Functional equation in a characteristic variable `v`.
pub(crate) trait Characteristic<T: Scalar> {
    fn start(&self, z: Complex<T>) -> Result<Complex<T>>;
    /// `(Φ(v), Φ'(v))`.
    fn phi(&self, t: T, z: Complex<T>, v: Complex<T>) -> Result<(Complex<T>, Complex<T>)>;
    /// Fixed-point map whose fixed points are the zeros of `Φ`.
    fn map(&self, t: T, z: Complex<T>, v: Complex<T>) -> Result<Complex<T>>;
    fn g(&self, t: T, z: Complex<T>, v: Complex<T>) -> Result<Complex<T>>;
    /// Residual of the equation in its `g` form.
    fn residual(&self, t: T, z: Complex<T>, v: Complex<T>) -> Result<T>;
    /// Whether `v` must lie in `ℂ⁺`.
    fn upper_variable(&self) -> bool {
        true
    }
}

fn nevanlinna_ok<T: Scalar>(z: Complex<T>, g: Complex<T>) -> bool {
    let slack = T::lit(1e-9);
    g.im < T::zero() && -g.im >= z.im * g.norm_sqr() * (T::one() - slack) - slack * g.norm()
}

enum Failure {
    Diverged,
    Escaped,
}

fn admissible<T: Scalar, C: Characteristic<T> + ?Sized>(c: &C, t: T, z: Complex<T>, v: Complex<T>) -> bool {
    if !(v.re.is_finite() && v.im.is_finite()) {
        return false;
    }
    if c.upper_variable() && !(v.im > T::zero()) {
        return false;
    }
    match c.g(t, z, v) {
        Ok(g) => nevanlinna_ok(z, g),
        Err(_) => false,
    }
}

/// Newton with fixed-point fallback at a fixed `t`.
fn correct<T: Scalar, C: Characteristic<T> + ?Sized>(
    c: &C,
    t: T,
    z: Complex<T>,
    v0: Complex<T>,
    opts: &SolverOptions,
) -> std::result::Result<(Complex<T>, T), Failure> {
    let target = T::lit(opts.target);
    let mut v = v0;
    let phi_norm = |v: Complex<T>| c.phi(t, z, v).map(|p| p.0.norm()).ok().filter(|x| x.is_finite());
    let mut size = phi_norm(v).ok_or(Failure::Escaped)?;
    let mut escaped = false;
    for _ in 0..opts.max_iter {
        let res = c.residual(t, z, v).map_err(|_| Failure::Escaped)?;
        let (phi, dphi) = c.phi(t, z, v).map_err(|_| Failure::Escaped)?;
        let newton = v - phi / dphi;
        if res <= target {
            // One more Newton step takes the root to rounding level.
            if admissible(c, t, z, newton) && phi_norm(newton).is_some_and(|s| s < size) {
                if let Ok(r) = c.residual(t, z, newton) {
                    return Ok((newton, r));
                }
            }
            return Ok((v, res));
        }
        if admissible(c, t, z, newton) {
            if let Some(s) = phi_norm(newton) {
                if s < size || s == T::zero() {
                    v = newton;
                    size = s;
                    continue;
                }
            }
        }
        let target_v = match c.map(t, z, v) {
            Ok(m) => m,
            Err(_) => {
                escaped = true;
                break;
            }
        };
        let mut theta = T::lit(opts.theta);
        let mut moved = false;
        for _ in 0..12 {
            let cand = v * (T::one() - theta) + target_v * theta;
            if admissible(c, t, z, cand) {
                if let Some(s) = phi_norm(cand) {
                    if s < size {
                        v = cand;
                        size = s;
                        moved = true;
                        break;
                    }
                }
            } else {
                escaped = true;
            }
            theta = theta * T::half();
        }
        if !moved {
            // Progress stalled at rounding level: keep the point if it passes.
            let res = c.residual(t, z, v).map_err(|_| Failure::Escaped)?;
            if res <= T::lit(opts.accept) {
                return Ok((v, res));
            }
            break;
        }
    }
    let res = c.residual(t, z, v).map_err(|_| Failure::Escaped)?;
    if res <= T::lit(opts.accept) {
        return Ok((v, res));
    }
    Err(if escaped { Failure::Escaped } else { Failure::Diverged })
}

/// Height at which the continuation in `t` runs before descending to `z`.
pub const CONTINUATION_HEIGHT: f64 = 1.0;

fn step_failure<T: Scalar>(fail: Failure, at: String) -> Error {
    match fail {
        Failure::Escaped => Error::DomainEscape(at),
        Failure::Diverged => Error::SolverFailed { z: at, reason: "no convergence at the finest step".into() },
    }
}

/// Follows the solution from `t = 0` to `t` at `Re z + i max(Im z, 1)`,
/// halving the step on failure and growing it by half after each success,
/// then descends vertically to `z` at the final time. Near the real axis
/// the roots of `Φ` come close together as `t` varies, while along the
/// descent the solution is analytic in `z`.
pub(crate) fn continue_in_t<T: Scalar, C: Characteristic<T> + ?Sized>(
    c: &C,
    t: T,
    z: Complex<T>,
    opts: &SolverOptions,
) -> Result<PointSolution<T>> {
    check_upper(z)?;
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    if t == T::zero() {
        let v = c.start(z)?;
        return Ok(PointSolution { g: c.g(t, z, v)?, v, residual: c.residual(t, z, v)?, continuation_steps: 0 });
    }
    let high = Complex::new(z.re, z.im.max(T::lit(CONTINUATION_HEIGHT)));
    let mut budget = opts.max_steps;
    let (mut v, mut residual, mut steps) = track_in_t(c, t, high, opts, &mut budget)?;

    let mut y = high.im;
    let mut ratio = T::half();
    let mut refinements = 0;
    while y > z.im {
        let next = (y * ratio).max(z.im);
        if next >= y {
            return Err(Error::SolverFailed { z: format!("{z} at height {y}"), reason: "descent step underflow".into() });
        }
        spend(&mut budget, || format!("{z} at height {y}"))?;
        match correct(c, t, Complex::new(z.re, next), v, opts) {
            Ok((nv, res)) => {
                v = nv;
                residual = res;
                y = next;
                steps += 1;
                refinements = 0;
                ratio = (ratio * ratio).max(T::lit(0.25));
            }
            Err(fail) => {
                refinements += 1;
                if refinements > opts.max_refinements {
                    return Err(step_failure::<T>(fail, format!("{z} at height {next}")));
                }
                ratio = (ratio + T::one()) * T::half();
            }
        }
    }
    Ok(PointSolution { g: c.g(t, z, v)?, v, residual, continuation_steps: steps })
}

fn spend(budget: &mut usize, at: impl FnOnce() -> String) -> Result<()> {
    if *budget == 0 {
        return Err(Error::SolverFailed { z: at(), reason: "continuation step budget exhausted".into() });
    }
    *budget -= 1;
    Ok(())
}

fn track_in_t<T: Scalar, C: Characteristic<T> + ?Sized>(
    c: &C,
    t: T,
    z: Complex<T>,
    opts: &SolverOptions,
    budget: &mut usize,
) -> Result<(Complex<T>, T, usize)> {
    let mut v = c.start(z)?;
    // The characteristic moves by about t|G| while the singular set is Im z away.
    let mut dt = T::lit(0.1).min(t / T::lit(10.0));
    let g_start = c.g(T::zero(), z, v)?.norm();
    if g_start > T::zero() {
        dt = dt.min(z.im / g_start);
    }
    let mut now = T::zero();
    let mut steps = 0;
    let mut refinements = 0;
    let mut residual = T::zero();
    while now < t {
        let next = if now + dt >= t * (T::one() - T::epsilon()) { t } else { now + dt };
        if next <= now {
            return Err(Error::SolverFailed { z: format!("{z} at t = {now}"), reason: "continuation step underflow".into() });
        }
        spend(budget, || format!("{z} at t = {now}"))?;
        match correct(c, next, z, v, opts) {
            Ok((nv, res)) => {
                v = nv;
                residual = res;
                now = next;
                steps += 1;
                refinements = 0;
                dt = dt * T::lit(1.5);
            }
            Err(fail) => {
                refinements += 1;
                if refinements > opts.max_refinements {
                    return Err(step_failure::<T>(fail, format!("{z} at t = {next}")));
                }
                dt = dt * T::half();
            }
        }
    }
    Ok((v, residual, steps))
}

pub(crate) struct Dyson<'a, T: Scalar> {
    pub g0: &'a dyn CauchyField<T>,
}

impl<T: Scalar> Characteristic<T> for Dyson<'_, T> {
    fn start(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(z)
    }

    fn phi(&self, t: T, z: Complex<T>, w: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        let g = self.g0.eval(w)?;
        let dg = self.g0.derivative(w)?;
        Ok((w + g * t - z, dg * t + T::one()))
    }

    fn map(&self, t: T, z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
        Ok(z - self.g0.eval(w)? * t)
    }

    fn g(&self, _t: T, _z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
        self.g0.eval(w)
    }

    fn residual(&self, t: T, z: Complex<T>, w: Complex<T>) -> Result<T> {
        let g = self.g0.eval(w)?;
        Ok((g - eval_reflected(self.g0, z - g * t)?).norm())
    }
}

pub(crate) struct Wishart<'a, T: Scalar> {
    pub g0: &'a dyn CauchyField<T>,
    pub lambda: T,
}

impl<T: Scalar> Characteristic<T> for Wishart<'_, T> {
    fn start(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(z)
    }

    fn phi(&self, t: T, z: Complex<T>, w: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        let g = self.g0.eval(w)?;
        let dg = self.g0.derivative(w)?;
        let b = g * t + T::one();
        let c = (T::one() - self.lambda) * t;
        let phi = w * b * b - b * c - z;
        let dphi = b * b + w * b * dg * (T::two() * t) - dg * (c * t);
        Ok((phi, dphi))
    }

    fn map(&self, t: T, z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
        let b = self.g0.eval(w)? * t + T::one();
        Ok((z + b * ((T::one() - self.lambda) * t)) / (b * b))
    }

    fn g(&self, t: T, _z: Complex<T>, w: Complex<T>) -> Result<Complex<T>> {
        let g0 = self.g0.eval(w)?;
        Ok(g0 / (g0 * t + T::one()))
    }

    /// `|Φ(w)|` relative to the size of its terms. The `g` form
    /// `|1/g - t - 1/G0(u)|` loses accuracy like `1/|b|²` as
    /// `b = 1 + t G0(w) → 0`, which is where an atom at the origin forms.
    fn residual(&self, t: T, z: Complex<T>, w: Complex<T>) -> Result<T> {
        let b = self.g0.eval(w)? * t + T::one();
        let (quad, lin) = (w * b * b, b * ((T::one() - self.lambda) * t));
        Ok((quad - lin - z).norm() / (quad.norm() + lin.norm() + z.norm()))
    }
}

pub(crate) struct ChiralDirect<'a, T: Scalar> {
    pub g0: &'a dyn CauchyField<T>,
    pub lambda: T,
}

impl<T: Scalar> ChiralDirect<'_, T> {
    fn rhs(&self, t: T, z: Complex<T>, g: Complex<T>) -> Result<Complex<T>> {
        let a = Complex::new(T::one(), T::zero()) - g * t / z;
        self.rhs_at(t, z, a * (a * z * z + (T::one() - self.lambda) * t))
    }

    /// `1 / (t/z + s/(z G0(s)))` with `s = √u`.
    fn rhs_at(&self, t: T, z: Complex<T>, u: Complex<T>) -> Result<Complex<T>> {
        let s = u.sqrt();
        let h = eval_reflected(self.g0, s)?;
        Ok((Complex::new(t, T::zero()) / z + s / (z * h)).inv())
    }
}

impl<T: Scalar> Characteristic<T> for ChiralDirect<'_, T> {
    fn start(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.g0.eval(z)
    }

    fn phi(&self, t: T, z: Complex<T>, g: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        let f = self.rhs(t, z, g)?;
        let h = Complex::new(T::zero(), T::lit(1e-7) * (T::one() + g.norm()));
        let fh = self.rhs(t, z, g + h)?;
        Ok((g - f, Complex::new(T::one(), T::zero()) - (fh - f) / h))
    }

    fn map(&self, t: T, z: Complex<T>, g: Complex<T>) -> Result<Complex<T>> {
        self.rhs(t, z, g)
    }

    fn g(&self, _t: T, _z: Complex<T>, g: Complex<T>) -> Result<Complex<T>> {
        Ok(g)
    }

    fn residual(&self, t: T, z: Complex<T>, g: Complex<T>) -> Result<T> {
        Ok((g.inv() - self.rhs(t, z, g)?.inv()).norm())
    }

    fn upper_variable(&self) -> bool {
        false
    }
}

/// `G(z)` with `g = G0(z - t g)`.
pub fn solve_dyson_point<T: Scalar>(g0: &dyn CauchyField<T>, t: T, z: Complex<T>) -> Result<Complex<T>> {
    Ok(solve_dyson_detailed(g0, t, z, &SolverOptions::default())?.g)
}

pub fn solve_dyson_detailed<T: Scalar>(
    g0: &dyn CauchyField<T>,
    t: T,
    z: Complex<T>,
    opts: &SolverOptions,
) -> Result<PointSolution<T>> {
    continue_in_t(&Dyson { g0 }, t, z, opts)
}

/// `G(z)` with `1/g = t + 1/G0((1 - t g){(1-λ) t + (1 - t g) z})`.
pub fn solve_wishart_point<T: Scalar>(g0: &dyn CauchyField<T>, lambda: T, t: T, z: Complex<T>) -> Result<Complex<T>> {
    Ok(solve_wishart_detailed(g0, lambda, t, z, &SolverOptions::default())?.g)
}

pub fn solve_wishart_detailed<T: Scalar>(
    g0: &dyn CauchyField<T>,
    lambda: T,
    t: T,
    z: Complex<T>,
    opts: &SolverOptions,
) -> Result<PointSolution<T>> {
    check_lambda(lambda)?;
    continue_in_t(&Wishart { g0, lambda }, t, z, opts)
}

pub(crate) fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if lambda >= T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda {lambda}")))
    }
}

/// Symmetric-family `G(z)` computed as `z G_m(z²)`, where `m` is the
/// Wishart evolution of the square push-forward of the initial measure.
/// `g0` is the Cauchy transform of the symmetric initial measure.
pub fn solve_chiral_point<T: Scalar>(g0: SharedField<T>, lambda: T, t: T, z: Complex<T>) -> Result<Complex<T>> {
    Ok(solve_chiral_detailed(g0, lambda, t, z, &SolverOptions::default())?.g)
}

pub fn solve_chiral_detailed<T: Scalar>(
    g0: SharedField<T>,
    lambda: T,
    t: T,
    z: Complex<T>,
    opts: &SolverOptions,
) -> Result<PointSolution<T>> {
    check_lambda(lambda)?;
    check_upper(z)?;
    if t == T::zero() {
        let g = g0.eval(z)?;
        return Ok(PointSolution { g, v: g, residual: T::zero(), continuation_steps: 0 });
    }
    let squared = SquaredField::new(g0.clone());
    let zeta = lift_square(z);
    let reflect = zeta.im < T::zero();
    let zeta = if reflect { zeta.conj() } else { zeta };
    let wishart = Wishart { g0: &squared, lambda };
    let sol = continue_in_t(&wishart, t, zeta, opts)?;
    let gm = if reflect { sol.g.conj() } else { sol.g };
    Ok(PointSolution { g: z * gm, v: sol.v, residual: sol.residual, continuation_steps: sol.continuation_steps })
}

/// `z²`, nudged off the real axis when `Re z = 0`.
fn lift_square<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let zz = if z.re == T::zero() { Complex::new(z.norm() * T::lit(1e-12), z.im) } else { z };
    zz * zz
}

/// Verifier for the symmetric family: damped iteration on the equation in
/// `g` without passing to the square push-forward.
pub fn solve_chiral_direct<T: Scalar>(
    g0: &dyn CauchyField<T>,
    lambda: T,
    t: T,
    z: Complex<T>,
    opts: &SolverOptions,
) -> Result<PointSolution<T>> {
    check_lambda(lambda)?;
    continue_in_t(&ChiralDirect { g0, lambda }, t, z, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family<T> {
    Dyson,
    Wishart { lambda: T },
    Chiral { lambda: T },
}

impl<T: Scalar> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Dyson => "dyson",
            Family::Wishart { .. } => "wishart",
            Family::Chiral { .. } => "chiral",
        }
    }

    pub fn lambda(&self) -> Option<T> {
        match *self {
            Family::Dyson => None,
            Family::Wishart { lambda } | Family::Chiral { lambda } => Some(lambda),
        }
    }
}

/// `G` of the evolved measure at time `t`, solved pointwise on demand.
pub struct FixedPointField<T: Scalar> {
    family: Family<T>,
    g0: SharedField<T>,
    t: T,
    opts: SolverOptions,
}

impl<T: Scalar> FixedPointField<T> {
    pub fn new(family: Family<T>, g0: SharedField<T>, t: T, opts: SolverOptions) -> Self {
        Self { family, g0, t, opts }
    }

    pub fn shared(family: Family<T>, g0: SharedField<T>, t: T, opts: SolverOptions) -> SharedField<T> {
        Arc::new(Self::new(family, g0, t, opts))
    }

    pub fn solve(&self, z: Complex<T>) -> Result<PointSolution<T>> {
        solve_family(self.family, self.g0.clone(), self.t, z, &self.opts)
    }
}

pub fn solve_family<T: Scalar>(
    family: Family<T>,
    g0: SharedField<T>,
    t: T,
    z: Complex<T>,
    opts: &SolverOptions,
) -> Result<PointSolution<T>> {
    match family {
        Family::Dyson => solve_dyson_detailed(g0.as_ref(), t, z, opts),
        Family::Wishart { lambda } => solve_wishart_detailed(g0.as_ref(), lambda, t, z, opts),
        Family::Chiral { lambda } => solve_chiral_detailed(g0, lambda, t, z, opts),
    }
}

impl<T: Scalar> CauchyField<T> for FixedPointField<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.solve(z)?.g)
    }

    fn kind(&self) -> FieldKind {
        FieldKind::FixedPoint
    }
}

/// The chiral field through the symmetrization of a Wishart field, for
/// callers that already hold the square push-forward's transform.
pub fn chiral_from_wishart<T: Scalar>(nu0: SharedField<T>, lambda: T, t: T, opts: SolverOptions) -> SharedField<T> {
    Arc::new(SymmetrizedField::new(FixedPointField::shared(Family::Wishart { lambda }, nu0, t, opts)))
}
