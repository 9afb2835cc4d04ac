//! Cauchy transforms `G(z) = ∫ μ(dx)/(z - x)` on the upper half-plane.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::measures::{self, MeasureSpec};
use crate::scalar::Scalar;
use crate::series::{moments_to_cumulants, CumulantSequence, MomentSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    ClosedForm,
    Quadrature,
    FixedPoint,
}

/// Evaluator of a Cauchy transform on `ℂ⁺`. Evaluation is logically pure
/// and safe to call from several threads.
pub trait CauchyField<T: Scalar>: Send + Sync {
    /// `G(z)` for `Im z > 0`.
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>>;

    /// `G'(z)`; the default is a central difference along the real axis with
    /// a step well inside the distance `Im z` to the support.
    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        let h = z.im * T::lit(1e-4);
        let dz = Complex::new(h, T::zero());
        Ok((self.eval(z + dz)? - self.eval(z - dz)?) / (T::two() * h))
    }

    fn kind(&self) -> FieldKind;
}

pub type SharedField<T> = Arc<dyn CauchyField<T>>;

pub(crate) fn check_upper<T: Scalar>(z: Complex<T>) -> Result<()> {
    if z.im > T::zero() && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!("{z}")))
    }
}

/// `G(z)` extended to the lower half-plane by `G(z̄) = conj G(z)`.
pub fn eval_reflected<T: Scalar>(field: &dyn CauchyField<T>, z: Complex<T>) -> Result<Complex<T>> {
    if z.im < T::zero() {
        Ok(field.eval(z.conj())?.conj())
    } else {
        field.eval(z)
    }
}

fn derivative_reflected<T: Scalar>(field: &dyn CauchyField<T>, z: Complex<T>) -> Result<Complex<T>> {
    if z.im < T::zero() {
        Ok(field.derivative(z.conj())?.conj())
    } else {
        field.derivative(z)
    }
}

/// `√(z - a) √(z - b)` with principal roots: behaves like `z` at infinity
/// and has its cut on `[a, b]`.
fn edge_root<T: Scalar>(z: Complex<T>, a: T, b: T) -> Complex<T> {
    (z - a).sqrt() * (z - b).sqrt()
}

/// Cauchy transforms with explicit formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm<T> {
    Dirac { b: T },
    Bernoulli { a: T },
    Semicircle { t: T },
    MarcenkoPastur { lambda: T, t: T },
}

impl<T: Scalar> ClosedForm<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            ClosedForm::Dirac { b } if !b.is_finite() => bad(format!("dirac location {b}")),
            ClosedForm::Bernoulli { a } if !(a > T::zero()) => bad(format!("bernoulli needs a > 0, got {a}")),
            ClosedForm::Semicircle { t } if !(t > T::zero()) => bad(format!("semicircle needs t > 0, got {t}")),
            ClosedForm::MarcenkoPastur { lambda, t } if !(lambda >= T::zero() && t > T::zero()) => {
                bad(format!("marcenko-pastur needs lambda >= 0, t > 0; got {lambda}, {t}"))
            }
            _ => Ok(()),
        }
    }

    /// The measure this transform belongs to, on the default grid.
    pub fn measure(&self) -> Result<MeasureSpec<T>> {
        self.measure_on(measures::DEFAULT_GRID)
    }

    pub fn measure_on(&self, nodes: usize) -> Result<MeasureSpec<T>> {
        match *self {
            ClosedForm::Dirac { b } => Ok(measures::make_dirac(b)),
            ClosedForm::Bernoulli { a } => measures::make_bernoulli(a),
            ClosedForm::Semicircle { t } => measures::make_semicircle_on(t, nodes),
            ClosedForm::MarcenkoPastur { lambda, t } => measures::make_marcenko_pastur_on(lambda, t, nodes),
        }
    }

    /// Free cumulants `κ_1..κ_K` from the exact moments or cumulants.
    pub fn cumulants(&self, k: usize) -> CumulantSequence<T> {
        match *self {
            ClosedForm::Dirac { b } => CumulantSequence::new((1..=k).map(|n| if n == 1 { b } else { T::zero() }).collect()),
            ClosedForm::Bernoulli { a } => moments_to_cumulants(&MomentSequence::new(
                (1..=k).map(|n| if n % 2 == 0 { a.powi(n as i32) } else { T::zero() }).collect(),
            )),
            ClosedForm::Semicircle { t } => CumulantSequence::new((1..=k).map(|n| if n == 2 { t } else { T::zero() }).collect()),
            ClosedForm::MarcenkoPastur { lambda, t } => CumulantSequence::new((1..=k).map(|n| lambda * t.powi(n as i32)).collect()),
        }
    }

    fn mp_edges(lambda: T, t: T) -> (T, T) {
        let s = lambda.sqrt();
        (t * (T::one() - s).powi(2), t * (T::one() + s).powi(2))
    }
}

impl<T: Scalar> ClosedForm<T> {
    /// Semicircle and Marcenko–Pastur transforms are `2 / D(z)`; returns
    /// `(D, D')`. Rationalizing the usual `z - √…` numerator keeps full
    /// relative accuracy for large `|z|`.
    fn denominator(&self, z: Complex<T>) -> Option<(Complex<T>, Complex<T>)> {
        let one = Complex::new(T::one(), T::zero());
        match *self {
            ClosedForm::Semicircle { t } => {
                let r = T::two() * t.sqrt();
                let s = edge_root(z, -r, r);
                Some((z + s, one + z / s))
            }
            ClosedForm::MarcenkoPastur { lambda, t } => {
                let (xm, xp) = Self::mp_edges(lambda, t);
                let s = edge_root(z, xp, xm);
                Some((z + t * (T::one() - lambda) + s, one + (z * T::two() - (xm + xp)) / (s * T::two())))
            }
            _ => None,
        }
    }
}

impl<T: Scalar> CauchyField<T> for ClosedForm<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        check_upper(z)?;
        let one = Complex::new(T::one(), T::zero());
        Ok(match *self {
            ClosedForm::Dirac { b } => one / (z - b),
            ClosedForm::Bernoulli { a } => z / (z * z - a * a),
            ClosedForm::Semicircle { .. } | ClosedForm::MarcenkoPastur { .. } => {
                let (d, _) = self.denominator(z).expect("algebraic form");
                one * T::two() / d
            }
        })
    }

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        check_upper(z)?;
        let one = Complex::new(T::one(), T::zero());
        Ok(match *self {
            ClosedForm::Dirac { b } => -one / ((z - b) * (z - b)),
            ClosedForm::Bernoulli { a } => {
                let d = z * z - a * a;
                -(z * z + a * a) / (d * d)
            }
            ClosedForm::Semicircle { .. } | ClosedForm::MarcenkoPastur { .. } => {
                let (d, dd) = self.denominator(z).expect("algebraic form");
                -dd * T::two() / (d * d)
            }
        })
    }

    fn kind(&self) -> FieldKind {
        FieldKind::ClosedForm
    }
}

/// Cauchy transform of a [`MeasureSpec`]: atoms exactly, the
/// piecewise-linear density by product integration on each grid cell.
#[derive(Debug, Clone)]
pub struct QuadratureField<T: Scalar> {
    measure: MeasureSpec<T>,
}

impl<T: Scalar> QuadratureField<T> {
    pub fn new(measure: MeasureSpec<T>) -> Self {
        Self { measure }
    }

    pub fn measure(&self) -> &MeasureSpec<T> {
        &self.measure
    }
}

/// `∫_a^{a+h} (ρa + (ρb - ρa)(x - a)/h) / (z - x) dx`.
fn linear_segment<T: Scalar>(z: Complex<T>, a: T, h: T, ra: T, rb: T) -> Complex<T> {
    let za = z - a;
    let s = Complex::new(h, T::zero()) / za;
    let (l, lin) = if s.norm() < T::lit(0.1) {
        // L = Σ s^k/k and (z-a)L - h = h Σ s^k/(k+1), summed from the tail.
        let mut l = Complex::new(T::zero(), T::zero());
        let mut m = Complex::new(T::zero(), T::zero());
        for k in (1..=18).rev() {
            let kf = T::from_count(k);
            l = (l + T::one() / kf) * s;
            m = (m + T::one() / (kf + T::one())) * s;
        }
        (l, m * h)
    } else {
        let l = (za / (z - (a + h))).ln();
        (l, za * l - h)
    };
    l * ra + lin * ((rb - ra) / h)
}

impl<T: Scalar> CauchyField<T> for QuadratureField<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        check_upper(z)?;
        let mut g = Complex::new(T::zero(), T::zero());
        for &(x, w) in self.measure.atoms() {
            g += Complex::new(w, T::zero()) / (z - x);
        }
        if let Some(d) = self.measure.density() {
            let h = d.step();
            for i in 0..d.len() - 1 {
                let (ra, rb) = (d.values[i], d.values[i + 1]);
                if ra == T::zero() && rb == T::zero() {
                    continue;
                }
                g += linear_segment(z, d.node(i), h, ra, rb);
            }
        }
        Ok(g)
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Quadrature
    }
}

/// Cauchy transform of the symmetric measure `μ` with `μ^{(2)} = ν`, built
/// from a field of `ν`: `G_μ(z) = z G_ν(z²)`. When `z²` lands in the lower
/// half-plane the reflection `G_ν(z̄) = conj G_ν(z)` is used.
#[derive(Clone)]
pub struct SymmetrizedField<T: Scalar> {
    inner: SharedField<T>,
}

impl<T: Scalar> SymmetrizedField<T> {
    pub fn new(nu_field: SharedField<T>) -> Self {
        Self { inner: nu_field }
    }

    /// On the imaginary axis `z²` is real and negative; the point is moved
    /// right by `1e-12 |z|` so that `z²` has a tiny positive imaginary part.
    fn square(z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let z = if z.re == T::zero() { Complex::new(z.norm() * T::lit(1e-12), z.im) } else { z };
        (z, z * z)
    }
}

impl<T: Scalar> CauchyField<T> for SymmetrizedField<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        check_upper(z)?;
        let (z, w) = Self::square(z);
        Ok(z * eval_reflected(self.inner.as_ref(), w)?)
    }

    fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        check_upper(z)?;
        let (_, w) = Self::square(z);
        let g = eval_reflected(self.inner.as_ref(), w)?;
        let dg = derivative_reflected(self.inner.as_ref(), w)?;
        Ok(g + w * dg * T::two())
    }

    fn kind(&self) -> FieldKind {
        self.inner.kind()
    }
}

/// Cauchy transform of `ν = μ^{(2)}` from a field of the symmetric measure
/// `μ`: `G_ν(ζ) = G_μ(√ζ)/√ζ` with the principal root, which maps `ℂ⁺` into
/// the first quadrant.
#[derive(Clone)]
pub struct SquaredField<T: Scalar> {
    inner: SharedField<T>,
}

impl<T: Scalar> SquaredField<T> {
    pub fn new(mu_field: SharedField<T>) -> Self {
        Self { inner: mu_field }
    }
}

impl<T: Scalar> CauchyField<T> for SquaredField<T> {
    fn eval(&self, zeta: Complex<T>) -> Result<Complex<T>> {
        check_upper(zeta)?;
        let w = zeta.sqrt();
        Ok(self.inner.eval(w)? / w)
    }

    fn derivative(&self, zeta: Complex<T>) -> Result<Complex<T>> {
        check_upper(zeta)?;
        let w = zeta.sqrt();
        let g = self.inner.eval(w)?;
        let dg = self.inner.derivative(w)?;
        Ok((dg * w - g) / (w * w * w * T::two()))
    }

    fn kind(&self) -> FieldKind {
        self.inner.kind()
    }
}

/// Pointwise Cauchy transform of a measure.
pub fn cauchy_eval<T: Scalar>(mu: &MeasureSpec<T>, z: Complex<T>) -> Result<Complex<T>> {
    check_upper(z)?;
    QuadratureField::new(mu.clone()).eval(z)
}

/// Field of the symmetric measure whose square push-forward has field
/// `nu_field`.
pub fn cauchy_from_square_pushforward<T: Scalar>(nu_field: SharedField<T>) -> SharedField<T> {
    Arc::new(SymmetrizedField::new(nu_field))
}
