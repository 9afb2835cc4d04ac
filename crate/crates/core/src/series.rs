//! Truncated power-series algebra and the free moment/cumulant recursions.
//!
//! A [`TruncatedSeries`] of order `K` stores `c_0..=c_K`; every operation
//! returns a series of the same order and drops higher powers. Binary
//! operations on series of different orders truncate to the smaller one.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default truncation order for generating functions.
pub const DEFAULT_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TruncatedSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> TruncatedSeries<T> {
    /// Builds a series from `c_0..=c_K`. An empty vector is the zero series
    /// of order 0.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        Self { coeffs: vec![T::zero(); order + 1] }
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coeffs[0] = c;
        s
    }

    /// The identity series `z`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(T::one(), 1, order)
    }

    pub fn monomial(c: T, power: usize, order: usize) -> Self {
        let mut s = Self::zeros(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize) -> T) -> Self {
        Self { coeffs: (0..=order).map(f).collect() }
    }

    /// `1 / (1 - a z) = sum_n a^n z^n`.
    pub fn geometric(a: T, order: usize) -> Self {
        let mut acc = T::one();
        Self::from_fn(order, |_| {
            let c = acc;
            acc *= a;
            c
        })
    }

    /// Binomial series `(1 + a z)^p`.
    pub fn binomial(a: T, p: T, order: usize) -> Self {
        let mut c = T::one();
        Self::from_fn(order, |n| {
            if n > 0 {
                let nf = T::from_count(n);
                c = c * (p - nf + T::one()) / nf * a;
            }
            c
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `z^n`; zero beyond the truncation order.
    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).copied().unwrap_or_else(T::zero)
    }

    pub fn set_coeff(&mut self, n: usize, c: T) {
        if n <= self.order() {
            self.coeffs[n] = c;
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::from_fn(order, |n| self.coeff(n))
    }

    pub fn scale(&self, a: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * a).collect() }
    }

    pub fn add_constant(&self, a: T) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += a;
        s
    }

    /// Multiplies by `z`, dropping the top coefficient.
    pub fn shift_up(&self) -> Self {
        Self::from_fn(self.order(), |n| if n == 0 { T::zero() } else { self.coeffs[n - 1] })
    }

    /// Divides by `z`. The top coefficient of the result is unknown and set
    /// to zero, so the order is reduced by one. Requires `c_0 = 0` up to `tol`.
    pub fn shift_down(&self, tol: T) -> Result<Self> {
        if self.coeffs[0].abs() > tol {
            return Err(Error::InvalidInput(format!(
                "cannot divide by z: constant term {}",
                self.coeffs[0]
            )));
        }
        let order = self.order().saturating_sub(1);
        Ok(Self::from_fn(order, |n| self.coeff(n + 1)))
    }

    /// Substitutes `z -> a z`.
    pub fn dilate(&self, a: T) -> Self {
        let mut p = T::one();
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| {
                    let v = c * p;
                    p *= a;
                    v
                })
                .collect(),
        }
    }

    /// Multiplicative inverse; requires `c_0 != 0`.
    pub fn recip(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == T::zero() {
            return Err(Error::InvalidInput("reciprocal of a series with zero constant term".into()));
        }
        let k = self.order();
        let mut out = vec![T::zero(); k + 1];
        out[0] = T::one() / c0;
        for n in 1..=k {
            let mut s = T::zero();
            for j in 1..=n {
                s += self.coeffs[j] * out[n - j];
            }
            out[n] = -s / c0;
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    pub fn powi(&self, k: usize) -> Self {
        let mut acc = Self::constant(T::one(), self.order());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Sum of `c_n x^n` (Horner).
    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    /// Largest coefficient-wise distance, over the common order.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let k = self.order().min(other.order());
        (0..=k).fold(T::zero(), |m, n| m.max((self.coeffs[n] - other.coeffs[n]).abs()))
    }
}

impl<T: Scalar> Add for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn add(self, rhs: Self) -> TruncatedSeries<T> {
        let k = self.order().min(rhs.order());
        TruncatedSeries::from_fn(k, |n| self.coeffs[n] + rhs.coeffs[n])
    }
}

impl<T: Scalar> Sub for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn sub(self, rhs: Self) -> TruncatedSeries<T> {
        let k = self.order().min(rhs.order());
        TruncatedSeries::from_fn(k, |n| self.coeffs[n] - rhs.coeffs[n])
    }
}

impl<T: Scalar> Mul for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn mul(self, rhs: Self) -> TruncatedSeries<T> {
        let k = self.order().min(rhs.order());
        TruncatedSeries::from_fn(k, |n| {
            let mut s = T::zero();
            for j in 0..=n {
                s += self.coeffs[j] * rhs.coeffs[n - j];
            }
            s
        })
    }
}

impl<T: Scalar> Neg for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn neg(self) -> TruncatedSeries<T> {
        self.scale(-T::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for TruncatedSeries<T> {
            type Output = TruncatedSeries<T>;
            fn $m(self, rhs: Self) -> TruncatedSeries<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn constant_term_tol<T: Scalar>(g: &TruncatedSeries<T>) -> T {
    T::tol(1e-12) * (T::one() + g.max_abs())
}

/// `f(g(z))` truncated to the common order. `g` must have no constant term.
pub fn compose<T: Scalar>(f: &TruncatedSeries<T>, g: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let g0 = g.coeff(0);
    if g0.abs() > constant_term_tol(g) {
        return Err(Error::CompositionUndefined(g0.to_f64().unwrap_or(f64::NAN)));
    }
    let k = f.order().min(g.order());
    let mut inner = g.truncate(k);
    inner.set_coeff(0, T::zero());
    // Horner in the series ring: f_0 + g (f_1 + g (f_2 + ...)).
    let mut acc = TruncatedSeries::constant(f.coeff(k), k);
    for n in (0..k).rev() {
        acc = (&acc * &inner).add_constant(f.coeff(n));
    }
    Ok(acc)
}

/// Compositional inverse by the Lagrange inversion formula:
/// `[z^n] f^{<-1>} = (1/n) [w^{n-1}] (w / f(w))^n`.
pub fn lagrange_invert<T: Scalar>(f: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let k = f.order();
    if f.coeff(0).abs() > constant_term_tol(f) {
        return Err(Error::CompositionUndefined(f.coeff(0).to_f64().unwrap_or(f64::NAN)));
    }
    if f.coeff(1).abs() <= T::epsilon() * (T::one() + f.max_abs()) {
        return Err(Error::NotInvertible);
    }
    // f(w)/w truncated to order k-1, then its reciprocal h = w / f(w).
    let quotient = TruncatedSeries::from_fn(k.saturating_sub(1), |n| f.coeff(n + 1));
    let h = quotient.recip()?;
    let mut out = TruncatedSeries::zeros(k);
    let mut power = TruncatedSeries::constant(T::one(), h.order());
    for n in 1..=k {
        power = &power * &h;
        out.set_coeff(n, power.coeff(n - 1) / T::from_count(n));
    }
    Ok(out)
}

/// Square root with positive constant term; requires `c_0 > 0`.
pub fn sqrt_series<T: Scalar>(f: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let c0 = f.coeff(0);
    if !(c0 > T::zero()) {
        return Err(Error::BranchUndefined(c0.to_f64().unwrap_or(f64::NAN)));
    }
    let k = f.order();
    let mut g = vec![T::zero(); k + 1];
    g[0] = c0.sqrt();
    let two_g0 = T::two() * g[0];
    for n in 1..=k {
        let mut s = f.coeff(n);
        for j in 1..n {
            s -= g[j] * g[n - j];
        }
        g[n] = s / two_g0;
    }
    Ok(TruncatedSeries::new(g))
}

/// Moments `tau_1..tau_K` of a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MomentSequence<T> {
    pub values: Vec<T>,
}

/// Free cumulants `kappa_1..kappa_K`, the coefficients of the R-transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CumulantSequence<T> {
    pub values: Vec<T>,
}

macro_rules! sequence_common {
    ($name:ident) => {
        impl<T: Scalar> $name<T> {
            pub fn new(values: Vec<T>) -> Self {
                Self { values }
            }

            pub fn zeros(order: usize) -> Self {
                Self { values: vec![T::zero(); order] }
            }

            pub fn order(&self) -> usize {
                self.values.len()
            }

            /// The `n`-th entry, 1-based; zero beyond the order.
            pub fn get(&self, n: usize) -> T {
                if n == 0 {
                    return T::zero();
                }
                self.values.get(n - 1).copied().unwrap_or_else(T::zero)
            }

            /// Generating function `sum_{n>=1} v_n z^n` as a series of order `K`.
            pub fn to_series(&self) -> TruncatedSeries<T> {
                TruncatedSeries::from_fn(self.order(), |n| self.get(n))
            }

            /// Reads `c_1..c_K` of a series; the constant term is ignored.
            pub fn from_series(s: &TruncatedSeries<T>) -> Self {
                Self { values: (1..=s.order()).map(|n| s.coeff(n)).collect() }
            }

            pub fn truncate(&self, order: usize) -> Self {
                Self { values: (1..=order).map(|n| self.get(n)).collect() }
            }

            pub fn max_abs_diff(&self, other: &Self) -> T {
                let k = self.order().min(other.order());
                (1..=k).fold(T::zero(), |m, n| m.max((self.get(n) - other.get(n)).abs()))
            }
        }
    };
}
sequence_common!(MomentSequence);
sequence_common!(CumulantSequence);

/// `[z^j] M(z)^k` for `j <= n`, where `M = 1 + sum tau_i z^i`.
fn powers_of_moment_series<T: Scalar>(tau: &[T], n: usize) -> Vec<TruncatedSeries<T>> {
    let m = TruncatedSeries::from_fn(n, |i| if i == 0 { T::one() } else { tau.get(i - 1).copied().unwrap_or_else(T::zero) });
    let mut out = Vec::with_capacity(n + 1);
    out.push(TruncatedSeries::constant(T::one(), n));
    for k in 1..=n {
        let next = &out[k - 1] * &m;
        out.push(next);
    }
    out
}

/// Solves `tau_n = sum_{k=1}^n kappa_k [z^{n-k}] M(z)^k` for the cumulants.
pub fn moments_to_cumulants<T: Scalar>(tau: &MomentSequence<T>) -> CumulantSequence<T> {
    let k_max = tau.order();
    let powers = powers_of_moment_series(&tau.values, k_max);
    let mut kappa = vec![T::zero(); k_max];
    for n in 1..=k_max {
        let mut s = tau.values[n - 1];
        for k in 1..n {
            s -= kappa[k - 1] * powers[k].coeff(n - k);
        }
        kappa[n - 1] = s;
    }
    CumulantSequence::new(kappa)
}

/// Runs the free moment-cumulant recursion forward.
pub fn cumulants_to_moments<T: Scalar>(kappa: &CumulantSequence<T>) -> MomentSequence<T> {
    let k_max = kappa.order();
    let mut tau: Vec<T> = Vec::with_capacity(k_max);
    for n in 1..=k_max {
        // M(z) only needs tau_1..tau_{n-1} for the coefficients used here.
        let powers = powers_of_moment_series(&tau, n);
        let mut s = kappa.values[n - 1];
        for k in 1..n {
            s += kappa.values[k - 1] * powers[k].coeff(n - k);
        }
        tau.push(s);
    }
    MomentSequence::new(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(c: &[f64]) -> TruncatedSeries<f64> {
        TruncatedSeries::new(c.to_vec())
    }

    fn assert_coeffs(got: &TruncatedSeries<f64>, want: &[f64], tol: f64) {
        assert_eq!(got.order() + 1, want.len(), "order mismatch: {:?}", got);
        for (n, (&g, &w)) in got.coeffs().iter().zip(want).enumerate() {
            assert!((g - w).abs() <= tol, "c_{n}: got {g}, want {w}");
        }
    }

    /// Non-crossing partition enumeration: tau_n = sum over NC(n) of prod kappa_|B|.
    fn nc_moment_oracle(kappa: &[f64], n: usize) -> f64 {
        fn rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, kappa: &[f64], acc: &mut f64) {
            if i == n {
                let crossing = blocks.iter().enumerate().any(|(a, ba)| {
                    blocks.iter().skip(a + 1).any(|bb| {
                        ba.iter().any(|&p| {
                            bb.iter().any(|&q| {
                                ba.iter().any(|&r| {
                                    bb.iter().any(|&s| p < q && q < r && r < s || q < p && p < s && s < r)
                                })
                            })
                        })
                    })
                });
                if !crossing {
                    *acc += blocks.iter().map(|b| kappa[b.len() - 1]).product::<f64>();
                }
                return;
            }
            for j in 0..blocks.len() {
                blocks[j].push(i);
                rec(i + 1, n, blocks, kappa, acc);
                blocks[j].pop();
            }
            blocks.push(vec![i]);
            rec(i + 1, n, blocks, kappa, acc);
            blocks.pop();
        }
        let mut acc = 0.0;
        rec(0, n, &mut Vec::new(), kappa, &mut acc);
        acc
    }

    #[test]
    fn compose_geometric_substitution() {
        // f = z, g = z/(1-z): (0, 1, 1, 1)
        let g = TruncatedSeries::geometric(1.0, 3).shift_up();
        let f = TruncatedSeries::identity(3);
        assert_coeffs(&compose(&f, &g).unwrap(), &[0.0, 1.0, 1.0, 1.0], 0.0);
    }

    #[test]
    fn compose_identity_and_monomial() {
        let f = s(&[0.3, -1.0, 2.0, 0.5]);
        assert_eq!(compose(&f, &TruncatedSeries::identity(3)).unwrap(), f);
        let sq = TruncatedSeries::monomial(1.0, 2, 4);
        let two_z = TruncatedSeries::monomial(2.0, 1, 4);
        assert_coeffs(&compose(&sq, &two_z).unwrap(), &[0.0, 0.0, 4.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn compose_rejects_constant_term() {
        let f = s(&[0.0, 1.0]);
        let g = s(&[0.5, 1.0]);
        assert!(matches!(compose(&f, &g), Err(Error::CompositionUndefined(_))));
    }

    #[test]
    fn lagrange_invert_moment_generating_function_of_dirac() {
        // f = bz/(1-bz), b = 0.5: inverse z/(b(1+z)) = (0, 2, -2, 2)
        let b = 0.5;
        let f = TruncatedSeries::geometric(b, 3).shift_up().scale(b);
        let g = lagrange_invert(&f).unwrap();
        assert_coeffs(&g, &[0.0, 2.0, -2.0, 2.0], 1e-14);
        assert_eq!(lagrange_invert(&TruncatedSeries::<f64>::identity(5)).unwrap(), TruncatedSeries::identity(5));
    }

    #[test]
    fn lagrange_invert_requires_linear_term() {
        let f = s(&[0.0, 0.0, 1.0]);
        assert_eq!(lagrange_invert(&f), Err(Error::NotInvertible));
    }

    #[test]
    fn sqrt_examples() {
        assert_coeffs(&sqrt_series(&s(&[1.0, 2.0, 1.0])).unwrap().truncate(1), &[1.0, 1.0], 0.0);
        // sqrt(1 + 4z^2) = 1 + 2z^2 - 2z^4 + 4z^6
        let f = s(&[1.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0]);
        assert_coeffs(&sqrt_series(&f).unwrap(), &[1.0, 0.0, 2.0, 0.0, -2.0, 0.0, 4.0], 1e-14);
        assert!(matches!(sqrt_series(&s(&[0.0, 1.0])), Err(Error::BranchUndefined(_))));
        assert!(matches!(sqrt_series(&s(&[-1.0, 1.0])), Err(Error::BranchUndefined(_))));
    }

    #[test]
    fn binomial_matches_sqrt() {
        let b = TruncatedSeries::binomial(3.0, 0.5, 8);
        let r = sqrt_series(&s(&[1.0, 3.0, 0., 0., 0., 0., 0., 0., 0.])).unwrap();
        assert!(b.max_abs_diff(&r) < 1e-13);
    }

    #[test]
    fn cumulant_relations_low_order() {
        let tau = MomentSequence::new(vec![0.3f64, 1.1]);
        let k = moments_to_cumulants(&tau);
        assert!((k.get(2) - (1.1 - 0.09)).abs() < 1e-15);

        let b: f64 = 0.7;
        let dirac = MomentSequence::new((1..=6).map(|n| b.powi(n)).collect());
        let k = moments_to_cumulants(&dirac);
        assert!((k.get(1) - b).abs() < 1e-15);
        for n in 2..=6 {
            assert!(k.get(n).abs() < 1e-14, "kappa_{n} = {}", k.get(n));
        }

        let t = 1.7;
        let semi = MomentSequence::new(vec![0.0, t, 0.0, 2.0 * t * t]);
        let k = moments_to_cumulants(&semi);
        assert!(k.max_abs_diff(&CumulantSequence::new(vec![0.0, t, 0.0, 0.0])) < 1e-14);
    }

    #[test]
    fn cumulants_to_moments_examples() {
        let catalan = cumulants_to_moments(&CumulantSequence::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(catalan.values, vec![0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
        let mp = cumulants_to_moments(&CumulantSequence::new(vec![1.0; 3]));
        assert_eq!(mp.values, vec![1.0, 2.0, 5.0]);
        let b = 0.4;
        let d = cumulants_to_moments(&CumulantSequence::new(vec![b, 0.0, 0.0]));
        assert!(d.max_abs_diff(&MomentSequence::new(vec![b, b * b, b * b * b])) < 1e-16);
    }

    #[test]
    fn recursion_matches_non_crossing_partition_enumeration() {
        let kappa = [0.3, -0.7, 1.1, 0.4, -0.2, 0.9, 0.05];
        let tau = cumulants_to_moments(&CumulantSequence::new(kappa.to_vec()));
        for n in 1..=7 {
            let oracle = nc_moment_oracle(&kappa, n);
            assert!((tau.get(n) - oracle).abs() < 1e-12, "n={n}: {} vs {oracle}", tau.get(n));
        }
    }

    #[test]
    fn f32_smoke() {
        let f = TruncatedSeries::<f32>::geometric(0.5, 5).shift_up().scale(0.5);
        let g = lagrange_invert(&f).unwrap();
        let back = compose(&f, &g).unwrap();
        assert!(back.max_abs_diff(&TruncatedSeries::identity(5)) < 1e-5);
    }

    proptest! {
        #[test]
        fn cumulant_formulas_through_fourth_order(t1 in -2.0f64..2.0, t2 in -2.0f64..2.0, t3 in -2.0f64..2.0, t4 in -2.0f64..2.0) {
            let k = moments_to_cumulants(&MomentSequence::new(vec![t1, t2, t3, t4]));
            prop_assert!((k.get(1) - t1).abs() < 1e-12);
            prop_assert!((k.get(2) - (t2 - t1 * t1)).abs() < 1e-12);
            prop_assert!((k.get(3) - (t3 - 3.0 * t2 * t1 + 2.0 * t1.powi(3))).abs() < 1e-12);
            let k4 = t4 - 4.0 * t3 * t1 - 2.0 * t2 * t2 + 10.0 * t2 * t1 * t1 - 5.0 * t1.powi(4);
            prop_assert!((k.get(4) - k4).abs() < 1e-12);
        }

        #[test]
        fn cumulant_round_trip(v in proptest::collection::vec(-1.0f64..1.0, 1..12)) {
            let kappa = CumulantSequence::new(v);
            let back = moments_to_cumulants(&cumulants_to_moments(&kappa));
            prop_assert!(back.max_abs_diff(&kappa) < 1e-10);
        }

        #[test]
        fn moment_round_trip_on_atomic_measures(atoms in proptest::collection::vec((-1.5f64..1.5, 0.05f64..1.0), 1..6)) {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let tau = MomentSequence::new((1..=12).map(|n| atoms.iter().map(|&(x, w)| w / total * x.powi(n)).sum::<f64>()).collect());
            let back = cumulants_to_moments(&moments_to_cumulants(&tau));
            prop_assert!(back.max_abs_diff(&tau) < 1e-10);
        }

        #[test]
        fn lagrange_inverse_composes_to_identity(v in proptest::collection::vec(-1.0f64..1.0, 1..10)) {
            let mut c = vec![0.0, 1.0];
            c.extend(v);
            let f = TruncatedSeries::new(c);
            let g = lagrange_invert(&f).unwrap();
            let id = TruncatedSeries::identity(f.order());
            prop_assert!(compose(&f, &g).unwrap().max_abs_diff(&id) < 1e-10);
            prop_assert!(compose(&g, &f).unwrap().max_abs_diff(&id) < 1e-10);
            prop_assert!(lagrange_invert(&g).unwrap().max_abs_diff(&f) < 1e-10);
        }

        #[test]
        fn compose_is_associative(a in proptest::collection::vec(-1.0f64..1.0, 8),
                                  b in proptest::collection::vec(-1.0f64..1.0, 7),
                                  c in proptest::collection::vec(-1.0f64..1.0, 7)) {
            let f = TruncatedSeries::new(a);
            let mut bb = vec![0.0]; bb.extend(b);
            let mut cc = vec![0.0]; cc.extend(c);
            let g = TruncatedSeries::new(bb);
            let h = TruncatedSeries::new(cc);
            let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
            let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right) < 1e-12);
        }

        #[test]
        fn sqrt_squares_back(c0 in 0.1f64..3.0, v in proptest::collection::vec(-1.0f64..1.0, 0..12)) {
            let mut c = vec![c0];
            c.extend(v);
            let f = TruncatedSeries::new(c);
            let g = sqrt_series(&f).unwrap();
            let rel = (&g * &g).max_abs_diff(&f) / (1.0 + g.max_abs().powi(2));
            prop_assert!(rel < 1e-14);
        }
    }
}
