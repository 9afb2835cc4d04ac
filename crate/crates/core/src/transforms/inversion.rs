//! Stieltjes–Perron inversion of a Cauchy field sampled above a real grid.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{Density, Domain, MeasureSpec};
use crate::scalar::Scalar;
use crate::transforms::cauchy::CauchyField;

pub const DEFAULT_EPS_SCHEDULE: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Minimal `ε |Im G|` for a point to count as an atom.
pub const ATOM_THRESHOLD: f64 = 1e-3;
/// Largest spread `max/min` of the residue estimates over the schedule.
const ATOM_STABILITY: f64 = 1.1;
/// Largest tolerated `|mass - 1|` before renormalization.
pub const MASS_TOLERANCE: f64 = 1e-2;

pub fn default_eps_schedule<T: Scalar>() -> Vec<T> {
    DEFAULT_EPS_SCHEDULE.iter().map(|&e| T::lit(e)).collect()
}

pub(crate) fn check_schedule<T: Scalar>(grid: &[T], eps: &[T]) -> Result<()> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("grid must be finite, strictly increasing, with at least 2 points".into()));
    }
    if eps.len() < 2 || eps.iter().any(|e| !(*e > T::zero())) || eps.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidInput("eps schedule must be positive, strictly decreasing, with at least 2 values".into()));
    }
    Ok(())
}

/// Recovers a measure from `G(x + iε)` over `grid × eps`. The density is
/// `-(1/π) Im G` extrapolated to `ε = 0` from the two smallest heights;
/// atoms are points where `ε |Im G|` tends to a positive limit.
pub fn stieltjes_invert<T: Scalar>(field: &dyn CauchyField<T>, grid: &[T], eps: &[T]) -> Result<MeasureSpec<T>> {
    check_schedule(grid, eps)?;
    let values: Vec<Vec<Option<Complex<T>>>> = eps
        .iter()
        .map(|&e| grid.par_iter().map(|&x| field.eval(Complex::new(x, e)).ok()).collect())
        .collect();
    invert_values(grid, eps, &values)
}

/// Residue of a simple pole seen from `x + iε`: `(mass, location)`.
fn residue<T: Scalar>(x: T, eps: T, g: Complex<T>) -> Option<(T, T)> {
    let inv = g.inv();
    if !(inv.im > T::zero()) {
        return None;
    }
    let m = eps / inv.im;
    Some((m, x - m * inv.re))
}

fn richardson<T: Scalar>(e1: T, v1: T, e2: T, v2: T) -> T {
    (e1 * v2 - e2 * v1) / (e1 - e2)
}

/// `values[k][i] = G(grid[i] + i eps[k])`, `None` where unavailable.
pub(crate) fn invert_values<T: Scalar>(
    grid: &[T],
    eps: &[T],
    values: &[Vec<Option<Complex<T>>>],
) -> Result<MeasureSpec<T>> {
    check_schedule(grid, eps)?;
    if values.len() != eps.len() || values.iter().any(|v| v.len() != grid.len()) {
        return Err(Error::InvalidInput("value table does not match grid and schedule".into()));
    }
    let n = grid.len();
    let kl = eps.len() - 1;
    let (e1, e2) = (eps[kl - 1], eps[kl]);
    let pi = T::PI();
    let threshold = T::lit(ATOM_THRESHOLD);
    let spacing = (grid[n - 1] - grid[0]) / T::from_count(n - 1);

    let height: Vec<T> = values[kl].iter().map(|g| g.map_or(T::zero(), |g| e2 * g.im.abs())).collect();
    let mut atoms: Vec<(T, T)> = Vec::new();
    for i in 0..n {
        let left = if i > 0 { height[i - 1] } else { T::zero() };
        let right = if i + 1 < n { height[i + 1] } else { T::zero() };
        if !(height[i] > threshold && height[i] >= left && height[i] > right) {
            continue;
        }
        let est: Option<Vec<(T, T)>> = (0..eps.len()).map(|k| values[k][i].and_then(|g| residue(grid[i], eps[k], g))).collect();
        let Some(est) = est else { continue };
        let lo = est.iter().fold(T::infinity(), |a, r| a.min(r.0));
        let hi = est.iter().fold(T::zero(), |a, r| a.max(r.0));
        if !(lo > threshold && hi < T::lit(ATOM_STABILITY) * lo) {
            continue;
        }
        let mass = richardson(e1, est[kl - 1].0, e2, est[kl].0);
        // The continuous part shifts the residue's location by O(ε²).
        let at = richardson(e1 * e1, est[kl - 1].1, e2 * e2, est[kl].1);
        match atoms.last_mut() {
            Some(prev) if (at - prev.0).abs() <= T::two() * spacing => {
                if mass > prev.1 {
                    *prev = (at, mass);
                }
            }
            _ => atoms.push((at, mass)),
        }
    }

    let rho_at = |k: usize, i: usize| -> Option<T> {
        let z = Complex::new(grid[i], eps[k]);
        values[k][i].map(|g| {
            let g = atoms.iter().fold(g, |acc, &(x0, m)| acc - Complex::new(m, T::zero()) / (z - x0));
            -g.im / pi
        })
    };
    let raw: Vec<Option<T>> = (0..n)
        .map(|i| match (rho_at(kl - 1, i), rho_at(kl, i)) {
            (Some(r1), Some(r2)) => Some(richardson(e1, r1, e2, r2).max(T::zero())),
            _ => None,
        })
        .collect();
    let rho = fill_missing(grid, &raw)?;
    let density = resample_uniform(grid, &rho);

    let total = density.mass() + atoms.iter().map(|a| a.1).sum::<T>();
    if !((total - T::one()).abs() <= T::lit(MASS_TOLERANCE)) {
        return Err(Error::InversionFailed(total.to_f64().unwrap_or(f64::NAN)));
    }
    atoms.retain(|a| a.1 > T::zero());
    MeasureSpec::normalized(atoms, Some(density), Domain::RealLine)
}

/// Linear interpolation across missing entries; missing ends copy the
/// nearest available value.
fn fill_missing<T: Scalar>(grid: &[T], raw: &[Option<T>]) -> Result<Vec<T>> {
    let known: Vec<usize> = (0..raw.len()).filter(|&i| raw[i].is_some()).collect();
    if known.is_empty() {
        return Err(Error::InversionFailed(f64::NAN));
    }
    let mut out = Vec::with_capacity(raw.len());
    let mut next = 0;
    for i in 0..raw.len() {
        if let Some(v) = raw[i] {
            out.push(v);
            continue;
        }
        while next < known.len() && known[next] < i {
            next += 1;
        }
        let v = match (next.checked_sub(1).map(|p| known[p]), known.get(next)) {
            (Some(a), Some(&b)) => {
                let (va, vb) = (raw[a].unwrap_or_default(), raw[b].unwrap_or_default());
                va + (vb - va) * (grid[i] - grid[a]) / (grid[b] - grid[a])
            }
            (Some(a), None) => raw[a].unwrap_or_default(),
            (None, Some(&b)) => raw[b].unwrap_or_default(),
            (None, None) => T::zero(),
        };
        out.push(v);
    }
    Ok(out)
}

fn resample_uniform<T: Scalar>(grid: &[T], rho: &[T]) -> Density<T> {
    let n = grid.len();
    let (lo, hi) = (grid[0], grid[n - 1]);
    let h = (hi - lo) / T::from_count(n - 1);
    let uniform = grid.iter().enumerate().all(|(i, &x)| (x - (lo + h * T::from_count(i))).abs() <= T::tol(1e-9) * (hi - lo));
    if uniform {
        return Density { lo, hi, values: rho.to_vec() };
    }
    let mut j = 0;
    let values = (0..n)
        .map(|i| {
            let x = if i + 1 == n { hi } else { lo + h * T::from_count(i) };
            while j + 2 < n && grid[j + 1] < x {
                j += 1;
            }
            let u = ((x - grid[j]) / (grid[j + 1] - grid[j])).max(T::zero()).min(T::one());
            rho[j] + (rho[j + 1] - rho[j]) * u
        })
        .collect();
    Density { lo, hi, values }
}

pub fn uniform_grid<T: Scalar>(lo: T, hi: T, nodes: usize) -> Vec<T> {
    let h = (hi - lo) / T::from_count(nodes.max(2) - 1);
    (0..nodes.max(2)).map(|i| if i + 1 == nodes.max(2) { hi } else { lo + h * T::from_count(i) }).collect()
}
