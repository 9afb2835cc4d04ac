//! Compactly supported probability measures: atoms plus a gridded density.
//!
//! Density values live on a uniform grid and are read as the nodal values
//! of a piecewise-linear density, so the trapezoidal rule integrates the
//! represented density exactly. Constructors fill the nodes with the
//! projection of the analytic density onto the hat functions of the grid;
//! this makes mass and first moment exact and leaves an `O(h^2)` error in
//! higher moments even at square-root edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::Scalar;
use crate::series::MomentSequence;

/// Default number of density grid nodes.
pub const DEFAULT_GRID: usize = 4096;
/// Atoms closer than this are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "real")]
    RealLine,
    #[serde(rename = "nonneg")]
    NonnegHalfline,
    #[serde(rename = "symmetric")]
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Density<T> {
    pub lo: T,
    pub hi: T,
    pub values: Vec<T>,
}

impl<T: Scalar> Density<T> {
    /// Samples `f` at the nodes.
    pub fn sample(lo: T, hi: T, nodes: usize, f: impl Fn(T) -> T) -> Self {
        let h = (hi - lo) / T::from_count(nodes - 1);
        Self { lo, hi, values: (0..nodes).map(|i| f(lo + h * T::from_count(i))).collect() }
    }

    /// Projects `rho` onto the hat functions of the grid: node `i` receives
    /// `∫ rho φ_i / w_i` with `w_i` the trapezoid weight. The first and last
    /// cells are integrated after the substitution `x = edge ± h u²`, which
    /// absorbs `√` and `1/√` behaviour at the edges.
    pub fn project(lo: T, hi: T, nodes: usize, rho: impl Fn(T) -> T) -> Self {
        let g = nodes.max(2);
        let h = (hi - lo) / T::from_count(g - 1);
        let rule = quad::gauss8::<T>();
        let mut acc = vec![T::zero(); g];
        for c in 0..g - 1 {
            let a = lo + h * T::from_count(c);
            let (mut left, mut right) = (T::zero(), T::zero());
            for &(u, w) in &rule {
                let (x, jac) = if c == 0 {
                    (a + h * u * u, T::two() * h * u)
                } else if c == g - 2 {
                    let b = a + h;
                    (b - h * u * u, T::two() * h * u)
                } else {
                    (a + h * u, h)
                };
                let r = rho(x) * jac * w;
                let s = ((x - a) / h).max(T::zero()).min(T::one());
                left += r * (T::one() - s);
                right += r * s;
            }
            acc[c] += left;
            acc[c + 1] += right;
        }
        let mut d = Self { lo, hi, values: acc };
        for i in 0..g {
            let w = d.weight(i);
            d.values[i] /= w;
        }
        d
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> T {
        (self.hi - self.lo) / T::from_count(self.values.len() - 1)
    }

    pub fn node(&self, i: usize) -> T {
        self.lo + self.step() * T::from_count(i)
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> T {
        let h = self.step();
        if i == 0 || i + 1 == self.values.len() {
            h * T::half()
        } else {
            h
        }
    }

    pub fn mass(&self) -> T {
        (0..self.len()).map(|i| self.weight(i) * self.values[i]).sum()
    }

    /// Trapezoidal `∫ x^n ρ(x) dx`.
    pub fn moment(&self, n: i32) -> T {
        (0..self.len()).map(|i| self.weight(i) * self.values[i] * self.node(i).powi(n)).sum()
    }

    /// Piecewise-linear interpolation; zero outside `[lo, hi]`.
    pub fn value_at(&self, x: T) -> T {
        if !(x >= self.lo && x <= self.hi) {
            return T::zero();
        }
        let h = self.step();
        let s = (x - self.lo) / h;
        let i = s.floor().to_usize().unwrap_or(0).min(self.len() - 2);
        let f = s - T::from_count(i);
        self.values[i] * (T::one() - f) + self.values[i + 1] * f
    }

    fn scaled(&self, c: T) -> Self {
        Self { lo: self.lo, hi: self.hi, values: self.values.iter().map(|&v| v * c).collect() }
    }
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawMeasure<T> {
    #[serde(default)]
    atoms: Vec<(T, T)>,
    #[serde(default)]
    density: Option<Density<T>>,
    domain: Domain,
}

/// A probability measure with bounded support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawMeasure<T>")]
pub struct MeasureSpec<T: Scalar> {
    atoms: Vec<(T, T)>,
    density: Option<Density<T>>,
    domain: Domain,
}

impl<T: Scalar> TryFrom<RawMeasure<T>> for MeasureSpec<T> {
    type Error = Error;
    fn try_from(raw: RawMeasure<T>) -> Result<Self> {
        Self::new(raw.atoms, raw.density, raw.domain)
    }
}

fn merge_atoms<T: Scalar>(mut atoms: Vec<(T, T)>) -> Vec<(T, T)> {
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<(T, T)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= T::lit(ATOM_MERGE_TOL) => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

impl<T: Scalar> MeasureSpec<T> {
    /// Validates and builds a measure. Atoms within [`ATOM_MERGE_TOL`] are
    /// merged.
    pub fn new(atoms: Vec<(T, T)>, density: Option<Density<T>>, domain: Domain) -> Result<Self> {
        let m = Self { atoms: merge_atoms(atoms), density, domain };
        m.validate()?;
        Ok(m)
    }

    /// Rescales atoms and density to unit mass, then validates.
    pub fn normalized(atoms: Vec<(T, T)>, density: Option<Density<T>>, domain: Domain) -> Result<Self> {
        let raw = Self { atoms: merge_atoms(atoms), density, domain };
        let mass = raw.total_mass();
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::InvalidMeasure(format!("total mass {mass}")));
        }
        let c = T::one() / mass;
        let m = Self {
            atoms: raw.atoms.iter().map(|&(x, w)| (x, w * c)).collect(),
            density: raw.density.as_ref().map(|d| d.scaled(c)),
            domain,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMeasure(msg));
        for &(x, w) in &self.atoms {
            if !x.is_finite() || !(w > T::zero()) || w > T::one() + T::tol(1e-9) {
                return bad(format!("atom ({x}, {w})"));
            }
        }
        if let Some(d) = &self.density {
            if d.len() < 2 || !(d.lo < d.hi) || !d.lo.is_finite() || !d.hi.is_finite() {
                return bad(format!("density grid [{}, {}] with {} nodes", d.lo, d.hi, d.len()));
            }
            if d.values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
                return bad("density values must be finite and non-negative".into());
            }
        }
        if self.atoms.is_empty() && self.density.is_none() {
            return bad("empty measure".into());
        }
        let mass = self.total_mass();
        if (mass - T::one()).abs() > T::tol(1e-9) {
            return bad(format!("total mass {mass}"));
        }
        match self.domain {
            Domain::NonnegHalfline if !self.is_nonneg() => {
                Err(Error::InvalidDomain("nonneg measure with mass on the negative axis".into()))
            }
            Domain::Symmetric if !self.is_symmetric() => {
                Err(Error::InvalidDomain("symmetric tag on an asymmetric measure".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density<T>> {
        self.density.as_ref()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|a| a.1).sum::<T>() + self.density.as_ref().map_or(T::zero(), |d| d.mass())
    }

    /// Mass of the atoms within `tol` of `x`.
    pub fn atom_mass_near(&self, x: T, tol: T) -> T {
        self.atoms.iter().filter(|a| (a.0 - x).abs() <= tol).map(|a| a.1).sum()
    }

    /// Smallest interval containing every atom and the density grid.
    pub fn support(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &(x, _) in &self.atoms {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if let Some(d) = &self.density {
            lo = lo.min(d.lo);
            hi = hi.max(d.hi);
        }
        (lo, hi)
    }

    pub fn support_radius(&self) -> T {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    /// No atom and no density node with positive value below zero.
    pub fn is_nonneg(&self) -> bool {
        let tol = T::lit(ATOM_MERGE_TOL);
        self.atoms.iter().all(|a| a.0 >= -tol)
            && self.density.as_ref().map_or(true, |d| {
                d.lo >= -tol || (0..d.len()).all(|i| d.node(i) >= -tol || d.values[i] == T::zero())
            })
    }

    /// Invariant under `x -> -x` within `1e-12`.
    pub fn is_symmetric(&self) -> bool {
        let tol = T::tol(1e-12);
        let atoms_ok = self.atoms.iter().all(|&(x, w)| {
            self.atoms.iter().any(|&(y, v)| (x + y).abs() <= T::lit(ATOM_MERGE_TOL) && (w - v).abs() <= tol)
        });
        let density_ok = self.density.as_ref().map_or(true, |d| {
            let n = d.len();
            (d.lo + d.hi).abs() <= tol * (T::one() + d.hi.abs())
                && (0..n).all(|i| (d.values[i] - d.values[n - 1 - i]).abs() <= tol * (T::one() + d.values[i]))
        });
        atoms_ok && density_ok
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn make_dirac<T: Scalar>(b: T) -> MeasureSpec<T> {
    let domain = if b >= T::zero() { Domain::NonnegHalfline } else { Domain::RealLine };
    MeasureSpec { atoms: vec![(b, T::one())], density: None, domain }
}

/// Symmetric Bernoulli measure `(δ_{-a} + δ_a)/2`.
pub fn make_bernoulli<T: Scalar>(a: T) -> Result<MeasureSpec<T>> {
    if !(a > T::zero()) {
        return Err(Error::InvalidParameter(format!("bernoulli needs a > 0, got {a}")));
    }
    Ok(MeasureSpec { atoms: vec![(-a, T::half()), (a, T::half())], density: None, domain: Domain::Symmetric })
}

pub fn make_semicircle<T: Scalar>(t: T) -> Result<MeasureSpec<T>> {
    make_semicircle_on(t, DEFAULT_GRID)
}

/// Semicircle of variance `t` on a grid with `nodes` points.
pub fn make_semicircle_on<T: Scalar>(t: T, nodes: usize) -> Result<MeasureSpec<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("semicircle needs t > 0, got {t}")));
    }
    let r = T::two() * t.sqrt();
    let four_t = T::lit(4.0) * t;
    let c = T::one() / (T::two() * T::PI() * t);
    let rho = |x: T| c * (four_t - x * x).max(T::zero()).sqrt();
    let mut d = Density::project(-r, r, nodes.max(3), rho);
    symmetrize_nodes(&mut d.values);
    let d = d.scaled(T::one() / d.mass());
    Ok(MeasureSpec { atoms: vec![], density: Some(d), domain: Domain::Symmetric })
}

pub fn make_marcenko_pastur<T: Scalar>(lambda: T, t: T) -> Result<MeasureSpec<T>> {
    make_marcenko_pastur_on(lambda, t, DEFAULT_GRID)
}

/// Marcenko–Pastur law with ratio `lambda` and scale `t`: an atom of mass
/// `max(0, 1 - lambda)` at the origin plus a density on `[x⁻, x⁺]`,
/// `x^± = t(1 ± √λ)²`.
pub fn make_marcenko_pastur_on<T: Scalar>(lambda: T, t: T, nodes: usize) -> Result<MeasureSpec<T>> {
    if !(lambda >= T::zero()) || !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("marcenko-pastur needs lambda >= 0, t > 0; got {lambda}, {t}")));
    }
    if lambda == T::zero() {
        return Ok(make_dirac(T::zero()));
    }
    let sl = lambda.sqrt();
    let xm = t * (T::one() - sl).powi(2);
    let xp = t * (T::one() + sl).powi(2);
    let c = T::one() / (T::two() * T::PI() * t);
    let rho = |x: T| {
        if x <= T::zero() {
            return T::zero();
        }
        c * ((x - xm) * (xp - x)).max(T::zero()).sqrt() / x
    };
    let d = Density::project(xm, xp, nodes.max(3), rho);
    let ac_mass = lambda.min(T::one());
    let d = d.scaled(ac_mass / d.mass());
    let mut atoms = vec![];
    if lambda < T::one() {
        atoms.push((T::zero(), T::one() - lambda));
    }
    Ok(MeasureSpec { atoms, density: Some(d), domain: Domain::NonnegHalfline })
}

fn symmetrize_nodes<T: Scalar>(v: &mut [T]) {
    let n = v.len();
    for i in 0..n / 2 {
        let m = (v[i] + v[n - 1 - i]) * T::half();
        v[i] = m;
        v[n - 1 - i] = m;
    }
}

/// Sorted union of two sorted lists, restricted to `[lo, hi]` and with
/// near-duplicates removed.
fn overlay<T: Scalar>(a: &[T], b: &[T], lo: T, hi: T) -> Vec<T> {
    let mut all: Vec<T> = a.iter().chain(b).copied().filter(|&x| x >= lo && x <= hi).collect();
    all.push(lo);
    all.push(hi);
    all.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let eps = T::epsilon() * T::lit(16.0) * (T::one() + hi.abs().max(lo.abs()));
    all.dedup_by(|x, y| (*x - *y).abs() <= eps);
    all
}

fn cell_index<T: Scalar>(x: T, lo: T, h: T, cells: usize) -> usize {
    ((x - lo) / h).floor().to_usize().unwrap_or(0).min(cells - 1)
}

/// Law of `x²` under `mu`.
pub fn push_forward_square<T: Scalar>(mu: &MeasureSpec<T>) -> MeasureSpec<T> {
    let atoms: Vec<(T, T)> = mu.atoms.iter().map(|&(x, w)| (x * x, w)).collect();
    let density = mu.density.as_ref().map(push_forward_density);
    let raw = MeasureSpec { atoms: merge_atoms(atoms), density, domain: Domain::NonnegHalfline };
    renormalize_exactly(raw)
}

fn push_forward_density<T: Scalar>(src: &Density<T>) -> Density<T> {
    let g = src.len();
    let (ylo, yhi) = if src.lo < T::zero() && src.hi > T::zero() {
        (T::zero(), (src.lo * src.lo).max(src.hi * src.hi))
    } else {
        let (a, b) = (src.lo * src.lo, src.hi * src.hi);
        (a.min(b), a.max(b))
    };
    let hy = (yhi - ylo) / T::from_count(g - 1);
    let hx = src.step();
    let target_roots: Vec<T> = (0..g).map(|j| (ylo + hy * T::from_count(j)).sqrt()).collect();
    let rule = quad::gauss2::<T>();
    let mut acc = vec![T::zero(); g];
    for sign in [T::one(), -T::one()] {
        // u = |x| on this side of the origin.
        let (u0, u1) = if sign > T::zero() {
            (src.lo.max(T::zero()), src.hi)
        } else {
            ((-src.hi).max(T::zero()), -src.lo)
        };
        if !(u1 > u0) {
            continue;
        }
        let mut src_nodes: Vec<T> = (0..g).map(|i| sign * src.node(i)).collect();
        if sign < T::zero() {
            src_nodes.reverse();
        }
        let breaks = overlay(&src_nodes, &target_roots, u0, u1);
        for pair in breaks.windows(2) {
            let (p, q) = (pair[0], pair[1]);
            let mid = (p + q) * T::half();
            let j = cell_index(mid * mid, ylo, hy, g - 1);
            let i = cell_index(sign * mid, src.lo, hx, g - 1);
            let (xi, vi, vj) = (src.node(i), src.values[i], src.values[i + 1]);
            let yj = ylo + hy * T::from_count(j);
            let (mut left, mut right) = (T::zero(), T::zero());
            for &(s, w) in &rule {
                let u = p + (q - p) * s;
                let x = sign * u;
                let f = (x - xi) / hx;
                let rho = vi * (T::one() - f) + vj * f;
                let psi = ((u * u - yj) / hy).max(T::zero()).min(T::one());
                left += w * rho * (T::one() - psi);
                right += w * rho * psi;
            }
            acc[j] += left * (q - p);
            acc[j + 1] += right * (q - p);
        }
    }
    let mut d = Density { lo: ylo, hi: yhi, values: acc };
    for j in 0..g {
        let w = d.weight(j);
        d.values[j] /= w;
    }
    d
}

/// The symmetric measure whose square push-forward is `nu`.
///
/// A uniform grid in `x` is coarser in `y = x²` near the outer edge, so the
/// output grid is refined until its spacing in `y` there matches the input.
pub fn symmetrize<T: Scalar>(nu: &MeasureSpec<T>) -> Result<MeasureSpec<T>> {
    if !nu.is_nonneg() {
        return Err(Error::InvalidDomain("symmetrize needs a measure on the half-line".into()));
    }
    let tol = T::lit(ATOM_MERGE_TOL);
    let mut atoms = Vec::with_capacity(2 * nu.atoms.len());
    for &(x, w) in &nu.atoms {
        if x.abs() <= tol {
            atoms.push((T::zero(), w));
        } else {
            let r = x.sqrt();
            atoms.push((-r, w * T::half()));
            atoms.push((r, w * T::half()));
        }
    }
    let density = nu.density.as_ref().map(symmetrize_density);
    Ok(renormalize_exactly(MeasureSpec { atoms: merge_atoms(atoms), density, domain: Domain::Symmetric }))
}

fn symmetrize_density<T: Scalar>(src: &Density<T>) -> Density<T> {
    let ylo = src.lo.max(T::zero());
    let ratio = (T::lit(4.0) * src.hi / (src.hi - src.lo)).ceil().to_usize().unwrap_or(4).max(1);
    let cells = 2 * ((ratio * (src.len() - 1)).div_ceil(2));
    let g = cells + 1;
    let r = src.hi.sqrt();
    let hx = T::two() * r / T::from_count(g - 1);
    let hy = src.step();
    let gs = src.len();
    let target_nodes: Vec<T> = (0..g).map(|j| -r + hx * T::from_count(j)).collect();
    let src_roots: Vec<T> = (0..gs).map(|i| src.node(i).max(T::zero()).sqrt()).collect();
    let breaks = overlay(&target_nodes, &src_roots, ylo.sqrt(), r);
    let rule = quad::gauss3::<T>();
    // When the grid starts at the origin the density is read as g(y)/√y
    // with g piecewise linear, the shape produced by any symmetric measure
    // with positive density at 0. Node k stores the hat integral of ρ, which
    // for ρ = c/√y equals c r_k/√y_k; dividing by r_k recovers g.
    let root_weighted = (src.lo == T::zero()).then(|| {
        (0..gs)
            .map(|k| {
                let v = src.values[k];
                if k == 0 {
                    T::lit(3.0 / 8.0) * v * hy.sqrt()
                } else {
                    (hy * T::from_count(k)).sqrt() * v / inverse_root_hat_ratio(k)
                }
            })
            .collect::<Vec<T>>()
    });
    let mut acc = vec![T::zero(); g];
    for pair in breaks.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let mid = (p + q) * T::half();
        let j = cell_index(mid, -r, hx, g - 1);
        let i = cell_index(mid * mid, src.lo, hy, gs - 1);
        let (yi, vi, vj) = (src.node(i), src.values[i], src.values[i + 1]);
        let xj = target_nodes[j];
        let (mut left, mut right) = (T::zero(), T::zero());
        for &(s, w) in &rule {
            let x = p + (q - p) * s;
            let f = (x * x - yi) / hy;
            // ρ_μ(x) = |x| ρ_ν(x²) carries total mass 1/2 on each side.
            let rho = match &root_weighted {
                Some(gv) => gv[i] * (T::one() - f) + gv[i + 1] * f,
                None => x * (vi * (T::one() - f) + vj * f),
            };
            let psi = ((x - xj) / hx).max(T::zero()).min(T::one());
            left += w * rho * (T::one() - psi);
            right += w * rho * psi;
        }
        acc[j] += left * (q - p);
        acc[j + 1] += right * (q - p);
    }
    // Mirror the positive half onto the negative one.
    let mut full = vec![T::zero(); g];
    for j in 0..g {
        full[j] += acc[j];
        full[g - 1 - j] += acc[j];
    }
    let mut d = Density { lo: -r, hi: r, values: full };
    for j in 0..g {
        let w = d.weight(j);
        d.values[j] /= w;
    }
    symmetrize_nodes(&mut d.values);
    d
}

/// `r_k = √k · (4/3)((k+1)^{3/2} - 2k^{3/2} + (k-1)^{3/2})`: the hat
/// projection of `1/√y` at node `k ≥ 1` relative to its point value.
fn inverse_root_hat_ratio<T: Scalar>(k: usize) -> T {
    let kf = T::from_count(k);
    let p = |s: T| s * s.sqrt();
    kf.sqrt() * T::lit(4.0 / 3.0) * (p(kf + T::one()) - T::two() * p(kf) + p(kf - T::one()))
}

/// Removes the rounding drift a grid transfer leaves in the total mass.
fn renormalize_exactly<T: Scalar>(m: MeasureSpec<T>) -> MeasureSpec<T> {
    let mass = m.total_mass();
    if (mass - T::one()).abs() <= T::epsilon() {
        return m;
    }
    let c = T::one() / mass;
    MeasureSpec {
        atoms: m.atoms.iter().map(|&(x, w)| (x, w * c)).collect(),
        density: m.density.as_ref().map(|d| d.scaled(c)),
        domain: m.domain,
    }
}

/// `τ_1..τ_K`: atoms exactly, density by the trapezoidal rule.
pub fn moments<T: Scalar>(mu: &MeasureSpec<T>, k: usize) -> MomentSequence<T> {
    let values = (1..=k as i32)
        .map(|n| {
            let a: T = mu.atoms.iter().map(|&(x, w)| w * x.powi(n)).sum();
            a + mu.density.as_ref().map_or(T::zero(), |d| d.moment(n))
        })
        .collect();
    MomentSequence::new(values)
}

/// Cumulative distribution function of a measure, precomputed for fast
/// repeated evaluation.
#[derive(Debug, Clone)]
pub struct Cdf<T: Scalar> {
    atom_x: Vec<T>,
    atom_cum: Vec<T>,
    density: Option<(Density<T>, Vec<T>)>,
}

impl<T: Scalar> Cdf<T> {
    pub fn new(mu: &MeasureSpec<T>) -> Self {
        let atom_x: Vec<T> = mu.atoms.iter().map(|a| a.0).collect();
        let mut c = T::zero();
        let atom_cum = mu
            .atoms
            .iter()
            .map(|a| {
                c += a.1;
                c
            })
            .collect();
        let density = mu.density.clone().map(|d| {
            let h = d.step();
            let mut cum = Vec::with_capacity(d.len());
            let mut s = T::zero();
            cum.push(s);
            for i in 1..d.len() {
                s += h * T::half() * (d.values[i - 1] + d.values[i]);
                cum.push(s);
            }
            (d, cum)
        });
        Self { atom_x, atom_cum, density }
    }

    fn density_part(&self, x: T) -> T {
        let Some((d, cum)) = &self.density else { return T::zero() };
        if x <= d.lo {
            return T::zero();
        }
        if x >= d.hi {
            return *cum.last().unwrap_or(&T::zero());
        }
        let h = d.step();
        let s = (x - d.lo) / h;
        let i = s.floor().to_usize().unwrap_or(0).min(d.len() - 2);
        let dx = x - d.node(i);
        let slope = (d.values[i + 1] - d.values[i]) / h;
        cum[i] + d.values[i] * dx + slope * dx * dx * T::half()
    }

    /// `μ((-∞, x])`.
    pub fn at(&self, x: T) -> T {
        let k = self.atom_x.partition_point(|&a| a <= x);
        let atoms = if k == 0 { T::zero() } else { self.atom_cum[k - 1] };
        atoms + self.density_part(x)
    }

    /// `μ((-∞, x))`.
    pub fn left_limit(&self, x: T) -> T {
        let k = self.atom_x.partition_point(|&a| a < x);
        let atoms = if k == 0 { T::zero() } else { self.atom_cum[k - 1] };
        atoms + self.density_part(x)
    }

    /// Smallest `x` with `F(x) >= p`, by bisection over the support.
    pub fn quantile(&self, p: T) -> T {
        let mut pts = self.breakpoints();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let (Some(&first), Some(&last)) = (pts.first(), pts.last()) else { return T::nan() };
        if self.at(first) >= p {
            return first;
        }
        // Narrow to one breakpoint interval first, then bisect inside it.
        let k = pts.partition_point(|&x| self.at(x) < p);
        let (mut lo, mut hi) = (pts[k.saturating_sub(1)], pts.get(k).copied().unwrap_or(last));
        for _ in 0..200 {
            let mid = (lo + hi) * T::half();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.at(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Points where the CDF can jump or bend: atom locations and grid nodes.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut v = self.atom_x.clone();
        if let Some((d, _)) = &self.density {
            v.extend((0..d.len()).map(|i| d.node(i)));
        }
        v
    }
}
