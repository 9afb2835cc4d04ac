//! Euler–Maruyama simulation of the finite-N log-gases and empirical
//! comparison with their hydrodynamic limits.
//!
//! The systems are integrated in their natural units:
//!
//! * Dyson: `dΛ_i = dB_i + (β/2) Σ_j dt/(Λ_i - Λ_j)`.
//! * Bru–Wishart: `dΛ_i = 2√Λ_i dB_i + β[(ν+1) + 2Λ_i Σ_j 1/(Λ_i - Λ_j)] dt`,
//!   reflected at 0.
//! * Chiral: `dS_i = dB_i + (β(ν+1)-1)/(2S_i) dt + (β/2) Σ_j (1/(S_i-S_j) + 1/(S_i+S_j)) dt`,
//!   reflected at 0.
//!
//! Dividing positions by [`SdeConfig::hydrodynamic_scale`] gives empirical
//! measures that converge to the flows of [`crate::evolution`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Family;
use crate::measures::{Cdf, Domain, MeasureSpec, ATOM_MERGE_TOL};
use crate::scalar::Scalar;

/// Consecutive rejections after which a step fails.
pub const MAX_REJECTIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SdeFamily<T> {
    Dyson { beta: T },
    BruWishart { beta: T, nu: T },
    Chiral { beta: T, nu: T },
}

impl<T: Scalar> SdeFamily<T> {
    pub fn beta(&self) -> T {
        match *self {
            SdeFamily::Dyson { beta } | SdeFamily::BruWishart { beta, .. } | SdeFamily::Chiral { beta, .. } => beta,
        }
    }

    fn nu(&self) -> T {
        match *self {
            SdeFamily::Dyson { .. } => T::zero(),
            SdeFamily::BruWishart { nu, .. } | SdeFamily::Chiral { nu, .. } => nu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SdeConfig<T: Scalar> {
    pub family: SdeFamily<T>,
    /// Simulated particles per replica.
    pub particles: usize,
    /// Additional particles frozen at the origin: the zero eigenvalues of a
    /// wide rectangular matrix when the dual system is simulated.
    pub padding: usize,
    pub dt: T,
    pub horizon: T,
    pub replicas: usize,
    pub seed: u64,
    pub initial_positions: Vec<T>,
}

impl<T: Scalar> SdeConfig<T> {
    /// A system whose rescaled empirical measure approximates `limit` with
    /// `n` particles started from `initial` (in the limit's units).
    ///
    /// Wishart and chiral limits use `ν = (λ - 1) n`. For `λ < 1` this is
    /// below `-1`, and the dual system with `λn` particles and
    /// `ν = n - λn` is simulated instead, padded with zeros; it requires
    /// the `n - λn` smallest initial positions to be 0.
    #[allow(clippy::too_many_arguments)]
    pub fn for_limit(
        limit: Family<T>,
        beta: T,
        n: usize,
        initial: &[T],
        dt: T,
        horizon: T,
        replicas: usize,
        seed: u64,
    ) -> Result<Self> {
        if initial.len() != n || n == 0 {
            return Err(Error::InvalidParameter(format!("{} initial positions for {n} particles", initial.len())));
        }
        let nf = T::from_count(n);
        let mut sorted = initial.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let (family, kept, scale) = match limit {
            Family::Dyson => (SdeFamily::Dyson { beta }, n, (beta * nf * T::half()).sqrt()),
            Family::Wishart { lambda } | Family::Chiral { lambda } => {
                let (nu, kept) = if lambda >= T::one() {
                    ((lambda - T::one()) * nf, n)
                } else {
                    let kept = (lambda * nf).round().to_usize().unwrap_or(0).max(1);
                    (T::from_count(n - kept), kept)
                };
                if matches!(limit, Family::Wishart { .. }) {
                    (SdeFamily::BruWishart { beta, nu }, kept, beta * nf)
                } else {
                    (SdeFamily::Chiral { beta, nu }, kept, (beta * nf).sqrt())
                }
            }
        };
        let dropped = &sorted[..n - kept];
        if dropped.iter().any(|&x| x != T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "the dual system needs {} initial positions at the origin",
                n - kept
            )));
        }
        let config = Self {
            family,
            particles: kept,
            padding: n - kept,
            dt,
            horizon,
            replicas,
            seed,
            initial_positions: sorted[n - kept..].iter().map(|&x| x * scale).collect(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let beta = self.family.beta();
        if !(beta > T::zero()) {
            return bad(format!("β = {beta}"));
        }
        if !(self.family.nu() > -T::one()) {
            return bad(format!("ν = {}", self.family.nu()));
        }
        if !(self.dt > T::zero()) || !(self.horizon >= T::zero()) || !self.horizon.is_finite() {
            return bad(format!("dt = {}, horizon = {}", self.dt, self.horizon));
        }
        if self.particles == 0 || self.replicas == 0 {
            return bad("need at least one particle and one replica".into());
        }
        if self.initial_positions.len() != self.particles {
            return bad(format!("{} initial positions for {} particles", self.initial_positions.len(), self.particles));
        }
        if self.initial_positions.iter().any(|x| !x.is_finite()) {
            return bad("initial positions must be finite".into());
        }
        if !matches!(self.family, SdeFamily::Dyson { .. }) && self.initial_positions.iter().any(|&x| x < T::zero()) {
            return Err(Error::InvalidDomain("positions must be non-negative".into()));
        }
        Ok(())
    }

    /// Total particle count `N` including padding.
    pub fn total_particles(&self) -> usize {
        self.particles + self.padding
    }

    /// `λ = (N + ν)/N` of the system as posed (before any dualisation).
    pub fn lambda(&self) -> Option<T> {
        let n = T::from_count(self.total_particles());
        match self.family {
            SdeFamily::Dyson { .. } => None,
            _ if self.padding > 0 => Some(T::from_count(self.particles) / n),
            _ => Some((n + self.family.nu()) / n),
        }
    }

    /// Positions divided by this converge to the hydrodynamic limit:
    /// `√(βN/2)` for Dyson, `βN` for Bru–Wishart, `√(βN)` for chiral.
    pub fn hydrodynamic_scale(&self) -> T {
        let bn = self.family.beta() * T::from_count(self.total_particles());
        match self.family {
            SdeFamily::Dyson { .. } => (bn * T::half()).sqrt(),
            SdeFamily::BruWishart { .. } => bn,
            SdeFamily::Chiral { .. } => bn.sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
struct Stream<T> {
    rng: ChaCha8Rng,
    /// Last accepted substep, the starting guess for the next one.
    h_last: T,
}

/// `M` replicas of the particle system at a common time.
#[derive(Debug, Clone)]
pub struct Ensemble<T: Scalar> {
    /// `M × particles`, each row sorted.
    pub positions: Vec<Vec<T>>,
    pub time: T,
    pub padding: usize,
    /// Substeps taken per replica, including the ones forced by the guard.
    pub substeps: Vec<usize>,
    streams: Vec<Stream<T>>,
}

impl<T: Scalar> Ensemble<T> {
    /// Replica `r` draws from ChaCha8 stream `r` of `seed`.
    pub fn new(config: &SdeConfig<T>) -> Result<Self> {
        config.validate()?;
        let mut start = config.initial_positions.clone();
        start.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let streams = (0..config.replicas)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(r as u64);
                Stream { rng, h_last: config.dt }
            })
            .collect();
        Ok(Self {
            positions: vec![start; config.replicas],
            time: T::zero(),
            padding: config.padding,
            substeps: vec![0; config.replicas],
            streams,
        })
    }
}

/// Drift of every particle in sorted `x`.
pub fn drift<T: Scalar>(family: SdeFamily<T>, x: &[T]) -> Vec<T> {
    let n = x.len();
    let mut diff = vec![T::zero(); n];
    let mut mirror = vec![T::zero(); n];
    let chiral = matches!(family, SdeFamily::Chiral { .. });
    for i in 0..n {
        for j in i + 1..n {
            let inv = (x[i] - x[j]).recip();
            diff[i] += inv;
            diff[j] -= inv;
            if chiral {
                let s = (x[i] + x[j]).recip();
                mirror[i] += s;
                mirror[j] += s;
            }
        }
    }
    let two = T::two();
    match family {
        SdeFamily::Dyson { beta } => diff.iter().map(|&d| beta * T::half() * d).collect(),
        SdeFamily::BruWishart { beta, nu } => {
            x.iter().zip(&diff).map(|(&xi, &d)| beta * ((nu + T::one()) + two * xi * d)).collect()
        }
        SdeFamily::Chiral { beta, nu } => x
            .iter()
            .zip(diff.iter().zip(&mirror))
            .map(|(&xi, (&d, &m))| (beta * (nu + T::one()) - T::one()) / (two * xi) + beta * T::half() * (d + m))
            .collect(),
    }
}

fn noise_scale<T: Scalar>(family: SdeFamily<T>, x: T) -> T {
    match family {
        SdeFamily::BruWishart { .. } => T::two() * x.max(T::zero()).sqrt(),
        _ => T::one(),
    }
}

fn sort<T: Scalar>(x: &mut [T]) {
    x.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
}

/// Largest step that keeps every adjacent gap open under the drift alone.
fn gap_limit<T: Scalar>(x: &[T], d: &[T]) -> T {
    let mut h = T::infinity();
    for i in 0..x.len().saturating_sub(1) {
        let closing = d[i] - d[i + 1];
        if closing > T::zero() {
            h = h.min((x[i + 1] - x[i]) / closing);
        }
    }
    h
}

fn advance<T: Scalar>(family: SdeFamily<T>, x: &mut Vec<T>, stream: &mut Stream<T>, span: T) -> Result<usize> {
    let mut remaining = span;
    let mut substeps = 0;
    let reflect = !matches!(family, SdeFamily::Dyson { .. });
    while remaining > T::zero() {
        let coincident = x.windows(2).any(|w| w[0] == w[1])
            || (matches!(family, SdeFamily::Chiral { .. }) && x.first() == Some(&T::zero()));
        let (h, d) = if coincident {
            // Interactions are singular at coincidence: move without them.
            let d = match family {
                SdeFamily::BruWishart { beta, nu } => vec![beta * (nu + T::one()); x.len()],
                _ => vec![T::zero(); x.len()],
            };
            (remaining, d)
        } else {
            let d = drift(family, x);
            let mut h = remaining.min(stream.h_last * T::two());
            let mut rejections = 0;
            // Collision guard: a drift that would reverse a gap is retried
            // with half the step, or the largest gap-preserving step if smaller.
            while !(gap_limit(x, &d) > h) {
                rejections += 1;
                if rejections > MAX_REJECTIONS || !(h > T::zero()) {
                    return Err(Error::StepFailed(rejections));
                }
                h = (h * T::half()).min(gap_limit(x, &d) * T::half());
            }
            stream.h_last = h;
            (h, d)
        };
        let sqrt_h = h.sqrt();
        for (xi, di) in x.iter_mut().zip(&d) {
            let xi_n: f64 = stream.rng.sample(StandardNormal);
            let step = *di * h + noise_scale(family, *xi) * sqrt_h * T::lit(xi_n);
            *xi += step;
            if reflect {
                *xi = xi.abs();
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepFailed(0));
        }
        sort(x);
        remaining -= h;
        substeps += 1;
    }
    Ok(substeps)
}

/// Advances every replica by `config.dt`, in parallel over replicas.
pub fn step<T: Scalar>(config: &SdeConfig<T>, ensemble: Ensemble<T>) -> Result<Ensemble<T>> {
    step_by(config, ensemble, config.dt)
}

fn step_by<T: Scalar>(config: &SdeConfig<T>, mut ensemble: Ensemble<T>, span: T) -> Result<Ensemble<T>> {
    if !(span > T::zero()) {
        return Err(Error::InvalidParameter(format!("dt = {span}")));
    }
    let family = config.family;
    let taken: Vec<Result<usize>> = ensemble
        .positions
        .par_iter_mut()
        .zip(ensemble.streams.par_iter_mut())
        .map(|(x, s)| advance(family, x, s, span))
        .collect();
    for (count, t) in ensemble.substeps.iter_mut().zip(taken) {
        *count += t?;
    }
    ensemble.time += span;
    Ok(ensemble)
}

/// Runs from time 0 to the horizon, calling `observe` after every step.
pub fn run_with<T: Scalar>(config: &SdeConfig<T>, mut observe: impl FnMut(&Ensemble<T>)) -> Result<Ensemble<T>> {
    let mut ens = Ensemble::new(config)?;
    observe(&ens);
    let steps = (config.horizon / config.dt).ceil().to_usize().unwrap_or(0);
    for k in 0..steps {
        let next = (T::from_count(k + 1) * config.dt).min(config.horizon);
        let span = next - ens.time;
        if span > T::zero() {
            ens = step_by(config, ens, span)?;
            ens.time = next;
        }
        observe(&ens);
    }
    Ok(ens)
}

pub fn run<T: Scalar>(config: &SdeConfig<T>) -> Result<Ensemble<T>> {
    run_with(config, |_| {})
}

/// Pooled atoms with weight `1/(MN)`, counting padding particles at 0.
/// With `symmetrized`, each atom is split into `±x` with half the weight.
pub fn empirical_measure<T: Scalar>(ensemble: &Ensemble<T>, symmetrized: bool) -> Result<MeasureSpec<T>> {
    empirical_scaled(ensemble, T::one(), symmetrized)
}

fn empirical_scaled<T: Scalar>(ensemble: &Ensemble<T>, scale: T, symmetrized: bool) -> Result<MeasureSpec<T>> {
    let per = ensemble.positions.first().map_or(0, |p| p.len()) + ensemble.padding;
    let count = T::from_count(per * ensemble.positions.len());
    let w = count.recip();
    let mut atoms = Vec::with_capacity(per * ensemble.positions.len() * if symmetrized { 2 } else { 1 });
    for row in &ensemble.positions {
        for x in row.iter().copied().chain(std::iter::repeat_n(T::zero(), ensemble.padding)) {
            let x = x / scale;
            if symmetrized {
                atoms.push((x, w * T::half()));
                atoms.push((-x, w * T::half()));
            } else {
                atoms.push((x, w));
            }
        }
    }
    let domain = if symmetrized { Domain::Symmetric } else { Domain::RealLine };
    MeasureSpec::normalized(atoms, None, domain)
}

/// The empirical measure in the units of the hydrodynamic limit, mirrored
/// for the chiral system.
pub fn limit_measure<T: Scalar>(config: &SdeConfig<T>, ensemble: &Ensemble<T>) -> Result<MeasureSpec<T>> {
    let symmetrized = matches!(config.family, SdeFamily::Chiral { .. });
    empirical_scaled(ensemble, config.hydrodynamic_scale(), symmetrized)
}

/// [`limit_measure`] of each replica on its own.
pub fn replica_limit_measures<T: Scalar>(config: &SdeConfig<T>, ensemble: &Ensemble<T>) -> Result<Vec<MeasureSpec<T>>> {
    (0..ensemble.positions.len())
        .map(|r| {
            let single = Ensemble {
                positions: vec![ensemble.positions[r].clone()],
                time: ensemble.time,
                padding: ensemble.padding,
                substeps: vec![ensemble.substeps[r]],
                streams: Vec::new(),
            };
            limit_measure(config, &single)
        })
        .collect()
}

/// Resolution for comparing simulations with limits recovered on a grid,
/// whose atoms are located to about the square of the grid spacing.
pub const KS_RESOLUTION: f64 = 1e-6;

/// Average over replicas of the KS distance, at [`KS_RESOLUTION`], between
/// each replica's limit measure mapped through `map` and `target`.
pub fn mean_ks<T: Scalar>(
    config: &SdeConfig<T>,
    ensemble: &Ensemble<T>,
    target: &MeasureSpec<T>,
    map: impl Fn(&MeasureSpec<T>) -> MeasureSpec<T>,
) -> Result<T> {
    let measures = replica_limit_measures(config, ensemble)?;
    let resolution = T::lit(KS_RESOLUTION);
    let total = measures.iter().fold(T::zero(), |acc, mu| acc + ks_distance_with(&map(mu), target, resolution));
    Ok(total / T::from_count(measures.len()))
}

/// `sup_x |F(x) - G(x)|`, with atoms closer than [`ATOM_MERGE_TOL`]
/// identified. See [`ks_distance_with`].
pub fn ks_distance<T: Scalar>(empirical: &MeasureSpec<T>, target: &MeasureSpec<T>) -> T {
    ks_distance_with(empirical, target, T::lit(ATOM_MERGE_TOL))
}

/// `sup_x |F(x) - G(x)|` evaluated at `x ± δ` around every atom location
/// and grid node, `δ = resolution · max(1, |x|)`. Atoms closer than `δ` count
/// as one point, so an atom recovered numerically next to an exact one does
/// not register as a jump; on continuous parts the offset moves the CDFs
/// by at most density × `δ`.
pub fn ks_distance_with<T: Scalar>(empirical: &MeasureSpec<T>, target: &MeasureSpec<T>, resolution: T) -> T {
    let (a, b) = (Cdf::new(empirical), Cdf::new(target));
    let mut pts = a.breakpoints();
    pts.extend(b.breakpoints());
    pts.iter().fold(T::zero(), |m, &x| {
        let d = resolution * x.abs().max(T::one());
        m.max((a.at(x + d) - b.at(x + d)).abs()).max((a.at(x - d) - b.at(x - d)).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{make_dirac, make_marcenko_pastur, make_semicircle, moments};

    fn config(family: SdeFamily<f64>, start: Vec<f64>, dt: f64, horizon: f64, replicas: usize) -> SdeConfig<f64> {
        SdeConfig { family, particles: start.len(), padding: 0, dt, horizon, replicas, seed: 7, initial_positions: start }
    }

    #[test]
    fn two_particle_drift() {
        // (β/2)/(1 - (-1)) = 1/2 outward.
        let d = drift(SdeFamily::Dyson { beta: 2.0 }, &[-1.0, 1.0]);
        let dt = 0.01f64;
        assert!((-1.0 + d[0] * dt + (1.0 + dt / 2.0)).abs() < 1e-15);
        assert!((1.0 + d[1] * dt - (1.0 + dt / 2.0)).abs() < 1e-15);
        assert_eq!(drift(SdeFamily::Dyson { beta: 2.0 }, &[0.3]), vec![0.0]);
    }

    #[test]
    fn single_particle_is_brownian() {
        let ens = run(&config(SdeFamily::Dyson { beta: 2.0 }, vec![0.0], 0.01, 1.0, 4000)).unwrap();
        let xs: Vec<f64> = ens.positions.iter().map(|r| r[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.06 && (var - 1.0).abs() < 0.1, "{mean} {var}");
    }

    #[test]
    fn empirical_and_ks() {
        let mut ens = Ensemble::new(&config(SdeFamily::Dyson { beta: 2.0 }, vec![-1.0, 1.0], 0.1, 0.1, 1)).unwrap();
        let mu = empirical_measure(&ens, false).unwrap();
        assert_eq!(mu.atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
        assert_eq!(ks_distance(&mu, &mu), 0.0);
        assert_eq!(ks_distance(&make_dirac(0.0), &make_dirac(1.0)), 1.0);
        // An atom recovered a rounding error away from the empirical one.
        assert_eq!(ks_distance(&make_dirac(0.0), &make_dirac(-2.4e-14)), 0.0);
        let half = MeasureSpec::new(vec![(0.0, 0.5), (1.0, 0.5)], None, Domain::RealLine).unwrap();
        assert_eq!(ks_distance(&half, &make_dirac(0.0)), 0.5);
        assert_eq!(ks_distance(&make_dirac(0.0), &make_dirac(1e-7)), 1.0);
        assert_eq!(ks_distance_with(&make_dirac(0.0), &make_dirac(1e-7), KS_RESOLUTION), 0.0);
        ens.positions[0] = vec![0.5, 2.0];
        let sym = empirical_measure(&ens, true).unwrap();
        assert_eq!(sym.atoms().len(), 4);
        assert!(sym.is_symmetric());
    }

    #[test]
    fn coincident_starts_separate() {
        let ens = run(&config(SdeFamily::Dyson { beta: 2.0 }, vec![-1.0, -1.0, 1.0, 1.0], 1e-3, 0.1, 2)).unwrap();
        assert!(ens.positions.iter().all(|r| r.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn seeds_reproduce() {
        let c = SdeConfig::for_limit(Family::Dyson, 2.0, 16, &[0.0; 16], 1e-3, 0.05, 3, 11).unwrap();
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_ne!(a.positions[0], a.positions[1]);
    }

    #[test]
    fn dyson_moments_from_origin() {
        let n = 64;
        let c = SdeConfig::for_limit(Family::Dyson, 2.0, n, &vec![0.0; n], 1e-3, 1.0, 10, 1).unwrap();
        let ens = run(&c).unwrap();
        let mu = limit_measure(&c, &ens).unwrap();
        let tau = moments(&mu, 2);
        let (m1, m2): (f64, f64) = (tau.get(1), tau.get(2));
        assert!(m1.abs() < 0.05 && (m2 - 1.0).abs() < 0.1, "{:?}", tau.values);
        assert!(ks_distance(&mu, &make_semicircle(1.0).unwrap()) < 0.1);
        assert!(ens.positions.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn dyson_mean_is_conserved() {
        // Pairwise drifts cancel, so each replica mean is a Brownian motion
        // with variance t/N.
        let (n, m) = (32, 40);
        let start: Vec<f64> = (0..n).map(|i| i as f64 / n as f64 - 0.5).collect();
        let c = SdeConfig::for_limit(Family::Dyson, 2.0, n, &start, 1e-3, 1.0, m, 5).unwrap();
        let ens = run(&c).unwrap();
        let s = c.hydrodynamic_scale();
        let means: Vec<f64> = ens.positions.iter().map(|r| r.iter().sum::<f64>() / (n as f64 * s)).collect();
        let avg = means.iter().sum::<f64>() / m as f64;
        let var = means.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() / (m - 1) as f64;
        let start_mean = start.iter().sum::<f64>() / n as f64;
        assert!((avg - start_mean).abs() <= 3.0 * (var / m as f64).sqrt(), "{avg} {var}");
    }

    #[test]
    fn wishart_means() {
        let n = 64;
        for &lambda in &[1.0f64, 0.5] {
            let c = SdeConfig::for_limit(Family::Wishart { lambda }, 2.0, n, &vec![0.0; n], 1e-3, 1.0, 10, 3).unwrap();
            assert_eq!(c.lambda(), Some(lambda));
            let ens = run(&c).unwrap();
            assert!(ens.positions.iter().flatten().all(|&x| x >= 0.0));
            let mu = limit_measure(&c, &ens).unwrap();
            let m1: f64 = moments(&mu, 1).get(1);
            assert!((m1 - lambda).abs() < 0.1);
            let ks = ks_distance(&mu, &make_marcenko_pastur(lambda, 1.0).unwrap());
            assert!(ks < 0.12, "λ={lambda}: {ks}");
        }
    }

    #[test]
    fn chiral_tracks_wishart_under_coupled_noise() {
        // S = √Λ when both systems see the same Brownian increments.
        let (beta, nu) = (2.0, 2.0);
        let s0 = vec![0.5, 1.0, 1.5];
        let chiral = config(SdeFamily::Chiral { beta, nu }, s0.clone(), 1e-6, 0.01, 1);
        let wishart = config(SdeFamily::BruWishart { beta, nu }, s0.iter().map(|s| s * s).collect(), 1e-6, 0.01, 1);
        let s = run(&chiral).unwrap();
        let l = run(&wishart).unwrap();
        for (si, li) in s.positions[0].iter().zip(&l.positions[0]) {
            assert!((si * si - li).abs() < 1e-3, "{si} {li}");
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(config(SdeFamily::Dyson { beta: 0.0 }, vec![0.0], 0.1, 1.0, 1).validate().is_err());
        assert!(config(SdeFamily::BruWishart { beta: 2.0, nu: -1.5 }, vec![0.0], 0.1, 1.0, 1).validate().is_err());
        assert!(config(SdeFamily::BruWishart { beta: 2.0, nu: 0.0 }, vec![-0.1], 0.1, 1.0, 1).validate().is_err());
        assert!(SdeConfig::for_limit(Family::Wishart { lambda: 0.5 }, 2.0, 4, &[0.0, 0.1, 0.2, 0.3], 0.1, 1.0, 1, 0).is_err());
    }
}
