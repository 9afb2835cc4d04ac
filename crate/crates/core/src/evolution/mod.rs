//! Measure-valued evolutions through their Cauchy, R- and S-transforms.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::scalar::Scalar;
use crate::transforms::cauchy::{QuadratureField, SharedField};
use crate::transforms::inversion::{check_schedule, default_eps_schedule, invert_values};

pub mod laws;
pub mod solver;

pub use laws::{
    contour_moments, dyson_r_residual, explicit_ma, explicit_wa, r_evolve_chiral, r_evolve_dyson, r_evolve_wishart,
    s_identity_chiral, s_identity_dyson, s_identity_multiple, s_identity_wishart, verify_chiral_r_identity,
    verify_s_identities, SIdentityResiduals,
};
pub use solver::{
    chiral_from_wishart, solve_chiral_detailed, solve_chiral_direct, solve_chiral_point, solve_dyson_detailed,
    solve_dyson_point, solve_family, solve_wishart_detailed, solve_wishart_point, Family, FixedPointField,
    PointSolution, SolverOptions,
};

/// Largest fraction of grid points allowed to fail in [`evolve`].
pub const MAX_FAILED_FRACTION: f64 = 0.01;

/// An initial measure, its Cauchy transform and the flow it follows.
#[derive(Clone)]
pub struct EvolutionProblem<T: Scalar> {
    pub family: Family<T>,
    pub initial_field: SharedField<T>,
    pub initial_measure: MeasureSpec<T>,
}

impl<T: Scalar> EvolutionProblem<T> {
    /// Uses the quadrature transform of `measure`.
    pub fn new(family: Family<T>, measure: MeasureSpec<T>) -> Result<Self> {
        let field: SharedField<T> = Arc::new(QuadratureField::new(measure.clone()));
        Self::with_field(family, field, measure)
    }

    pub fn with_field(family: Family<T>, field: SharedField<T>, measure: MeasureSpec<T>) -> Result<Self> {
        if let Some(lambda) = family.lambda() {
            solver::check_lambda(lambda)?;
        }
        match family {
            Family::Wishart { .. } if !measure.is_nonneg() => {
                Err(Error::InvalidDomain("the wishart flow needs an initial measure on [0, ∞)".into()))
            }
            Family::Chiral { .. } if !measure.is_symmetric() => {
                Err(Error::InvalidDomain("the chiral flow needs a symmetric initial measure".into()))
            }
            _ => Ok(Self { family, initial_field: field, initial_measure: measure }),
        }
    }

    /// The evolved transform at time `t`, solved on demand.
    pub fn field_at(&self, t: T, opts: SolverOptions) -> SharedField<T> {
        FixedPointField::shared(self.family, self.initial_field.clone(), t, opts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub eps: Vec<f64>,
    pub solver: SolverOptions,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { eps: default_eps_schedule(), solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_residual: f64,
    /// Accepted continuation steps summed over all points.
    pub continuation_steps: usize,
    /// Indices into the real grid where some height failed.
    pub failures: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EvolutionResult<T: Scalar> {
    pub t: T,
    pub eps: Vec<T>,
    /// `x_i + i ε_k` stored at `k * len + i`.
    pub z_grid: Vec<Complex<T>>,
    /// `G(z)` in the same layout; NaN at failed points.
    pub g_values: Vec<Complex<T>>,
    pub recovered: MeasureSpec<T>,
    pub diagnostics: Diagnostics,
}

/// Solves the family's equation on `x + iε` over the schedule and inverts.
pub fn evolve<T: Scalar>(problem: &EvolutionProblem<T>, t: T, x_grid: &[T]) -> Result<EvolutionResult<T>> {
    evolve_with(problem, t, x_grid, &EvolveOptions::default())
}

pub fn evolve_with<T: Scalar>(
    problem: &EvolutionProblem<T>,
    t: T,
    x_grid: &[T],
    opts: &EvolveOptions,
) -> Result<EvolutionResult<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    let eps: Vec<T> = opts.eps.iter().map(|&e| T::lit(e)).collect();
    check_schedule(x_grid, &eps)?;
    let n = x_grid.len();
    let z_grid: Vec<Complex<T>> = eps.iter().flat_map(|&e| x_grid.iter().map(move |&x| Complex::new(x, e))).collect();

    if t == T::zero() {
        let g_values = z_grid
            .par_iter()
            .map(|&z| problem.initial_field.eval(z).unwrap_or(Complex::new(T::nan(), T::nan())))
            .collect();
        let diagnostics = Diagnostics { max_residual: 0.0, continuation_steps: 0, failures: vec![] };
        return Ok(EvolutionResult { t, eps, z_grid, g_values, recovered: problem.initial_measure.clone(), diagnostics });
    }

    let solved: Vec<Result<PointSolution<T>>> = z_grid
        .par_iter()
        .map(|&z| solve_family(problem.family, problem.initial_field.clone(), t, z, &opts.solver))
        .collect();

    let mut failures = vec![];
    let mut max_residual = 0.0f64;
    let mut steps = 0;
    let mut values: Vec<Vec<Option<Complex<T>>>> = vec![vec![None; n]; eps.len()];
    let mut g_values = Vec::with_capacity(z_grid.len());
    for (j, s) in solved.iter().enumerate() {
        let (k, i) = (j / n, j % n);
        match s {
            Ok(p) => {
                max_residual = max_residual.max(p.residual.to_f64().unwrap_or(f64::NAN));
                steps += p.continuation_steps;
                values[k][i] = Some(p.g);
                g_values.push(p.g);
            }
            Err(_) => {
                failures.push(i);
                g_values.push(Complex::new(T::nan(), T::nan()));
            }
        }
    }
    failures.sort_unstable();
    failures.dedup();
    if failures.len() as f64 > MAX_FAILED_FRACTION * n as f64 {
        return Err(Error::EvolutionFailed { failed: failures.len(), total: n });
    }
    let recovered = invert_values(x_grid, &eps, &values)?;
    let diagnostics = Diagnostics { max_residual, continuation_steps: steps, failures };
    Ok(EvolutionResult { t, eps, z_grid, g_values, recovered, diagnostics })
}

/// For the Dyson flow: the largest `|G_t(z) - G_0(ω_t(z))|` with
/// `ω_t(z) = z - t G_t(z)` over accepted points, and the smallest `Im ω_t`.
pub fn subordination_check<T: Scalar>(problem: &EvolutionProblem<T>, result: &EvolutionResult<T>) -> Result<(f64, f64)> {
    if problem.family != Family::Dyson {
        return Err(Error::InvalidInput("subordination is checked for the dyson flow".into()));
    }
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let mut worst = 0.0f64;
    let mut lowest = f64::INFINITY;
    for (&z, &g) in result.z_grid.iter().zip(&result.g_values) {
        if !(g.re.is_finite() && g.im.is_finite()) {
            continue;
        }
        let omega = z - g * result.t;
        lowest = lowest.min(f(omega.im));
        worst = worst.max(f((g - problem.initial_field.eval(omega)?).norm()));
    }
    Ok((worst, lowest))
}
