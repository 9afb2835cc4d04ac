//! Acceptance criteria. Prints one line per criterion and exits non-zero if
//! any fails. Criterion numbers given as arguments select a subset.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use freeburgers::evolution::{
    contour_moments, dyson_r_residual, evolve, evolve_with, explicit_ma, explicit_wa, r_evolve_dyson, r_evolve_wishart,
    solve_dyson_point, solve_wishart_point, subordination_check, verify_chiral_r_identity, verify_s_identities,
    EvolutionProblem, EvolutionResult, EvolveOptions, Family, SolverOptions,
};
use freeburgers::measures::{make_bernoulli, make_dirac, make_marcenko_pastur, moments, symmetrize, MeasureSpec};
use freeburgers::sde::{self, SdeConfig};
use freeburgers::series::{moments_to_cumulants, CumulantSequence};
use freeburgers::transforms::{
    s_from_cumulants, s_symmetric, square_pair_residuals, uniform_grid, CauchyField, ClosedForm, SharedField,
    SymmetrizedField,
};
use freeburgers::Error;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;
type Outcome = Result<(bool, String), Error>;

/// `max |a - b|` over paired values.
fn worst(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn cumulants(mu: &MeasureSpec<f64>, k: usize) -> CumulantSequence<f64> {
    moments_to_cumulants(&moments(mu, k))
}

fn bernoulli_problem(family: Family<f64>) -> EvolutionProblem<f64> {
    EvolutionProblem::with_field(family, Arc::new(ClosedForm::Bernoulli { a: 1.0 }), make_bernoulli(1.0).unwrap()).unwrap()
}

fn dirac_problem(family: Family<f64>, b: f64) -> EvolutionProblem<f64> {
    EvolutionProblem::with_field(family, Arc::new(ClosedForm::Dirac { b }), make_dirac(b)).unwrap()
}

/// Dyson flow from `d_1` to `t = 1`, recovered on a grid covering `[-3.5, 3.5]`.
fn bernoulli_flow() -> Result<(EvolutionProblem<f64>, EvolutionResult<f64>), Error> {
    let problem = bernoulli_problem(Family::Dyson);
    let res = evolve(&problem, 1.0, &uniform_grid(-3.5, 3.5, 4096))?;
    Ok((problem, res))
}

/// `(z - √(z² - 4t)) / 2t`, the root taken as `√(z - 2√t) √(z + 2√t)`.
fn semicircle_g(t: f64, z: C) -> C {
    let r = 2.0 * t.sqrt();
    (z - (z - r).sqrt() * (z + r).sqrt()) / (2.0 * t)
}

/// `(z + t(1-λ) - √((z - x⁺)(z - x⁻))) / 2tz` with `x^± = t(1 ± √λ)²`.
fn marcenko_pastur_g(lambda: f64, t: f64, z: C) -> C {
    let (xp, xm) = (t * (1.0 + lambda.sqrt()).powi(2), t * (1.0 - lambda.sqrt()).powi(2));
    (z + t * (1.0 - lambda) - (z - xp).sqrt() * (z - xm).sqrt()) / (2.0 * t * z)
}

fn line_points() -> Vec<C> {
    (0..100).map(|i| C::new(-5.0 + 10.0 * i as f64 / 99.0, 0.5)).collect()
}

fn c1_dyson_fundamental() -> Outcome {
    let start = Instant::now();
    let g0 = ClosedForm::Dirac { b: 0.0 };
    let mut err = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        for z in line_points() {
            err = err.max((solve_dyson_point(&g0, t, z)? - semicircle_g(t, z)).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((err <= 1e-8 && secs < 10.0, format!("max |G - G_closed| = {err:.2e} (tol 1e-8), {secs:.2} s (limit 10 s)")))
}

fn c2_wishart_fundamental() -> Outcome {
    let g0 = ClosedForm::Dirac { b: 0.0 };
    let mut err = 0.0f64;
    for lambda in [0.5, 1.0, 1.5] {
        for t in [0.5, 1.0] {
            for z in line_points() {
                err = err.max((solve_wishart_point(&g0, lambda, t, z)? - marcenko_pastur_g(lambda, t, z)).norm());
            }
        }
    }
    Ok((err <= 1e-8, format!("max |G - G_closed| = {err:.2e} (tol 1e-8)")))
}

fn c3_bernoulli_cumulants() -> Outcome {
    let (_, res) = bernoulli_flow()?;
    let kappa = cumulants(&res.recovered, 6);
    let want = [0.0, 2.0, 0.0, -1.0, 0.0, 2.0];
    debug_assert!((1..=6).all(|n| bernoulli_flow_cumulant(n, 1.0, 1.0) == want[n - 1]));
    let low = worst((1..=4).map(|n| (kappa.get(n), want[n - 1])));
    let six = (kappa.get(6) - want[5]).abs();
    Ok((
        low <= 1e-3 && six <= 5e-3,
        format!("n <= 4: {low:.2e} (tol 1e-3), n = 6: {six:.2e} (tol 5e-3)"),
    ))
}

fn c4_wishart_from_dirac() -> Outcome {
    let (lambda, b, t) = (1.5, 0.7, 0.8);
    let formula = |n: usize| (lambda * t + b * n as f64) * t.powi(n as i32 - 1);
    let r0 = CumulantSequence::new((1..=8).map(|n| if n == 1 { b } else { 0.0 }).collect());
    let series = r_evolve_wishart(&r0, lambda, t);
    let exact = worst((1..=8).map(|n| (series.get(n), formula(n))));

    let problem = dirac_problem(Family::Wishart { lambda }, b);
    let hi = (b.sqrt() + t.sqrt() * (1.0 + lambda.sqrt())).powi(2);
    // κ_7 and κ_8 need the O(ε²) inversion bias of the default schedule
    // reduced, so this path uses lower heights on a finer grid.
    let opts = EvolveOptions { eps: vec![4e-3, 2e-3, 1e-3], ..Default::default() };
    let res = evolve_with(&problem, t, &uniform_grid(-0.5, hi + 1.0, 8192), &opts)?;
    let kappa = cumulants(&res.recovered, 8);
    let density = worst((1..=8).map(|n| (kappa.get(n), formula(n))));
    let coarse = cumulants(&evolve(&problem, t, &uniform_grid(-0.5, hi + 1.0, 4096))?.recovered, 8);
    let coarse = worst((1..=8).map(|n| (coarse.get(n), formula(n))));
    Ok((
        exact <= 1e-12 && density <= 1e-3,
        format!(
            "series n <= 8: {exact:.2e} (tol 1e-12), density n <= 8: {density:.2e} (tol 1e-3; default schedule gives {coarse:.2e})"
        ),
    ))
}

fn c5_dyson_r_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut series = 0.0f64;
    for _ in 0..50 {
        let k = rng.random_range(2..=16);
        let r0 = CumulantSequence::new((0..k).map(|_| rng.random_range(-2.0..2.0)).collect());
        let t = rng.random_range(0.0..3.0);
        let rt = r_evolve_dyson(&r0, t);
        series = series.max(worst((1..=k).map(|n| (rt.get(n) - r0.get(n), if n == 2 { t } else { 0.0 }))));
    }

    let t = 1.0;
    let mut pointwise = 0.0f64;
    let flows = [
        (dirac_problem(Family::Dyson, 0.0), (-3.0, 3.0)),
        (dirac_problem(Family::Dyson, 1.0), (-2.0, 4.0)),
        (bernoulli_problem(Family::Dyson), (-3.5, 3.5)),
    ];
    for (problem, (lo, hi)) in flows {
        let res = evolve(&problem, t, &uniform_grid(lo, hi, 4096))?;
        let (k0, kt) = (cumulants(&problem.initial_measure, 4), cumulants(&res.recovered, 4));
        pointwise = pointwise.max(worst((1..=4).map(|n| (kt.get(n) - k0.get(n), if n == 2 { t } else { 0.0 }))));
    }
    Ok((
        series <= 1e-12 && pointwise <= 1e-3,
        format!("series, 50 random: {series:.2e} (tol 1e-12), pointwise n <= 4: {pointwise:.2e} (tol 1e-3)"),
    ))
}

fn contour_cumulants(field: &dyn CauchyField<f64>, radius: f64) -> Result<CumulantSequence<f64>, Error> {
    Ok(moments_to_cumulants(&contour_moments(field, 8, radius, 256)?))
}

fn c6_chiral_r_identity() -> Outcome {
    // d_1 and symmetrize(mp(λ, 1)) for each λ.
    let mut initials: Vec<(SharedField<f64>, MeasureSpec<f64>)> =
        vec![(Arc::new(ClosedForm::Bernoulli { a: 1.0 }), make_bernoulli(1.0)?)];
    for l0 in [0.5, 1.0, 1.5] {
        let nu: SharedField<f64> = Arc::new(ClosedForm::MarcenkoPastur { lambda: l0, t: 1.0 });
        initials.push((Arc::new(SymmetrizedField::new(nu)), symmetrize(&make_marcenko_pastur(l0, 1.0)?)?));
    }
    let (mut identity, mut equivalence) = (0.0f64, 0.0f64);
    for (field, mu) in &initials {
        for lambda in [0.5f64, 1.0, 1.5] {
            for t in [0.5f64, 1.0] {
                let problem = EvolutionProblem::with_field(Family::Chiral { lambda }, field.clone(), mu.clone())?;
                let radius = 1.5 * (mu.support_radius() + t.sqrt() * (1.0 + lambda.sqrt())) + 0.5;
                let r0 = contour_cumulants(field.as_ref(), radius)?;
                let rt = contour_cumulants(problem.field_at(t, SolverOptions::default()).as_ref(), radius)?;
                let res = verify_chiral_r_identity(&rt, &r0, lambda, t)?;
                identity = identity.max(res);
                if lambda == 1.0 {
                    equivalence = equivalence.max((res - dyson_r_residual(&rt, &r0, t)).abs());
                }
            }
        }
    }
    Ok((
        identity < 1e-6 && equivalence <= 1e-10,
        format!("identity {identity:.2e} (tol 1e-6), at λ = 1 vs dyson residual {equivalence:.2e} (tol 1e-10)"),
    ))
}

/// `κ_n` of the Dyson flow from `d_a`: `t + a²` at `n = 2`, and
/// `-(-1)^{n/2} (n-3)!! / (n/2)! 2^{n/2-1} aⁿ` at even `n ≥ 4`.
fn bernoulli_flow_cumulant(n: usize, a: f64, t: f64) -> f64 {
    match n {
        2 => t + a * a,
        _ if n % 2 == 1 => 0.0,
        _ => {
            let m = n / 2;
            let double_fact = (1..=n - 3).step_by(2).map(|j| j as f64).product::<f64>();
            let fact = (1..=m).map(|j| j as f64).product::<f64>();
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            sign * double_fact / fact * 2f64.powi(m as i32 - 1) * a.powi(n as i32)
        }
    }
}

fn c7_s_identities() -> Outcome {
    let k = 12;
    let dyson = verify_s_identities(&bernoulli_problem(Family::Dyson), 1.0, k)?;
    let wishart = verify_s_identities(&dirac_problem(Family::Wishart { lambda: 1.5 }, 0.7), 0.8, k)?;
    let chiral = verify_s_identities(&bernoulli_problem(Family::Chiral { lambda: 1.0 }), 1.0, k)?;
    let identities = dyson.max().max(wishart.max()).max(chiral.max());
    let reduction = chiral.reduction.ok_or_else(|| Error::InvalidInput("no λ = 1 reduction row".into()))?;

    // The explicit S-transforms of both scenarios against the series route.
    let (kw, sw) = explicit_wa(1.0, 1.0, k)?;
    let from_series = s_symmetric(&freeburgers::series::cumulants_to_moments(&r_evolve_dyson(
        &cumulants(&make_bernoulli(1.0)?, 2 * k + 2),
        1.0,
    )))?;
    let (km, sm) = explicit_ma(1.5, 0.7, 0.8, k)?;
    let r0 = CumulantSequence::new((1..=k + 1).map(|n| if n == 1 { 0.7 } else { 0.0 }).collect());
    let explicit = sw
        .max_abs_diff(&from_series.truncate(sw.order()))?
        .max(sm.max_abs_diff(&s_from_cumulants(&r_evolve_wishart(&r0, 1.5, 0.8))?.truncate(sm.order()))?)
        .max(worst((1..=k).map(|n| (kw.get(n), bernoulli_flow_cumulant(n, 1.0, 1.0)))))
        .max(worst((1..=k).map(|n| (km.get(n), (1.5 * 0.8 + 0.7 * n as f64) * 0.8f64.powi(n as i32 - 1)))));
    Ok((
        identities < 1e-8 && reduction < 1e-8 && explicit < 1e-8,
        format!(
            "K = {k}: identities {identities:.2e}, λ = 1 reduction {reduction:.2e}, explicit forms {explicit:.2e} (tol 1e-8)"
        ),
    ))
}

fn c8_square_pairs() -> Outcome {
    let k = 12;
    let samples: Vec<C> =
        [-2.5, -0.7, 0.0, 0.3, 1.4].iter().flat_map(|&x| [0.1, 0.8, 2.0].map(|y| C::new(x, y))).collect();
    let mut pairs = vec![];
    for a in [0.5, 1.0, 1.7] {
        pairs.push((ClosedForm::Bernoulli { a }, ClosedForm::Dirac { b: a * a }));
    }
    for t in [0.5, 1.0, 2.0] {
        pairs.push((ClosedForm::Semicircle { t }, ClosedForm::MarcenkoPastur { lambda: 1.0, t }));
    }
    let (mut g, mut rs) = (0.0f64, 0.0f64);
    for (mu, nu) in pairs {
        let res = square_pair_residuals(&mu, Arc::new(nu), &mu.cumulants(2 * k + 2), &nu.cumulants(k + 1), k, &samples)?;
        g = g.max(res.cauchy).max(res.moments);
        rs = rs.max(res.r).max(res.s);
    }
    Ok((g <= 1e-8 && rs <= 1e-8, format!("G and moments {g:.2e}, R and S {rs:.2e} (tol 1e-8)")))
}

fn c9_inversion() -> Outcome {
    let wishart = evolve(&dirac_problem(Family::Wishart { lambda: 0.5 }, 0.0), 1.0, &uniform_grid(-0.5, 3.5, 4096))?;
    let dyson = evolve(&dirac_problem(Family::Dyson, 0.0), 1.0, &uniform_grid(-3.0, 3.0, 4096))?;
    let mass = (wishart.recovered.total_mass() - 1.0).abs().max((dyson.recovered.total_mass() - 1.0).abs());
    let atom = wishart.recovered.atom_mass_near(0.0, 1e-3);
    let rho0 = dyson.recovered.density().map_or(f64::NAN, |d| d.value_at(0.0));
    let atom_err = (atom - 0.5).abs();
    let rho_err = (rho0 - std::f64::consts::FRAC_1_PI).abs();
    Ok((
        mass <= 1e-2 && atom_err <= 0.02 && rho_err <= 1e-3,
        format!("mass {mass:.1e} (tol 1e-2), atom at 0 {atom:.4} (0.5 ± 0.02), ρ(0) - 1/π {rho_err:.1e} (tol 1e-3)"),
    ))
}

/// Runs the system from `N δ_0` and returns the per-replica mean KS distance
/// of `map(limit measure)` from `target`, the pooled limit measure and the
/// wall time.
fn simulate(
    family: Family<f64>,
    beta: f64,
    target: &MeasureSpec<f64>,
    map: impl Fn(&MeasureSpec<f64>) -> MeasureSpec<f64>,
) -> Result<(f64, MeasureSpec<f64>, Duration), Error> {
    let n = 256;
    let start = Instant::now();
    let config = SdeConfig::for_limit(family, beta, n, &vec![0.0; n], 1e-4, 1.0, 20, 2026)?;
    let ensemble = sde::run(&config)?;
    let ks = sde::mean_ks(&config, &ensemble, target, map)?;
    let pooled = sde::limit_measure(&config, &ensemble)?;
    Ok((ks, pooled, start.elapsed()))
}

fn c10_particle_systems() -> Outcome {
    let limit = Duration::from_secs(300);
    let semicircle = freeburgers::measures::make_semicircle(1.0)?;
    let mut ok = true;
    let mut parts = vec![];
    let mut slowest = Duration::ZERO;

    let mut pooled = vec![];
    for beta in [2.0, 1.0] {
        let (ks, mu, time) = simulate(Family::Dyson, beta, &semicircle, MeasureSpec::clone)?;
        ok &= ks <= 0.08;
        parts.push(format!("dyson β={beta} {ks:.4}"));
        pooled.push(mu);
        slowest = slowest.max(time);
    }
    let agreement = sde::ks_distance(&pooled[0], &pooled[1]);
    ok &= agreement <= 0.05;
    parts.push(format!("β-agreement {agreement:.4} (tol 0.05)"));

    for lambda in [0.5, 1.5] {
        let target = make_marcenko_pastur(lambda, 1.0)?;
        let (ks, _, time) = simulate(Family::Wishart { lambda }, 2.0, &target, MeasureSpec::clone)?;
        ok &= ks <= 0.08;
        parts.push(format!("bru-wishart λ={lambda} {ks:.4}"));
        slowest = slowest.max(time);
    }

    let lambda = 0.5;
    let target = make_marcenko_pastur(lambda, 1.0)?;
    let (ks, _, time) =
        simulate(Family::Chiral { lambda }, 2.0, &target, freeburgers::measures::push_forward_square)?;
    ok &= ks <= 0.08;
    parts.push(format!("chiral² vs wishart λ={lambda} {ks:.4}"));
    slowest = slowest.max(time);

    ok &= slowest < limit;
    Ok((ok, format!("{} (KS tol 0.08), slowest run {:.0} s (limit 300 s)", parts.join(", "), slowest.as_secs_f64())))
}

fn c11_subordination() -> Outcome {
    let (problem, res) = bernoulli_flow()?;
    let (err, lowest) = subordination_check(&problem, &res)?;
    let accepted = res.g_values.iter().filter(|g| g.re.is_finite()).count();
    Ok((
        err <= 1e-10 && lowest > 0.0,
        format!("max |G_t - G_0∘ω_t| = {err:.2e} over {accepted} points (tol 1e-10), min Im ω_t {lowest:.2e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("dyson fundamental solution", c1_dyson_fundamental),
        ("wishart fundamental solution", c2_wishart_fundamental),
        ("cumulants of the flow from d_1", c3_bernoulli_cumulants),
        ("wishart flow from δ_b", c4_wishart_from_dirac),
        ("dyson R-transform law", c5_dyson_r_law),
        ("chiral R-transform identity", c6_chiral_r_identity),
        ("S-transform identities", c7_s_identities),
        ("square push-forward identities", c8_square_pairs),
        ("stieltjes inversion", c9_inversion),
        ("particle systems vs limits", c10_particle_systems),
        ("subordination", c11_subordination),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        println!("criterion {id:>2} {:<4} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
