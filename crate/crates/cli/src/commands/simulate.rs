use std::io::Write;
use std::sync::Arc;

use freeburgers::evolution::{evolve_with, EvolutionProblem, EvolveOptions, Family};
use freeburgers::measures::{moments, push_forward_square, Cdf, MeasureSpec};
use freeburgers::sde::{self, Ensemble, SdeConfig, SdeFamily};
use freeburgers::transforms::{SharedField, SquaredField};
use serde_json::json;

use super::{fmt, grid};
use crate::initial;
use crate::manifest::RunManifest;
use crate::output::Outputs;
use crate::CliError;

/// KS distance regarded as agreement with the limit at desk-scale `N`.
const KS_THRESHOLD: f64 = 0.08;

/// Positions at the quantiles `(i + 1/2)/n` of `mu`.
fn quantiles(mu: &MeasureSpec<f64>, n: usize) -> Vec<f64> {
    let cdf = Cdf::new(mu);
    (0..n).map(|i| cdf.quantile((i as f64 + 0.5) / n as f64)).collect()
}

fn config(m: &RunManifest, mu: &MeasureSpec<f64>) -> Result<SdeConfig<f64>, CliError> {
    let p = &m.sde;
    let family = m.family();
    let start = match family {
        Family::Chiral { .. } => quantiles(&push_forward_square(mu), p.particles).into_iter().map(|y| y.max(0.0).sqrt()).collect(),
        _ => quantiles(mu, p.particles),
    };
    let Some(nu) = p.nu else {
        return Ok(SdeConfig::for_limit(family, p.beta, p.particles, &start, p.dt, m.t, p.replicas, p.seed)?);
    };
    let sde_family = match family {
        Family::Dyson => return Err(CliError::Usage("--nu applies to the wishart and chiral systems".into())),
        Family::Wishart { .. } => SdeFamily::BruWishart { beta: p.beta, nu },
        Family::Chiral { .. } => SdeFamily::Chiral { beta: p.beta, nu },
    };
    let mut c = SdeConfig {
        family: sde_family,
        particles: p.particles,
        padding: 0,
        dt: p.dt,
        horizon: m.t,
        replicas: p.replicas,
        seed: p.seed,
        initial_positions: start,
    };
    let scale = c.hydrodynamic_scale();
    c.initial_positions.iter_mut().for_each(|x| *x *= scale);
    c.validate()?;
    Ok(c)
}

/// The limit at time `t` from the pointwise solver and Stieltjes inversion.
fn target(family: Family<f64>, field: SharedField<f64>, mu: &MeasureSpec<f64>, m: &RunManifest) -> Result<MeasureSpec<f64>, CliError> {
    if m.t == 0.0 {
        return Ok(mu.clone());
    }
    let problem = EvolutionProblem::with_field(family, field, mu.clone())?;
    let opts = EvolveOptions { eps: m.eps_schedule.clone(), ..Default::default() };
    Ok(evolve_with(&problem, m.t, &grid(family, mu, m.t, m.grid), &opts)?.recovered)
}

struct Row {
    name: &'static str,
    value: f64,
    threshold: f64,
}

pub fn run(m: &RunManifest) -> Result<(), CliError> {
    let init = initial::load(&m.initial)?;
    let c = config(m, &init.measure)?;
    let lambda = c.lambda().unwrap_or(1.0);
    let family = match m.family() {
        Family::Dyson => Family::Dyson,
        Family::Wishart { .. } => Family::Wishart { lambda },
        Family::Chiral { .. } => Family::Chiral { lambda },
    };
    let out = Outputs::create(m)?;

    let mut trajectory = match m.sde.trajectory_every {
        Some(k) if k > 0 => Some((k, out.csv("trajectory.csv", "t,replica,particle,x")?)),
        _ => None,
    };
    let mut step = 0usize;
    let mut write_error = None;
    let run = sde::run_with(&c, |ens: &Ensemble<f64>| {
        if let Some((every, csv)) = trajectory.as_mut() {
            if step % *every == 0 {
                for (r, row) in ens.positions.iter().enumerate() {
                    for (i, &x) in row.iter().enumerate() {
                        if let Err(e) = csv.row(&[fmt(ens.time), r.to_string(), i.to_string(), fmt(x)]) {
                            write_error.get_or_insert(e);
                        }
                    }
                }
            }
        }
        step += 1;
    });
    if let Some((_, csv)) = trajectory {
        csv.finish()?;
    }
    if let Some(e) = write_error {
        return Err(e);
    }
    let ens = match run {
        Ok(e) => e,
        Err(e) => {
            out.json("summary.json", json!({ "error": e.to_string() }))?;
            return Err(e.into());
        }
    };

    // A single particle has no hydrodynamic limit to compare against.
    let pooled = sde::limit_measure(&c, &ens)?;
    let mut rows = Vec::new();
    let mut tau_target = None;
    if c.particles > 1 {
        let target_mu = target(family, init.field.clone(), &init.measure, m)?;
        rows.push(Row { name: "ks_mean", value: sde::mean_ks(&c, &ens, &target_mu, |mu| mu.clone())?, threshold: KS_THRESHOLD });
        rows.push(Row { name: "ks_pooled", value: sde::ks_distance_with(&pooled, &target_mu, sde::KS_RESOLUTION), threshold: KS_THRESHOLD });
        if let Family::Chiral { lambda } = family {
            let nu = push_forward_square(&init.measure);
            let nu_field: SharedField<f64> = Arc::new(SquaredField::new(init.field.clone()));
            let wishart = target(Family::Wishart { lambda }, nu_field, &nu, m)?;
            let ks = sde::mean_ks(&c, &ens, &wishart, push_forward_square)?;
            rows.push(Row { name: "ks_squared_vs_wishart", value: ks, threshold: KS_THRESHOLD });
        }
        tau_target = Some(moments(&target_mu, 4).values);
    }
    if c.particles == 1 && matches!(family, Family::Dyson) {
        // A lone Dyson particle is a Brownian motion: variance t.
        let xs: Vec<f64> = ens.positions.iter().map(|r| r[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len().max(2) - 1) as f64;
        let x0 = c.initial_positions[0];
        let spread = 4.0 * (2.0 / (xs.len().max(2) - 1) as f64).sqrt();
        rows.push(Row { name: "brownian_variance", value: (var / m.t.max(f64::MIN_POSITIVE) - 1.0).abs(), threshold: spread });
        rows.push(Row { name: "brownian_mean", value: (mean - x0).abs(), threshold: 4.0 * (m.t / xs.len() as f64).sqrt() });
    }

    let status = |r: &Row| if r.value <= r.threshold { "pass" } else { "fail" };
    let mut csv = out.csv("ks.csv", "row,value,threshold,status")?;
    for r in &rows {
        csv.row(&[r.name.to_string(), fmt(r.value), fmt(r.threshold), status(r).to_string()])?;
    }
    csv.finish()?;
    let tau = moments(&pooled, 4);
    let substeps = ens.substeps.iter().sum::<usize>() as f64 / ens.substeps.len() as f64;
    out.json(
        "summary.json",
        json!({
            "particles": c.total_particles(),
            "simulated_particles": c.particles,
            "replicas": c.replicas,
            "lambda": c.lambda(),
            "time": ens.time,
            "mean_substeps": substeps,
            "moments": tau.values,
            "target_moments": tau_target,
            "rows": rows.iter().map(|r| json!({ "row": r.name, "value": r.value, "threshold": r.threshold, "status": status(r) })).collect::<Vec<_>>(),
        }),
    )?;
    for r in &rows {
        println!("{:<22} {:.4}  (threshold {:.3})  {}", r.name, r.value, r.threshold, status(r));
    }
    std::io::stdout().flush()?;
    Ok(())
}
