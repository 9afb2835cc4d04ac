use freeburgers::evolution::{
    evolve_with, r_evolve_chiral, r_evolve_dyson, r_evolve_wishart, EvolutionProblem, EvolveOptions, Family,
};
use freeburgers::measures::moments;
use freeburgers::series::{moments_to_cumulants, CumulantSequence};
use serde_json::json;

use super::{fmt, grid};
use crate::initial;
use crate::manifest::RunManifest;
use crate::output::Outputs;
use crate::CliError;

/// Cumulants at time `t` from the series laws.
pub(super) fn series_cumulants(family: Family<f64>, r0: &CumulantSequence<f64>, t: f64) -> Result<CumulantSequence<f64>, CliError> {
    Ok(match family {
        Family::Dyson => r_evolve_dyson(r0, t),
        Family::Wishart { lambda } => r_evolve_wishart(r0, lambda, t),
        Family::Chiral { lambda } => r_evolve_chiral(r0, lambda, t)?,
    })
}

pub fn run(m: &RunManifest) -> Result<(), CliError> {
    let init = initial::load(&m.initial)?;
    let family = m.family();
    let problem = EvolutionProblem::with_field(family, init.field.clone(), init.measure.clone())?;
    let xs = grid(family, &init.measure, m.t, m.grid);
    let opts = EvolveOptions { eps: m.eps_schedule.clone(), ..Default::default() };
    let out = Outputs::create(m)?;

    let result = match evolve_with(&problem, m.t, &xs, &opts) {
        Ok(r) => r,
        Err(e) => {
            out.json("diagnostics.json", json!({ "error": e.to_string() }))?;
            return Err(e.into());
        }
    };
    let mu = &result.recovered;

    let mut density = out.csv("density.csv", "x,rho")?;
    if let Some(d) = mu.density() {
        for i in 0..d.len() {
            density.row(&[fmt(d.node(i)), fmt(d.values[i])])?;
        }
    }
    density.finish()?;

    let series = series_cumulants(family, &init.cumulants(m.order), m.t)?;
    let recovered = moments_to_cumulants(&moments(mu, m.order));
    let mut table = out.csv("cumulants.csv", "n,kappa_series,kappa_density,abs_diff")?;
    for n in 1..=m.order {
        let (a, b) = (series.get(n), recovered.get(n));
        table.row(&[n.to_string(), fmt(a), fmt(b), fmt((a - b).abs())])?;
    }
    table.finish()?;

    let atoms: Vec<_> = mu.atoms().iter().map(|&(x, w)| json!({ "location": x, "mass": w })).collect();
    out.json(
        "diagnostics.json",
        json!({
            "mass": mu.total_mass(),
            "atoms": atoms,
            "max_residual": result.diagnostics.max_residual,
            "continuation_steps": result.diagnostics.continuation_steps,
            "failed_points": result.diagnostics.failures,
            "grid": { "lo": xs[0], "hi": xs[xs.len() - 1], "nodes": xs.len() },
            "eps": result.eps,
        }),
    )?;

    println!("mass {:.6}", mu.total_mass());
    for &(x, w) in mu.atoms() {
        println!("atom {w:.4} @ {x:.4}");
    }
    println!("wrote {}", out.dir().display());
    Ok(())
}
