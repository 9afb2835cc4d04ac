use std::sync::Arc;

use freeburgers::evolution::{
    contour_moments, dyson_r_residual, verify_chiral_r_identity, verify_s_identities, EvolutionProblem, Family,
    SolverOptions,
};
use freeburgers::series::{moments_to_cumulants, CumulantSequence};
use freeburgers::transforms::{square_pair_residuals, CauchyField, SquaredField};
use freeburgers::Error;
use num_complex::Complex;
use serde_json::json;

use super::{fmt, support_bound};
use crate::initial;
use crate::manifest::RunManifest;
use crate::output::Outputs;
use crate::CliError;

/// Agreement of series and pointwise cumulants, relative to the scale of `μ_t`.
const R_LAW_TOL: f64 = 1e-6;
const CHIRAL_R_TOL: f64 = 1e-6;
/// Chiral and Dyson R residuals at `λ = 1`.
const EQUIVALENCE_TOL: f64 = 1e-10;
const S_TOL: f64 = 1e-8;
const LEMMA_TOL: f64 = 1e-8;
/// Cumulant orders compared through contour integrals.
const CONTOUR_ORDER: usize = 8;
const CONTOUR_NODES: usize = 256;
/// Series order of the S identities. Beyond it, roundoff in the
/// compositions exceeds [`S_TOL`] for initial measures given on a grid.
const S_ORDER: usize = 8;
const LEMMA_ORDER: usize = 6;

struct Row {
    check: &'static str,
    residual: Option<f64>,
    tolerance: f64,
}

impl Row {
    fn status(&self) -> &'static str {
        match self.residual {
            None => "skipped",
            Some(r) if r <= self.tolerance => "pass",
            Some(_) => "fail",
        }
    }
}

fn contour_cumulants(field: &dyn CauchyField<f64>, radius: f64) -> Result<CumulantSequence<f64>, CliError> {
    Ok(moments_to_cumulants(&contour_moments(field, CONTOUR_ORDER, radius, CONTOUR_NODES)?))
}

fn even_part(kappa: &CumulantSequence<f64>) -> CumulantSequence<f64> {
    CumulantSequence::new(kappa.values.iter().enumerate().map(|(i, &v)| if i % 2 == 0 { 0.0 } else { v }).collect())
}

fn dilate(kappa: &CumulantSequence<f64>, c: f64) -> CumulantSequence<f64> {
    CumulantSequence::new(kappa.values.iter().zip(1..).map(|(&v, n)| v * c.powi(n)).collect())
}

fn undefined(e: &Error) -> bool {
    matches!(e, Error::SUndefined(_) | Error::DegenerateMeasure(_) | Error::NotInvertible | Error::BranchUndefined(_))
}

pub fn run(m: &RunManifest) -> Result<(), CliError> {
    let init = initial::load(&m.initial)?;
    let family = m.family();
    let problem = EvolutionProblem::with_field(family, init.field.clone(), init.measure.clone())?;
    let out = Outputs::create(m)?;
    let mut rows = Vec::new();

    let (lo, hi) = support_bound(family, &init.measure, m.t);
    let radius = 1.25 * lo.abs().max(hi.abs());
    let r0 = contour_cumulants(init.field.as_ref(), radius)?;
    let field_t = problem.field_at(m.t, SolverOptions::default());
    let r_t = contour_cumulants(field_t.as_ref(), radius)?;
    let symmetric = init.measure.is_symmetric();
    // Odd contour cumulants of a symmetric measure are quadrature noise; the
    // r_law row still compares those of μ_t against the exact zeros.
    let r0 = if symmetric { even_part(&r0) } else { r0 };
    let series = super::evolve::series_cumulants(family, &r0, m.t)?;
    // κ_n scales like sⁿ with s the root-mean-square size of μ_t.
    let s = (series.get(2) + series.get(1).powi(2)).sqrt().max(1.0);
    let r_law = (1..=CONTOUR_ORDER).fold(0.0f64, |acc, n| {
        acc.max((series.get(n) - r_t.get(n)).abs() / series.get(n).abs().max(s.powi(n as i32)))
    });
    rows.push(Row { check: "r_law", residual: Some(r_law), tolerance: R_LAW_TOL });
    let r_t = if symmetric { even_part(&r_t) } else { r_t };
    // The identities are checked on the flow dilated to unit size: dilating
    // by c multiplies κ_n by cⁿ and time by c².
    let (r0, r_t, t) = (dilate(&r0, s.recip()), dilate(&r_t, s.recip()), m.t / (s * s));

    if let Family::Chiral { lambda } = family {
        let res = verify_chiral_r_identity(&r_t, &r0, lambda, t)?;
        rows.push(Row { check: "chiral_r_identity", residual: Some(res), tolerance: CHIRAL_R_TOL });
    }
    let unit = match family {
        Family::Dyson => symmetric,
        Family::Chiral { lambda } => lambda == 1.0,
        Family::Wishart { .. } => false,
    };
    if unit {
        let chiral = verify_chiral_r_identity(&r_t, &r0, 1.0, t)?;
        let dyson = dyson_r_residual(&r_t, &r0, t);
        rows.push(Row { check: "chiral_vs_dyson", residual: Some((chiral - dyson).abs()), tolerance: EQUIVALENCE_TOL });
    }

    match verify_s_identities(&problem, m.t, m.order.min(S_ORDER)) {
        Ok(s) => {
            for (check, v) in [
                ("s_multiple", s.multiple),
                ("s_dyson", s.dyson),
                ("s_wishart", s.wishart),
                ("s_chiral", s.chiral),
                ("s_reduction", s.reduction),
            ] {
                if v.is_some() {
                    rows.push(Row { check, residual: v, tolerance: S_TOL });
                }
            }
        }
        Err(e) if undefined(&e) => rows.push(Row { check: "s_identities", residual: None, tolerance: S_TOL }),
        Err(e) => return Err(e.into()),
    }

    if symmetric {
        let nu_field = Arc::new(SquaredField::new(init.field.clone()));
        let samples = [Complex::new(0.3, 1.1), Complex::new(-1.7, 0.4), Complex::new(2.5, 2.0)];
        let lemma = square_pair_residuals(
            init.field.as_ref(),
            nu_field,
            &init.cumulants(2 * LEMMA_ORDER + 2),
            &init.square_cumulants(LEMMA_ORDER + 1),
            LEMMA_ORDER,
            &samples,
        );
        match lemma {
            Ok(l) => {
                for (check, v) in
                    [("lemma_moments", l.moments), ("lemma_cauchy", l.cauchy), ("lemma_r", l.r), ("lemma_s", l.s)]
                {
                    rows.push(Row { check, residual: Some(v), tolerance: LEMMA_TOL });
                }
            }
            Err(e) if undefined(&e) => rows.push(Row { check: "lemma", residual: None, tolerance: LEMMA_TOL }),
            Err(e) => return Err(e.into()),
        }
    }

    let mut csv = out.csv("residuals.csv", "check,residual,tolerance,status")?;
    for r in &rows {
        csv.row(&[
            r.check.to_string(),
            r.residual.map_or_else(String::new, fmt),
            fmt(r.tolerance),
            r.status().to_string(),
        ])?;
    }
    csv.finish()?;
    let report: Vec<_> = rows
        .iter()
        .map(|r| json!({ "check": r.check, "residual": r.residual, "tolerance": r.tolerance, "status": r.status() }))
        .collect();
    out.json("residuals.json", json!({ "rows": report }))?;

    for r in &rows {
        let shown = r.residual.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"));
        println!("{:<20} {:>10}  (tol {:.0e})  {}", r.check, shown, r.tolerance, r.status());
    }
    let failed = rows.iter().filter(|r| r.status() == "fail").count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
