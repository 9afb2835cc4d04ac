//! Initial measures from shorthands or JSON files.

use std::sync::Arc;

use freeburgers::measures::{self, MeasureSpec};
use freeburgers::series::{cumulants_to_moments, moments_to_cumulants, CumulantSequence, MomentSequence};
use freeburgers::transforms::{r_series, ClosedForm, QuadratureField, SharedField, SymmetrizedField};

use crate::CliError;

/// A measure with the Cauchy transform used to evolve it.
pub struct Initial {
    pub measure: MeasureSpec<f64>,
    pub field: SharedField<f64>,
    closed: Option<ClosedForm<f64>>,
    /// The half-line measure this one symmetrizes, for `sym-mp`.
    square_of: Option<ClosedForm<f64>>,
}

impl Initial {
    /// Free cumulants `κ_1..κ_k`, exact for shorthands.
    pub fn cumulants(&self, k: usize) -> CumulantSequence<f64> {
        if let Some(c) = self.closed {
            return c.cumulants(k);
        }
        if let Some(c) = self.square_of {
            // τ_{2n}(μ) = τ_n(μ²) and the odd moments vanish.
            let tau = cumulants_to_moments(&c.cumulants(k / 2 + 1));
            let lifted = MomentSequence::new((1..=k).map(|n| if n % 2 == 0 { tau.get(n / 2) } else { 0.0 }).collect());
            let mut kappa = moments_to_cumulants(&lifted);
            kappa.values.iter_mut().step_by(2).for_each(|v| *v = 0.0);
            return kappa;
        }
        r_series(&self.measure, k)
    }

    /// Cumulants of the square push-forward.
    pub fn square_cumulants(&self, k: usize) -> CumulantSequence<f64> {
        match (self.square_of, self.closed) {
            (Some(c), _) => c.cumulants(k),
            (None, Some(ClosedForm::Bernoulli { a })) => ClosedForm::Dirac { b: a * a }.cumulants(k),
            (None, Some(ClosedForm::Semicircle { t })) => ClosedForm::MarcenkoPastur { lambda: 1.0, t }.cumulants(k),
            (None, Some(ClosedForm::Dirac { b })) => ClosedForm::Dirac { b: b * b }.cumulants(k),
            _ => r_series(&measures::push_forward_square(&self.measure), k),
        }
    }
}

fn params(body: &str, spec: &str) -> Result<Vec<(String, f64)>, CliError> {
    body.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value in {spec:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("bad number {v:?} in {spec:?}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn get(ps: &[(String, f64)], key: &str, spec: &str) -> Result<f64, CliError> {
    ps.iter().find(|p| p.0 == key).map(|p| p.1).ok_or_else(|| CliError::Usage(format!("{spec:?} needs {key}=")))
}

/// `dirac:b=`, `bernoulli:a=`, `semicircle:t=`, `mp:lambda=,t=`,
/// `sym-mp:lambda=,t=` (the symmetric measure whose square is `mp`), or a
/// path to a measure JSON file.
pub fn load(spec: &str) -> Result<Initial, CliError> {
    let Some((kind, body)) = spec.split_once(':') else {
        let text = std::fs::read_to_string(spec)?;
        let measure = MeasureSpec::from_json(&text)?;
        let field: SharedField<f64> = Arc::new(QuadratureField::new(measure.clone()));
        return Ok(Initial { measure, field, closed: None, square_of: None });
    };
    let ps = params(body, spec)?;
    let closed = match kind {
        "dirac" => ClosedForm::Dirac { b: get(&ps, "b", spec)? },
        "bernoulli" => ClosedForm::Bernoulli { a: get(&ps, "a", spec)? },
        "semicircle" => ClosedForm::Semicircle { t: get(&ps, "t", spec)? },
        "mp" | "sym-mp" => ClosedForm::MarcenkoPastur { lambda: get(&ps, "lambda", spec)?, t: get(&ps, "t", spec)? },
        _ => return Err(CliError::Usage(format!("unknown measure shorthand {kind:?}"))),
    };
    closed.validate()?;
    if kind == "sym-mp" {
        let measure = measures::symmetrize(&closed.measure()?)?;
        let field: SharedField<f64> = Arc::new(SymmetrizedField::new(Arc::new(closed)));
        let sym = Initial { measure, field, closed: None, square_of: Some(closed) };
        return Ok(sym);
    }
    Ok(Initial { measure: closed.measure()?, field: Arc::new(closed), closed: Some(closed), square_of: None })
}
