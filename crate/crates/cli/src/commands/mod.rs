mod evolve;
mod simulate;
mod verify;

use freeburgers::evolution::Family;
use freeburgers::measures::MeasureSpec;
use freeburgers::transforms::uniform_grid;

use crate::manifest::{CommandKind, RunManifest};
use crate::CliError;

pub fn dispatch(m: &RunManifest) -> Result<(), CliError> {
    if !(m.t >= 0.0) || !m.t.is_finite() {
        return Err(CliError::Usage(format!("--t {}", m.t)));
    }
    if m.order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    if m.grid < 2 {
        return Err(CliError::Usage("--grid needs at least 2 nodes".into()));
    }
    match m.command {
        CommandKind::Evolve => evolve::run(m),
        CommandKind::Verify => verify::run(m),
        CommandKind::Simulate => simulate::run(m),
    }
}

/// An interval containing the support of the flow at time `t`, padded so
/// the density decays to zero inside it.
fn support_bound(family: Family<f64>, mu: &MeasureSpec<f64>, t: f64) -> (f64, f64) {
    let (a, b) = mu.support();
    let (lo, hi) = match family {
        Family::Dyson => (a - 2.0 * t.sqrt(), b + 2.0 * t.sqrt()),
        Family::Wishart { lambda } => (0.0, (b.sqrt() + t.sqrt() * (1.0 + lambda.sqrt())).powi(2)),
        Family::Chiral { lambda } => {
            let r = mu.support_radius() + t.sqrt() * (1.0 + lambda.sqrt());
            (-r, r)
        }
    };
    let pad = 0.1 * (hi - lo) + 0.25;
    (lo - pad, hi + pad)
}

fn grid(family: Family<f64>, mu: &MeasureSpec<f64>, t: f64, nodes: usize) -> Vec<f64> {
    let (lo, hi) = support_bound(family, mu, t);
    uniform_grid(lo, hi, nodes)
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}
