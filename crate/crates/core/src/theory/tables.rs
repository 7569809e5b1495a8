//! JSON-facing aggregation of the constants and function tables.

use serde::{Deserialize, Serialize};

use super::{degree_law, derive_params, solve_p0, SpectralConstants, TheoryFns};
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub tau: f64,
    pub q: f64,
    pub p: f64,
}

/// Constant/function tables for one `(p, m)`.
///
/// `zeta` and `eta` are `null` when undefined; `regime` distinguishes the
/// exponential (`alpha < 1`) and power-law (`alpha > 1`) cases, with
/// `"near-critical"` flagged around `alpha = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryTables {
    pub p: f64,
    pub m: u32,
    pub alpha: f64,
    pub gamma: f64,
    pub p0: f64,
    pub regime: String,
    pub zeta: Option<f64>,
    pub eta: Option<f64>,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
    pub grid: Vec<GridRow>,
}

/// How close `alpha` may come to 1 before the tables mark the run
/// near-critical and omit `zeta`/`eta`.
pub const NEAR_CRITICAL_WINDOW: f64 = 1e-6;

impl TheoryTables {
    pub fn build(p: f64, m: u32, k_max: usize, tau_max: f64, grid_step: f64) -> Result<Self> {
        let params = derive_params::<f64>(p, m)?;
        let near_critical = (params.alpha - 1.0).abs() < NEAR_CRITICAL_WINDOW;
        let (zeta, eta, regime) = if near_critical {
            (None, None, "near-critical".to_string())
        } else {
            let c = SpectralConstants::for_params(&params)?;
            let regime = if params.alpha < 1.0 {
                "subcritical-exponential"
            } else {
                "supercritical-power-law"
            };
            (Some(c.zeta), c.eta, regime.to_string())
        };
        let fns = TheoryFns::new(params.clone(), tau_max.ceil() as usize + 1);
        let mut grid = Vec::new();
        let mut tau = 0.0;
        while tau <= tau_max + 1e-12 {
            grid.push(GridRow {
                tau,
                q: fns.q_eval(tau)?,
                p: fns.p_eval(tau)?,
            });
            tau += grid_step;
        }
        let law = degree_law(&params, k_max, 1e-10)?;
        Ok(TheoryTables {
            p,
            m,
            alpha: params.alpha,
            gamma: params.gamma,
            p0: solve_p0::<f64>(),
            regime,
            zeta,
            eta,
            b: fns.b_table().to_vec(),
            x: law.x,
            grid,
        })
    }
}
