use log::warn;

use super::{ResidualState, SolveConfig};
use crate::formulation::{build_residual_model, extract_parts, FormulationOptions, Plan, Solution};
use crate::instance::Instance;

/// Sequential allocation in input order with the embedded solver.
pub fn greedy(inst: &Instance) -> (Solution, Vec<usize>) {
    greedy_with(inst, &SolveConfig::default())
}

pub fn greedy_with(inst: &Instance, cfg: &SolveConfig<'_>) -> (Solution, Vec<usize>) {
    let mut state = ResidualState::new(inst);
    let ks: Vec<usize> = (0..inst.commodities.len()).collect();
    let mut plans = vec![Plan::rejected(); inst.commodities.len()];
    for (k, p) in allocate(inst, &ks, &mut state, cfg) {
        plans[k] = p;
    }
    let sol = Solution::with_penalty(inst, plans, state.installed, cfg.penalty(inst));
    let rejected = sol.rejected();
    (sol, rejected)
}

/// Allocates `ks` one by one on top of `state`, updating it.
pub(crate) fn allocate(
    inst: &Instance,
    ks: &[usize],
    state: &mut ResidualState,
    cfg: &SolveConfig<'_>,
) -> Vec<(usize, Plan)> {
    let opts = FormulationOptions {
        rejection_enabled: true,
        ..cfg.formulation
    };
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let (model, idx) = build_residual_model(inst, k, state, &opts);
        let sol = match cfg.backend.solve_mip(&model, &cfg.limits, None) {
            Ok(sol) if sol.has_point() => sol,
            Ok(sol) => {
                warn!("greedy: no point for commodity {} ({})", inst.commodities[k].id, sol.status);
                out.push((k, Plan::rejected()));
                continue;
            }
            Err(e) => {
                warn!("greedy: solver failed on commodity {}: {e}", inst.commodities[k].id);
                out.push((k, Plan::rejected()));
                continue;
            }
        };
        match extract_parts(inst, &idx, &sol.values) {
            Ok((mut parts, x_new)) => {
                let (_, plan) = parts.pop().expect("one commodity");
                if plan.accepted {
                    state.commit(inst, k, &plan, &x_new);
                }
                out.push((k, plan));
            }
            Err(e) => {
                warn!("greedy: {e}");
                out.push((k, Plan::rejected()));
            }
        }
    }
    out
}
