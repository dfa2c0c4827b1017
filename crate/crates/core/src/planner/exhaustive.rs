//! Exact orienteering by depth-first enumeration, for small instances.

use nalgebra::Point2;

use super::optw::OptwInstance;
use super::PlannerError;

/// Largest instance [`exhaustive_optw`] accepts.
pub const MAX_EXHAUSTIVE_NODES: usize = 8;

/// Optimal total reward and one visit order attaining it (lexicographically first).
pub fn exhaustive_optw(inst: &OptwInstance) -> Result<(f64, Vec<usize>), PlannerError> {
    let m = inst.nodes.len();
    if m > MAX_EXHAUSTIVE_NODES {
        return Err(PlannerError::InstanceTooLarge {
            nodes: m,
            max: MAX_EXHAUSTIVE_NODES,
        });
    }
    let mut best = (0.0, Vec::new());
    let mut order = Vec::with_capacity(m);
    let mut visited = vec![false; m];
    dfs(inst, &inst.start, inst.start_time, 0.0, &mut visited, &mut order, &mut best);
    Ok(best)
}

fn dfs(
    inst: &OptwInstance,
    loc: &Point2<f64>,
    time: usize,
    reward: f64,
    visited: &mut [bool],
    order: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if reward > best.0 {
        *best = (reward, order.clone());
    }
    for j in 0..inst.nodes.len() {
        if visited[j] {
            continue;
        }
        if let Some(arrive) = inst.arrival(loc, time, j) {
            visited[j] = true;
            order.push(j);
            let next = inst.nodes[j].location;
            dfs(inst, &next, arrive, reward + inst.nodes[j].reward, visited, order, best);
            order.pop();
            visited[j] = false;
        }
    }
}
