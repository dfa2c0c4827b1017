//! Monte Carlo tree search over visit orders of an orienteering instance.
//!
//! Each tree node is "robot has just visited OPTW node `j` at time `t`". A child
//! exists only if its window can still be met. Returns are the total reward of
//! the simulated visit order, divided by the sum of all node rewards so that the
//! exploration constant works on a fixed `[0, 1]` scale.

use nalgebra::Point2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optw::OptwInstance;
use super::PlannerError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MctsConfig {
    pub iterations: usize,
    pub kappa: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            kappa: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootChildStats {
    pub node: usize,
    pub visits: u32,
    /// Mean return, in reward units.
    pub mean_reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MctsPlan {
    /// Best simulated visit order starting with the chosen first node.
    pub order: Vec<usize>,
    /// Total reward of `order`.
    pub reward: f64,
    /// Mean return of the chosen first node, in reward units.
    pub estimate: f64,
    pub root_children: Vec<RootChildStats>,
}

impl MctsPlan {
    pub fn first(&self) -> usize {
        self.order[0]
    }
}

struct TreeNode {
    action: Option<usize>,
    parent: Option<usize>,
    location: Point2<f64>,
    time: usize,
    visited: Vec<bool>,
    path_reward: f64,
    /// Feasible, unvisited OPTW nodes not yet expanded, in descending id order.
    untried: Vec<usize>,
    children: Vec<usize>,
    n: u32,
    r: f64,
}

/// UCT score; unvisited children score infinity.
pub fn uct(r: f64, n: u32, parent_n: u32, kappa: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let n = n as f64;
    r / n + kappa * (2.0 * (parent_n.max(1) as f64).ln() / n).sqrt()
}

/// Index of the child with the highest UCT among `(R, N)` pairs; ties go to the lowest index.
pub fn uct_select(children: &[(f64, u32)], parent_n: u32, kappa: f64) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, &(r, n)) in children.iter().enumerate() {
        let s = uct(r, n, parent_n, kappa);
        if s > best_score {
            best_score = s;
            best = i;
        }
    }
    best
}

fn feasible_from(inst: &OptwInstance, loc: &Point2<f64>, time: usize, visited: &[bool]) -> Vec<usize> {
    (0..inst.nodes.len())
        .filter(|&j| !visited[j] && inst.arrival(loc, time, j).is_some())
        .collect()
}

/// Plans a visit order with UCT-guided search; deterministic for a fixed seed.
pub fn mcts_plan(
    inst: &OptwInstance,
    config: &MctsConfig,
    seed: u64,
) -> Result<MctsPlan, PlannerError> {
    let m = inst.nodes.len();
    let root_visited = vec![false; m];
    let mut root_untried = feasible_from(inst, &inst.start, inst.start_time, &root_visited);
    if root_untried.is_empty() {
        return Err(PlannerError::NoFeasibleAction);
    }
    root_untried.reverse();
    let scale: f64 = inst.nodes.iter().map(|n| n.reward.max(0.0)).sum();
    let norm = if scale > 0.0 { 1.0 / scale } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = vec![TreeNode {
        action: None,
        parent: None,
        location: inst.start,
        time: inst.start_time,
        visited: root_visited,
        path_reward: 0.0,
        untried: root_untried,
        children: Vec::new(),
        n: 0,
        r: 0.0,
    }];
    // Best (reward, order) seen through each first node.
    let mut best_by_first: Vec<Option<(f64, Vec<usize>)>> = vec![None; m];

    for _ in 0..config.iterations.max(1) {
        // Selection.
        let mut v = 0;
        while tree[v].untried.is_empty() && !tree[v].children.is_empty() {
            let stats: Vec<(f64, u32)> = tree[v]
                .children
                .iter()
                .map(|&c| (tree[c].r, tree[c].n))
                .collect();
            v = tree[v].children[uct_select(&stats, tree[v].n, config.kappa)];
        }
        // Expansion.
        if let Some(j) = tree[v].untried.pop() {
            let arrive = inst
                .arrival(&tree[v].location, tree[v].time, j)
                .expect("untried nodes are feasible");
            let mut visited = tree[v].visited.clone();
            visited[j] = true;
            let location = inst.nodes[j].location;
            let mut untried = feasible_from(inst, &location, arrive, &visited);
            untried.reverse();
            let child = TreeNode {
                action: Some(j),
                parent: Some(v),
                location,
                time: arrive,
                visited,
                path_reward: tree[v].path_reward + inst.nodes[j].reward,
                untried,
                children: Vec::new(),
                n: 0,
                r: 0.0,
            };
            tree.push(child);
            let c = tree.len() - 1;
            tree[v].children.push(c);
            v = c;
        }
        // Rollout.
        let mut order = Vec::new();
        let mut a = v;
        while let Some(j) = tree[a].action {
            order.push(j);
            a = tree[a].parent.unwrap();
        }
        order.reverse();
        let mut total = tree[v].path_reward;
        let mut loc = tree[v].location;
        let mut time = tree[v].time;
        let mut visited = tree[v].visited.clone();
        loop {
            let options = feasible_from(inst, &loc, time, &visited);
            if options.is_empty() {
                break;
            }
            let j = options[rng.random_range(0..options.len())];
            time = inst.arrival(&loc, time, j).unwrap();
            loc = inst.nodes[j].location;
            visited[j] = true;
            total += inst.nodes[j].reward;
            order.push(j);
        }
        if let Some(&first) = order.first() {
            let slot = &mut best_by_first[first];
            if slot.as_ref().is_none_or(|(b, _)| total > *b) {
                *slot = Some((total, order));
            }
        }
        // Backpropagation.
        let ret = total * norm;
        let mut b = Some(v);
        while let Some(i) = b {
            tree[i].n += 1;
            tree[i].r += ret;
            b = tree[i].parent;
        }
    }

    let root_children: Vec<RootChildStats> = tree[0]
        .children
        .iter()
        .map(|&c| RootChildStats {
            node: tree[c].action.unwrap(),
            visits: tree[c].n,
            mean_reward: if tree[c].n > 0 {
                tree[c].r / tree[c].n as f64 * scale
            } else {
                0.0
            },
        })
        .collect();
    let mut chosen = &root_children[0];
    for s in &root_children {
        let better = s.mean_reward > chosen.mean_reward
            || (s.mean_reward == chosen.mean_reward && s.node < chosen.node);
        if better {
            chosen = s;
        }
    }
    let (reward, order) = best_by_first[chosen.node]
        .clone()
        .expect("every expanded root child has a rollout");
    Ok(MctsPlan {
        order,
        reward,
        estimate: chosen.mean_reward,
        root_children,
    })
}
