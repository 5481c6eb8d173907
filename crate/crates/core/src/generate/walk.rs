use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{GraphNode, NodeId, Walkable};
use crate::seed::{rng_from_seed, Rng as SeededRng};

pub const DEFAULT_RESTART_PROB: f64 = 0.15;
pub const DEFAULT_SWITCH_PROB: f64 = 0.5;

/// What a restart-strategy walker does when it does not restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartFallback {
    /// Move to a uniformly chosen neighbor (classic random walk with restart).
    #[default]
    Neighbor,
    /// Jump to a uniformly chosen node anywhere in the graph.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeStrategy {
    UniformRandom,
    RandomNeighbor,
    RandomNeighborGraphSwitching {
        #[serde(default = "default_switch_prob")]
        switch_prob: f64,
    },
    RestartRandom {
        #[serde(default = "default_restart_prob")]
        restart_prob: f64,
        #[serde(default)]
        fallback: RestartFallback,
    },
    DegreeWeighted,
}

fn default_switch_prob() -> f64 {
    DEFAULT_SWITCH_PROB
}

fn default_restart_prob() -> f64 {
    DEFAULT_RESTART_PROB
}

impl Default for NodeStrategy {
    fn default() -> Self {
        NodeStrategy::RestartRandom {
            restart_prob: DEFAULT_RESTART_PROB,
            fallback: RestartFallback::Neighbor,
        }
    }
}

impl NodeStrategy {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be in [0,1], got {p}")))
            }
        };
        match *self {
            NodeStrategy::RestartRandom { restart_prob, .. } => check("restart_prob", restart_prob),
            NodeStrategy::RandomNeighborGraphSwitching { switch_prob } => {
                check("switch_prob", switch_prob)
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuePolicy {
    Random,
    #[default]
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub node_strategy: NodeStrategy,
    pub value_policy: ValuePolicy,
    pub target_length: usize,
    pub seed: u64,
    /// Defaults to the node holding the smallest time index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_node: Option<NodeId>,
}

impl WalkConfig {
    pub fn new(target_length: usize, seed: u64) -> Self {
        Self {
            node_strategy: NodeStrategy::default(),
            value_policy: ValuePolicy::default(),
            target_length,
            seed,
            start_node: None,
        }
    }

    pub fn with_strategy(mut self, strategy: NodeStrategy) -> Self {
        self.node_strategy = strategy;
        self
    }

    pub fn with_policy(mut self, policy: ValuePolicy) -> Self {
        self.value_policy = policy;
        self
    }

    pub fn with_start(mut self, node: NodeId) -> Self {
        self.start_node = Some(node);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_length == 0 {
            return Err(Error::InvalidConfig("target_length must be >= 1".into()));
        }
        self.node_strategy.validate()
    }
}

fn uniform_neighbor<G: Walkable + ?Sized>(graph: &G, current: NodeId, rng: &mut SeededRng) -> Result<NodeId> {
    let nbrs = graph.neighbors(current);
    if nbrs.is_empty() {
        return Err(isolated(current));
    }
    Ok(nbrs[rng.random_range(0..nbrs.len())].node)
}

fn isolated(node: NodeId) -> Error {
    Error::Integrity(format!("node {node} has no neighbors"))
}

/// Picks the node after `current`. `start` is the restart target.
pub fn next_node<G: Walkable + ?Sized>(
    graph: &G,
    current: NodeId,
    strategy: &NodeStrategy,
    start: NodeId,
    rng: &mut SeededRng,
) -> Result<NodeId> {
    let n = graph.node_count();
    if current >= n {
        return Err(Error::InvalidInput(format!("node {current} not in graph of {n} nodes")));
    }
    if n == 1 {
        return Ok(0);
    }
    match *strategy {
        NodeStrategy::UniformRandom => Ok(rng.random_range(0..n)),
        NodeStrategy::RandomNeighbor => uniform_neighbor(graph, current, rng),
        NodeStrategy::RandomNeighborGraphSwitching { switch_prob } => {
            let nbrs = graph.neighbors(current);
            if nbrs.is_empty() {
                return Err(isolated(current));
            }
            let cross: Vec<NodeId> = nbrs.iter().filter(|x| x.has_cross()).map(|x| x.node).collect();
            let switch = rng.random::<f64>() < switch_prob;
            let pool: Vec<NodeId> = if switch && !cross.is_empty() {
                cross
            } else {
                let within: Vec<NodeId> = nbrs.iter().filter(|x| x.has_within()).map(|x| x.node).collect();
                if within.is_empty() {
                    nbrs.iter().map(|x| x.node).collect()
                } else {
                    within
                }
            };
            Ok(pool[rng.random_range(0..pool.len())])
        }
        NodeStrategy::RestartRandom {
            restart_prob,
            fallback,
        } => {
            if rng.random::<f64>() < restart_prob {
                Ok(start)
            } else {
                match fallback {
                    RestartFallback::Neighbor => uniform_neighbor(graph, current, rng),
                    RestartFallback::Uniform => Ok(rng.random_range(0..n)),
                }
            }
        }
        NodeStrategy::DegreeWeighted => {
            let nbrs = graph.neighbors(current);
            let total: u64 = nbrs.iter().map(|x| u64::from(x.multiplicity)).sum();
            if total == 0 {
                return Err(isolated(current));
            }
            let mut r = rng.random_range(0..total);
            for x in nbrs {
                let m = u64::from(x.multiplicity);
                if r < m {
                    return Ok(x.node);
                }
                r -= m;
            }
            unreachable!("draw below total multiplicity")
        }
    }
}

/// Per-walker value selection state (round-robin cursors).
#[derive(Debug, Clone)]
pub struct ValueSelector {
    policy: ValuePolicy,
    cursors: Vec<usize>,
}

impl ValueSelector {
    pub fn new(policy: ValuePolicy, node_count: usize) -> Self {
        Self {
            policy,
            cursors: vec![0; node_count],
        }
    }

    pub fn next_value(&mut self, node: &GraphNode, rng: &mut SeededRng) -> f64 {
        let values = &node.values;
        debug_assert!(!values.is_empty());
        if values.len() == 1 {
            return values[0];
        }
        match self.policy {
            ValuePolicy::Random => values[rng.random_range(0..values.len())],
            ValuePolicy::RoundRobin => {
                let cursor = &mut self.cursors[node.node_id];
                let v = values[*cursor % values.len()];
                *cursor = (*cursor + 1) % values.len();
                v
            }
        }
    }
}

/// Walks `graph` and returns `target_length` scaled values. Every step,
/// restarts included, appends exactly one value.
pub fn generate_sequence<G: Walkable + ?Sized>(graph: &G, config: &WalkConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Integrity("empty graph".into()));
    }
    let start = config.start_node.unwrap_or_else(|| graph.first_node());
    if start >= n {
        return Err(Error::InvalidConfig(format!("start node {start} not in graph of {n} nodes")));
    }
    let mut rng = rng_from_seed(config.seed);
    let mut selector = ValueSelector::new(config.value_policy, n);
    let nodes = graph.nodes();
    let mut out = Vec::with_capacity(config.target_length);
    let mut current = start;
    out.push(selector.next_value(&nodes[current], &mut rng));
    while out.len() < config.target_length {
        current = next_node(graph, current, &config.node_strategy, start, &mut rng)?;
        out.push(selector.next_value(&nodes[current], &mut rng));
    }
    Ok(out)
}
