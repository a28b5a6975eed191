//! Patch-to-molecule assembly: decode active rows into atoms, connect them
//! by embedding proximity, protect six-rings, enforce degree caps, add a few
//! double bonds and let aromaticity emerge from ring perception.

mod pipeline;
mod steps;

use serde::{Deserialize, Serialize};

use crate::chem::{ChemError, Element};

pub use pipeline::{
    aromatize_two_pass, assemble_batch, assemble_molecule, calibrate_tau, coordinate_graph,
    score_candidate, score_from, to_mol_graph, Assembled, Route,
};
pub use steps::{
    activate_nodes, propose_edges, protect_six_rings, prune_degrees, upgrade_double_bonds,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssembleError {
    #[error("no sanitizable candidate with at least {min_atoms} atoms")]
    GenerationFailure { min_atoms: usize },
    #[error("invalid aggregator config: {0}")]
    Config(String),
    #[error(transparent)]
    Chem(#[from] ChemError),
}

/// Build-time degree caps per heavy element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeCaps {
    #[serde(rename = "C")]
    pub c: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "O")]
    pub o: u32,
    #[serde(rename = "F")]
    pub f: u32,
}

impl Default for DegreeCaps {
    fn default() -> Self {
        DegreeCaps {
            c: 3,
            n: 3,
            o: 2,
            f: 1,
        }
    }
}

impl DegreeCaps {
    pub fn cap(&self, e: Element) -> u32 {
        match e {
            Element::C => self.c,
            Element::N => self.n,
            Element::O => self.o,
            Element::F => self.f,
            Element::H => 1,
        }
    }
}

/// Weights of the candidate score `λ_QED·QED − λ_SA·SA − λ_logP·max(0, logP − γ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWeights {
    pub qed: f64,
    pub sa: f64,
    pub logp: f64,
    pub gamma: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            qed: 1.0,
            sa: 0.2,
            logp: 0.2,
            gamma: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregatorConfig {
    /// Proximity threshold on embedding distance.
    pub tau: f64,
    /// Multiplier on `tau` for edges added to close a protected six-ring.
    pub ring_slack: f64,
    pub degree_caps: DegreeCaps,
    pub knn_k: usize,
    pub double_quota: usize,
    /// Subtracted from the distance rank key of ring bonds when ordering
    /// double-bond upgrades.
    pub ring_bond_preference: f64,
    pub score_weights: ScoreWeights,
    pub min_atoms: usize,
    pub min_bonds: usize,
    /// A row is active when some entry deviates from 0.5 by more than this.
    pub activation_eps: f64,
    /// Multiplier turning coordinate channels into distance units.
    pub coord_scale: f64,
    /// Bonding window on scaled coordinate distances.
    pub coord_window: [f64; 2],
}

impl Default for AggregatorConfig {
    fn default() -> Self {
        AggregatorConfig {
            tau: 0.35,
            ring_slack: 1.25,
            degree_caps: DegreeCaps::default(),
            knn_k: 4,
            double_quota: 3,
            ring_bond_preference: 0.05,
            score_weights: ScoreWeights::default(),
            min_atoms: 2,
            min_bonds: 1,
            activation_eps: 0.15,
            coord_scale: 4.0,
            coord_window: [0.6, 1.8],
        }
    }
}

impl AggregatorConfig {
    pub fn validate(&self) -> Result<(), AssembleError> {
        let bad = |m: &str| Err(AssembleError::Config(m.to_string()));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau must be positive");
        }
        if !(self.ring_slack >= 1.0 && self.ring_slack.is_finite()) {
            return bad("ring_slack must be at least 1");
        }
        for e in [Element::C, Element::N, Element::O, Element::F] {
            let cap = self.degree_caps.cap(e);
            if cap == 0 || cap > e.max_valence() {
                return bad(&format!(
                    "degree cap for {e} must be in 1..={}",
                    e.max_valence()
                ));
            }
        }
        if !(0.0..0.5).contains(&self.activation_eps) {
            return bad("activation_eps must be in [0, 0.5)");
        }
        let [lo, hi] = self.coord_window;
        if !(lo >= 0.0 && hi > lo && self.coord_scale > 0.0) {
            return bad("coordinate window must satisfy 0 <= lo < hi and coord_scale > 0");
        }
        Ok(())
    }
}

/// Channels 0..4 hold element logits for C, N, O, F.
pub const ELEMENT_CHANNELS: [Element; 4] = [Element::C, Element::N, Element::O, Element::F];

/// Channels read as 3D coordinates by the coordinate route, the first three
/// after the element logits.
pub const COORD_CHANNELS: [usize; 3] = [4, 5, 6];

#[derive(Clone, Debug, PartialEq)]
pub struct ProtoNode {
    /// Row of the source patch.
    pub row: usize,
    pub element: Element,
    pub embedding: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtoEdge {
    pub u: usize,
    pub v: usize,
    pub protected: bool,
    pub order: u8,
}

/// Working graph of the assembler; `distance` is the dense pairwise
/// distance matrix the current route ranks edges by.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtoGraph {
    pub nodes: Vec<ProtoNode>,
    pub edges: Vec<ProtoEdge>,
    pub distance: Vec<f64>,
}

impl ProtoGraph {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.distance[u * self.nodes.len() + v]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.iter().position(|e| e.u == a && e.v == b)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges.iter().filter(|e| e.u == u || e.v == u).count()
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.u == u {
                    Some(e.v)
                } else if e.v == u {
                    Some(e.u)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Keeps edges sorted by endpoint pair.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize, protected: bool) {
        let (a, b) = (u.min(v), u.max(v));
        let at = self.edges.partition_point(|e| (e.u, e.v) < (a, b));
        self.edges.insert(
            at,
            ProtoEdge {
                u: a,
                v: b,
                protected,
                order: 1,
            },
        );
    }
}

/// Distance rank key: quantized so that values differing only by rounding
/// noise compare equal and fall through to the index tie-break.
pub(crate) fn rank_key(d: f64) -> i64 {
    (d * 1e9).round() as i64
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
