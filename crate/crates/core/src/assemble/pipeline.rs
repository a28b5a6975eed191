use rayon::prelude::*;

use crate::chem::{
    canonical_smiles, compute_descriptors, perceive_aromaticity, sanitize, BondOrder, ChemError,
    Descriptors, MolGraph,
};
use crate::qpatch::PatchTensor;

use super::steps::{
    activate_nodes, propose_edges, protect_six_rings, prune_degrees, upgrade_double_bonds,
};
use super::{
    euclid, AggregatorConfig, AssembleError, ProtoGraph, ProtoNode, ScoreWeights, COORD_CHANNELS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Graph,
    Coordinate,
}

#[derive(Clone, Debug)]
pub struct Assembled {
    pub mol: MolGraph,
    pub smiles: String,
    pub descriptors: Descriptors,
    pub score: f64,
    pub route: Route,
    /// Set when neither candidate met the size minimums and the larger
    /// one was kept instead of the best-scoring one.
    pub fallback: bool,
}

/// Bond `k` of the result is edge `k` of `pg`; atoms keep node order.
pub fn to_mol_graph(pg: &ProtoGraph) -> MolGraph {
    let mut g = MolGraph::new();
    for node in &pg.nodes {
        g.add_atom(node.element);
    }
    for e in &pg.edges {
        let order = if e.order == 2 {
            BondOrder::Double
        } else {
            BondOrder::Single
        };
        g.add_bond(e.u, e.v, order).expect("proto edges are simple");
    }
    g
}

/// Aromaticity pass, reduction to the largest connected component (ties go
/// to the component holding the smallest atom index), second aromaticity
/// pass and a final sanitize. Bond orders are never rewritten.
pub fn aromatize_two_pass(g: &MolGraph) -> Result<MolGraph, ChemError> {
    let first = perceive_aromaticity(g);
    let comps = first.components();
    let Some(largest) = comps
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.len().cmp(&b.len()).then(j.cmp(i)))
        .map(|(_, c)| c)
    else {
        return sanitize(&first);
    };
    let sub = first.subgraph(largest);
    sanitize(&perceive_aromaticity(&sub))
}

pub fn score_from(d: &Descriptors, w: &ScoreWeights) -> f64 {
    w.qed * d.qed - w.sa * d.sa - w.logp * (d.logp - w.gamma).max(0.0)
}

/// `λ_QED·QED − λ_SA·SA − λ_logP·max(0, logP − γ)`.
pub fn score_candidate(m: &MolGraph, w: &ScoreWeights) -> f64 {
    score_from(&compute_descriptors(m), w)
}

/// Coordinate route: nodes placed at `coord_scale ×` the coordinate
/// channels and bonded when their distance falls inside `coord_window`.
pub fn coordinate_graph(nodes: Vec<ProtoNode>, cfg: &AggregatorConfig) -> ProtoGraph {
    let n = nodes.len();
    let coords: Vec<[f64; 3]> = nodes
        .iter()
        .map(|nd| COORD_CHANNELS.map(|c| nd.embedding[c] * cfg.coord_scale))
        .collect();
    let mut distance = vec![0.0; n * n];
    for u in 0..n {
        for v in u + 1..n {
            let d = euclid(&coords[u], &coords[v]);
            distance[u * n + v] = d;
            distance[v * n + u] = d;
        }
    }
    let mut pg = ProtoGraph {
        nodes,
        edges: Vec::new(),
        distance,
    };
    let [lo, hi] = cfg.coord_window;
    for u in 0..n {
        for v in u + 1..n {
            let d = pg.dist(u, v);
            if d >= lo && d <= hi {
                pg.add_edge(u, v, false);
            }
        }
    }
    pg
}

fn finish(pg: ProtoGraph, cfg: &AggregatorConfig) -> Option<MolGraph> {
    let pg = prune_degrees(pg, &cfg.degree_caps);
    let pg = upgrade_double_bonds(pg, cfg.double_quota, cfg.ring_bond_preference);
    aromatize_two_pass(&to_mol_graph(&pg)).ok()
}

fn graph_route(nodes: Vec<ProtoNode>, cfg: &AggregatorConfig) -> Option<MolGraph> {
    let pg = propose_edges(nodes, cfg.tau);
    let pg = protect_six_rings(pg, cfg.knn_k, cfg.tau, cfg.ring_slack);
    finish(pg, cfg)
}

fn coordinate_route(nodes: Vec<ProtoNode>, cfg: &AggregatorConfig) -> Option<MolGraph> {
    if nodes
        .first()
        .is_some_and(|n| n.embedding.len() <= COORD_CHANNELS[2])
    {
        return None;
    }
    finish(coordinate_graph(nodes, cfg), cfg)
}

/// Decodes a patch through both routes and keeps the higher-scoring
/// candidate that meets the size minimums (the graph route wins ties).
/// When neither does, the larger candidate with at least `min_atoms` atoms
/// is kept.
pub fn assemble_molecule(
    h: &PatchTensor,
    cfg: &AggregatorConfig,
) -> Result<Assembled, AssembleError> {
    cfg.validate()?;
    let failure = AssembleError::GenerationFailure {
        min_atoms: cfg.min_atoms,
    };
    let nodes = activate_nodes(h, cfg.activation_eps);
    if nodes.is_empty() {
        return Err(failure);
    }
    let candidates: Vec<(Route, MolGraph)> = [
        (Route::Graph, graph_route(nodes.clone(), cfg)),
        (Route::Coordinate, coordinate_route(nodes, cfg)),
    ]
    .into_iter()
    .filter_map(|(r, m)| m.map(|m| (r, m)))
    .collect();
    let scored: Vec<(Route, MolGraph, Descriptors, f64)> = candidates
        .into_iter()
        .map(|(r, m)| {
            let d = compute_descriptors(&m);
            let s = score_from(&d, &cfg.score_weights);
            (r, m, d, s)
        })
        .collect();
    let meets = |m: &MolGraph| m.n_atoms() >= cfg.min_atoms && m.n_bonds() >= cfg.min_bonds;
    let mut best: Option<usize> = None;
    for (i, c) in scored.iter().enumerate() {
        if meets(&c.1) && best.is_none_or(|b| c.3 > scored[b].3) {
            best = Some(i);
        }
    }
    let mut fallback = false;
    if best.is_none() {
        fallback = true;
        for (i, c) in scored.iter().enumerate() {
            if c.1.n_atoms() < cfg.min_atoms {
                continue;
            }
            let key = |k: usize| (scored[k].1.n_atoms(), scored[k].1.n_bonds());
            if best.is_none_or(|b| key(i) > key(b)) {
                best = Some(i);
            }
        }
    }
    let (route, mol, descriptors, score) = scored
        .into_iter()
        .nth(best.ok_or(failure)?)
        .expect("index in range");
    Ok(Assembled {
        smiles: canonical_smiles(&mol),
        mol,
        descriptors,
        score,
        route,
        fallback,
    })
}

/// Assembles every patch in parallel; output order follows input order.
pub fn assemble_batch(
    patches: &[PatchTensor],
    cfg: &AggregatorConfig,
) -> Vec<Result<Assembled, AssembleError>> {
    patches
        .par_iter()
        .map(|h| assemble_molecule(h, cfg))
        .collect()
}

/// The `quantile` (in [0, 1]) of pairwise embedding distances between
/// active rows, pooled over all patches. `None` when no patch has two
/// active rows.
pub fn calibrate_tau(patches: &[PatchTensor], quantile: f64, activation_eps: f64) -> Option<f64> {
    let mut ds: Vec<f64> = patches
        .par_iter()
        .flat_map_iter(|h| {
            let nodes = activate_nodes(h, activation_eps);
            let mut out = Vec::new();
            for u in 0..nodes.len() {
                for v in u + 1..nodes.len() {
                    out.push(euclid(&nodes[u].embedding, &nodes[v].embedding));
                }
            }
            out
        })
        .collect();
    if ds.is_empty() {
        return None;
    }
    ds.sort_by(f64::total_cmp);
    let q = quantile.clamp(0.0, 1.0) * (ds.len() - 1) as f64;
    let (lo, hi) = (q.floor() as usize, q.ceil() as usize);
    Some(ds[lo] + (ds[hi] - ds[lo]) * (q - lo as f64))
}
