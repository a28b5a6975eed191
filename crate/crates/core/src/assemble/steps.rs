use std::collections::BTreeSet;

use crate::chem::{cyclic_bonds, sanitize, simple_cycles};
use crate::qpatch::PatchTensor;

use super::pipeline::to_mol_graph;
use super::{euclid, rank_key, DegreeCaps, ProtoGraph, ProtoNode, ELEMENT_CHANNELS};

/// Rows whose largest deviation from the 0.5 rest point exceeds `eps`,
/// labelled by the arg-max of the element channels (lowest channel on ties).
pub fn activate_nodes(h: &PatchTensor, eps: f64) -> Vec<ProtoNode> {
    let n_el = ELEMENT_CHANNELS.len().min(h.f_node);
    (0..h.n_nodes)
        .filter_map(|i| {
            let row = h.row(i);
            let dev = row.iter().map(|x| (x - 0.5).abs()).fold(0.0, f64::max);
            if dev <= eps || n_el == 0 {
                return None;
            }
            let mut best = 0;
            for c in 1..n_el {
                if row[c] > row[best] {
                    best = c;
                }
            }
            Some(ProtoNode {
                row: i,
                element: ELEMENT_CHANNELS[best],
                embedding: row.to_vec(),
            })
        })
        .collect()
}

/// Connects every pair of nodes whose embeddings lie within `tau`.
pub fn propose_edges(nodes: Vec<ProtoNode>, tau: f64) -> ProtoGraph {
    let n = nodes.len();
    let mut distance = vec![0.0; n * n];
    for u in 0..n {
        for v in u + 1..n {
            let d = euclid(&nodes[u].embedding, &nodes[v].embedding);
            distance[u * n + v] = d;
            distance[v * n + u] = d;
        }
    }
    let mut pg = ProtoGraph {
        nodes,
        edges: Vec::new(),
        distance,
    };
    for u in 0..n {
        for v in u + 1..n {
            if pg.dist(u, v) <= tau {
                pg.add_edge(u, v, false);
            }
        }
    }
    pg
}

/// Finds six-cycles of the `knn_k`-nearest-neighbour graph. A cycle whose
/// missing edges all lie within `tau·ring_slack` is closed and all six of
/// its edges are marked protected; other cycles are left alone.
pub fn protect_six_rings(
    mut pg: ProtoGraph,
    knn_k: usize,
    tau: f64,
    ring_slack: f64,
) -> ProtoGraph {
    let n = pg.n();
    let mut knn: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
        others.sort_by_key(|&v| (rank_key(pg.dist(u, v)), v));
        for &v in others.iter().take(knn_k) {
            knn[u].insert(v);
            knn[v].insert(u);
        }
    }
    let cycles = simple_cycles(n, |u| knn[u].iter().copied(), 6, 6);
    let limit = tau * ring_slack;
    for cyc in cycles {
        let pairs: Vec<(usize, usize)> = (0..6).map(|k| (cyc[k], cyc[(k + 1) % 6])).collect();
        let closable = pairs
            .iter()
            .all(|&(a, b)| pg.edge_index(a, b).is_some() || pg.dist(a, b) <= limit);
        if !closable {
            continue;
        }
        for (a, b) in pairs {
            match pg.edge_index(a, b) {
                Some(i) => pg.edges[i].protected = true,
                None => pg.add_edge(a, b, true),
            }
        }
    }
    pg
}

/// Repeatedly takes the lowest-index node above its cap and drops its
/// longest unprotected edge, or its longest protected edge when no
/// unprotected one is left. Equal lengths drop the smaller index pair.
pub fn prune_degrees(mut pg: ProtoGraph, caps: &DegreeCaps) -> ProtoGraph {
    let n = pg.n();
    let mut degree: Vec<usize> = (0..n).map(|u| pg.degree(u)).collect();
    while let Some(u) = (0..n).find(|&u| degree[u] > caps.cap(pg.nodes[u].element) as usize) {
        let incident: Vec<usize> = (0..pg.edges.len())
            .filter(|&i| pg.edges[i].u == u || pg.edges[i].v == u)
            .collect();
        let pool: Vec<usize> = {
            let free: Vec<usize> = incident
                .iter()
                .copied()
                .filter(|&i| !pg.edges[i].protected)
                .collect();
            if free.is_empty() {
                incident
            } else {
                free
            }
        };
        let victim = pool
            .into_iter()
            .max_by(|&a, &b| {
                let (ea, eb) = (&pg.edges[a], &pg.edges[b]);
                rank_key(pg.dist(ea.u, ea.v))
                    .cmp(&rank_key(pg.dist(eb.u, eb.v)))
                    .then_with(|| (eb.u, eb.v).cmp(&(ea.u, ea.v)))
            })
            .expect("an over-cap node has incident edges");
        let e = pg.edges.remove(victim);
        degree[e.u] -= 1;
        degree[e.v] -= 1;
    }
    pg
}

/// Upgrades up to `quota` single edges to double bonds, shortest first with
/// ring edges moved forward by `prefer_ring`. Skips edges in three- and
/// four-rings and atoms that already carry a double bond; any upgrade that
/// makes the graph fail sanitization is rolled back.
pub fn upgrade_double_bonds(mut pg: ProtoGraph, quota: usize, prefer_ring: f64) -> ProtoGraph {
    if quota == 0 || pg.edges.is_empty() {
        return pg;
    }
    let n = pg.n();
    let mol = to_mol_graph(&pg);
    let cyclic = cyclic_bonds(&mol);
    let adj: Vec<Vec<usize>> = (0..n).map(|u| pg.neighbors(u)).collect();
    let mut small_ring_edges = BTreeSet::new();
    for cyc in simple_cycles(n, |u| adj[u].iter().copied(), 3, 4) {
        for k in 0..cyc.len() {
            let (a, b) = (cyc[k], cyc[(k + 1) % cyc.len()]);
            small_ring_edges.insert((a.min(b), a.max(b)));
        }
    }
    // Bond k of `mol` is edge k of `pg`.
    let mut order: Vec<usize> = (0..pg.edges.len()).collect();
    order.sort_by_key(|&i| {
        let e = &pg.edges[i];
        let bonus = if cyclic[i] { prefer_ring } else { 0.0 };
        (rank_key(pg.dist(e.u, e.v) - bonus), e.u, e.v)
    });
    let mut has_double = vec![false; n];
    for e in &pg.edges {
        if e.order == 2 {
            has_double[e.u] = true;
            has_double[e.v] = true;
        }
    }
    let mut done = 0;
    for i in order {
        if done == quota {
            break;
        }
        let (u, v) = (pg.edges[i].u, pg.edges[i].v);
        if pg.edges[i].order != 1
            || has_double[u]
            || has_double[v]
            || small_ring_edges.contains(&(u, v))
        {
            continue;
        }
        pg.edges[i].order = 2;
        if sanitize(&to_mol_graph(&pg)).is_ok() {
            has_double[u] = true;
            has_double[v] = true;
            done += 1;
        } else {
            pg.edges[i].order = 1;
        }
    }
    pg
}
