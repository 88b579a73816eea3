//! Modularity and its greedy maximization.
//!
//! For an unweighted graph with `m` edges, a partition into communities `c`
//! has modularity `Q = Σ_c [ e_c / m − (d_c / 2m)² ]`, where `e_c` counts
//! edges inside `c` and `d_c` is the total degree of its nodes.
//!
//! All gains are computed in integer units of `1 / (2m²)`, so equal gains
//! compare equal and tie-breaking depends only on the seed.

use super::graph::Graph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BinaryHeap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommunityError {
    #[error("modularity is undefined for a graph without edges")]
    NoEdges,
    #[error("partition has {got} labels for {want} nodes")]
    LabelCount { got: usize, want: usize },
}

/// Community assignment with its modularity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    /// Community of each node; labels are `0..communities`, numbered by
    /// first appearance in node order.
    pub labels: Vec<usize>,
    pub communities: usize,
    pub modularity: f64,
}

pub fn modularity(g: &Graph, labels: &[usize]) -> Result<f64, CommunityError> {
    if labels.len() != g.node_count() {
        return Err(CommunityError::LabelCount { got: labels.len(), want: g.node_count() });
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(CommunityError::NoEdges);
    }
    let k = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut inside = vec![0u64; k];
    let mut degree = vec![0u64; k];
    for &(a, b) in g.edges() {
        if labels[a] == labels[b] {
            inside[labels[a]] += 1;
        }
    }
    for (v, &c) in labels.iter().enumerate() {
        degree[c] += g.degree(v) as u64;
    }
    let m = m as f64;
    Ok(inside
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| e as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Relabels communities `0..k` in order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: HashMap<usize, usize> = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    gain: i64,
    tie: u64,
    a: usize,
    b: usize,
    va: u32,
    vb: u32,
}

/// Independent local-move runs from singletons, besides the agglomerative start.
const RESTARTS: u64 = 8;

/// Greedy agglomerative modularity maximization followed by multi-level
/// local-move refinement; a few extra refinement runs from singletons with
/// shuffled visit orders guard against a poor greedy start, and the best
/// partition wins. Deterministic for a given `seed`. Isolated nodes end up
/// as singleton communities.
pub fn detect_communities(g: &Graph, seed: u64) -> Result<Partition, CommunityError> {
    let m = g.edge_count();
    if m == 0 {
        return Err(CommunityError::NoEdges);
    }
    let base = Weighted::from_graph(g);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for run in 0..=RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(run)));
        let start = if run == 0 { agglomerate(g, seed) } else { (0..g.node_count()).collect() };
        let labels = canonical_labels(&multilevel(&base, start, &mut rng));
        let q = modularity(g, &labels)?;
        if best.as_ref().map_or(true, |(b, _)| q > *b) {
            best = Some((q, labels));
        }
    }
    let (q, labels) = best.expect("at least one run");
    let (labels, q) = if q < 0.0 {
        // All-one-community has Q = 0.
        (vec![0; g.node_count()], modularity(g, &vec![0; g.node_count()])?)
    } else {
        (labels, q)
    };
    Ok(Partition {
        communities: labels.iter().copied().max().map_or(0, |x| x + 1),
        labels,
        modularity: q,
    })
}

fn agglomerate(g: &Graph, seed: u64) -> Vec<usize> {
    let n = g.node_count();
    let two_m = 2 * g.edge_count() as i64;
    let mut links: Vec<HashMap<usize, i64>> = vec![HashMap::new(); n];
    for &(a, b) in g.edges() {
        *links[a].entry(b).or_default() += 1;
        *links[b].entry(a).or_default() += 1;
    }
    let mut degree: Vec<i64> = (0..n).map(|v| g.degree(v) as i64).collect();
    let mut version = vec![0u32; n];
    let mut alive = vec![true; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let tie = |a: usize, b: usize| splitmix(seed ^ splitmix(((a.min(b) as u64) << 32) | a.max(b) as u64));

    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Candidate>, a: usize, b: usize, l: i64, degree: &[i64], version: &[u32]| {
        heap.push(Candidate {
            gain: two_m * l - degree[a] * degree[b],
            tie: tie(a, b),
            a,
            b,
            va: version[a],
            vb: version[b],
        });
    };
    for &(a, b) in g.edges() {
        push(&mut heap, a, b, links[a][&b], &degree, &version);
    }

    while let Some(c) = heap.pop() {
        if !alive[c.a] || !alive[c.b] || version[c.a] != c.va || version[c.b] != c.vb {
            continue;
        }
        if c.gain <= 0 {
            break;
        }
        // Merge the smaller adjacency into the larger.
        let (keep, gone) = if links[c.a].len() >= links[c.b].len() { (c.a, c.b) } else { (c.b, c.a) };
        let moved = std::mem::take(&mut links[gone]);
        links[keep].remove(&gone);
        for (k, l) in moved {
            if k == keep {
                continue;
            }
            *links[keep].entry(k).or_default() += l;
            let back = &mut links[k];
            back.remove(&gone);
            *back.entry(keep).or_default() += l;
        }
        degree[keep] += degree[gone];
        alive[gone] = false;
        version[keep] += 1;
        let moved_members = std::mem::take(&mut members[gone]);
        members[keep].extend(moved_members);
        let mut neighbors: Vec<(usize, i64)> = links[keep].iter().map(|(&k, &l)| (k, l)).collect();
        neighbors.sort_unstable();
        for (k, l) in neighbors {
            push(&mut heap, keep, k, l, &degree, &version);
        }
    }

    let mut labels = vec![0; n];
    for (c, ms) in members.iter().enumerate() {
        for &v in ms {
            labels[v] = c;
        }
    }
    labels
}

/// Integer-weighted graph for the coarse levels. `adj` has no self entries;
/// `degree` includes twice the self-loop weight.
struct Weighted {
    adj: Vec<Vec<(usize, i64)>>,
    degree: Vec<i64>,
    two_m: i64,
}

impl Weighted {
    fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        Self {
            adj: (0..n).map(|v| g.neighbors(v).iter().map(|&u| (u, 1)).collect()).collect(),
            degree: (0..n).map(|v| g.degree(v) as i64).collect(),
            two_m: 2 * g.edge_count() as i64,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// One node per community of `labels` (which must be `0..k`).
    fn aggregate(&self, labels: &[usize], k: usize) -> Self {
        let mut links: Vec<HashMap<usize, i64>> = vec![HashMap::new(); k];
        let mut degree = vec![0i64; k];
        for v in 0..self.len() {
            degree[labels[v]] += self.degree[v];
            for &(u, w) in &self.adj[v] {
                if labels[u] != labels[v] {
                    *links[labels[v]].entry(labels[u]).or_default() += w;
                }
            }
        }
        let adj = links
            .into_iter()
            .map(|l| {
                let mut row: Vec<(usize, i64)> = l.into_iter().collect();
                row.sort_unstable();
                row
            })
            .collect();
        Self { adj, degree, two_m: self.two_m }
    }
}

/// Local moves from `labels`, then repeated aggregation and local moves on
/// the community graph until a level changes nothing. Returns labels of the
/// original nodes.
fn multilevel(base: &Weighted, mut labels: Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut owner: Vec<usize> = (0..base.len()).collect();
    let mut coarse: Option<Weighted> = None;
    loop {
        let level = coarse.as_ref().unwrap_or(base);
        let mut order: Vec<usize> = (0..level.len()).collect();
        order.shuffle(rng);
        local_moves(level, &mut labels, &order);
        let canon = canonical_labels(&labels);
        let k = canon.iter().copied().max().map_or(0, |x| x + 1);
        for o in &mut owner {
            *o = canon[*o];
        }
        if k == level.len() {
            return owner;
        }
        coarse = Some(level.aggregate(&canon, k));
        labels = (0..k).collect();
    }
}

/// Moves single nodes between communities while modularity strictly improves.
fn local_moves(g: &Weighted, labels: &mut [usize], order: &[usize]) {
    let n = g.len();
    let two_m = g.two_m;
    let mut total = vec![0i64; n];
    let mut size = vec![0usize; n];
    for v in 0..n {
        total[labels[v]] += g.degree[v];
        size[labels[v]] += 1;
    }
    let mut free: Vec<usize> = (0..n).filter(|&c| size[c] == 0).rev().collect();

    let mut links: HashMap<usize, i64> = HashMap::new();
    for _pass in 0..100 {
        let mut moved = false;
        for &v in order {
            let kv = g.degree[v];
            if kv == 0 {
                continue;
            }
            let own = labels[v];
            links.clear();
            for &(u, w) in &g.adj[v] {
                *links.entry(labels[u]).or_default() += w;
            }
            let k_own = links.get(&own).copied().unwrap_or(0);
            let d_own = total[own] - kv;
            let gain = |k_to: i64, d_to: i64| two_m * (k_to - k_own) - kv * (d_to - d_own);

            // Candidates in label order so ties resolve deterministically.
            let mut targets: Vec<(usize, i64)> = links.iter().filter(|(&c, _)| c != own).map(|(&c, &k)| (c, k)).collect();
            targets.sort_unstable();
            let mut best: Option<(i64, Option<usize>)> = None;
            for (c, k) in targets {
                let gv = gain(k, total[c]);
                if gv > 0 && best.map_or(true, |(b, _)| gv > b) {
                    best = Some((gv, Some(c)));
                }
            }
            if size[own] > 1 {
                let gv = gain(0, 0);
                if gv > 0 && best.map_or(true, |(b, _)| gv > b) {
                    best = Some((gv, None));
                }
            }
            if let Some((_, target)) = best {
                let to = match target {
                    Some(c) => c,
                    None => free.pop().expect("a community slot is free while v shares its own"),
                };
                total[own] -= kv;
                total[to] += kv;
                size[own] -= 1;
                size[to] += 1;
                labels[v] = to;
                if size[own] == 0 {
                    free.push(own);
                }
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
    }

    fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b);
            }
        }
        g
    }

    #[test]
    fn two_triangle_modularity_by_hand() {
        // e/m = 3/7 per triangle, d = 7 per side of 14.
        let q = modularity(&two_triangles(), &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!((q - 5.0 / 14.0).abs() < 1e-12);
        assert_eq!(modularity(&two_triangles(), &[0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn modularity_errors() {
        assert_eq!(modularity(&Graph::new(3), &[0, 1, 2]), Err(CommunityError::NoEdges));
        assert_eq!(
            modularity(&two_triangles(), &[0, 1]),
            Err(CommunityError::LabelCount { got: 2, want: 6 })
        );
        assert_eq!(detect_communities(&Graph::new(4), 0), Err(CommunityError::NoEdges));
    }

    #[test]
    fn finds_two_triangles() {
        let p = detect_communities(&two_triangles(), 1).unwrap();
        assert_eq!(p.labels, vec![0, 0, 0, 1, 1, 1]);
        assert!((p.modularity - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_is_one_community() {
        for n in 2..8 {
            let p = detect_communities(&complete(n), 3).unwrap();
            assert_eq!(p.communities, 1);
            assert!(p.modularity.abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_nodes_become_singletons() {
        let mut g = two_triangles();
        let edges: Vec<_> = g.edges().to_vec();
        g = Graph::from_edges(8, edges);
        let p = detect_communities(&g, 0).unwrap();
        assert_eq!(p.communities, 4);
        assert_ne!(p.labels[6], p.labels[7]);
    }

    #[test]
    fn detection_is_seed_deterministic() {
        let g = Graph::from_edges(8, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (2, 6)]);
        let a = detect_communities(&g, 42).unwrap();
        let b = detect_communities(&g, 42).unwrap();
        assert_eq!(a, b);
        assert!((modularity(&g, &a.labels).unwrap() - a.modularity).abs() < 1e-12);
    }

    #[test]
    fn canonical_relabeling() {
        assert_eq!(canonical_labels(&[5, 5, 2, 9, 2]), vec![0, 0, 1, 2, 1]);
    }
}
