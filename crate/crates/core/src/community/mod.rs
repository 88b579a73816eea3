//! User communities from vocabulary similarity.
//!
//! Active users (enough posts) each get the distribution of tags they used.
//! Two users are linked when the Jensen–Shannon divergence between their
//! distributions is at most a threshold θ; lowering θ keeps only the most
//! similar pairs. Communities are then found by modularity maximization, and
//! each user's position (degree, k-core) is compared with how many widely
//! adopted tags they introduced.
//!
//! ```
//! use tagevo::community::{detect_communities, modularity, Graph};
//!
//! // Two triangles joined by one edge.
//! let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
//! let p = detect_communities(&g, 0).unwrap();
//! assert_eq!(p.labels, vec![0, 0, 0, 1, 1, 1]);
//! assert!((p.modularity - 5.0 / 14.0).abs() < 1e-12);
//! assert_eq!(modularity(&g, &p.labels).unwrap(), p.modularity);
//! ```

mod graph;
mod modularity;

pub use graph::{core_numbers, Graph};
pub use modularity::{canonical_labels, detect_communities, modularity, CommunityError, Partition};

use crate::ingest::{Corpus, TagId, UserId};
use crate::semshift::{jsd, WeightedDistribution};
use rayon::prelude::*;
use serde::Serialize;

/// Users with at least `min_posts` posts, with their post counts, by user ID.
pub fn filter_active_users(corpus: &Corpus, min_posts: u64) -> Vec<(UserId, u64)> {
    let mut counts = vec![0u64; corpus.users().len()];
    for p in corpus.posts() {
        counts[p.user.index()] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c >= min_posts && c > 0)
        .map(|(u, c)| (UserId(u as u32), c))
        .collect()
}

/// Per-user count of tags the user introduced to the corpus that were
/// afterwards used by more than `adoption_threshold` distinct other users.
/// Indexed by [`UserId`].
pub fn novelty_rates(corpus: &Corpus, adoption_threshold: u64) -> Vec<u64> {
    let tags = corpus.tags();
    let posts = corpus.posts();
    let creator: Vec<UserId> = tags.ids().map(|t| posts[tags.first_post(t)].user).collect();
    let mut uses: Vec<(u32, u32)> = posts
        .iter()
        .flat_map(|p| p.tags.iter().map(move |t| (t.0, p.user.0)))
        .collect();
    uses.sort_unstable();
    uses.dedup();
    let mut adopters = vec![0u64; tags.len()];
    for (t, u) in uses {
        if creator[t as usize].0 != u {
            adopters[t as usize] += 1;
        }
    }
    let mut rates = vec![0u64; corpus.users().len()];
    for (t, &a) in adopters.iter().enumerate() {
        if a > adoption_threshold {
            rates[creator[t].index()] += 1;
        }
    }
    rates
}

pub fn user_novelty_rate(corpus: &Corpus, user: UserId, adoption_threshold: u64) -> u64 {
    novelty_rates(corpus, adoption_threshold)
        .get(user.index())
        .copied()
        .unwrap_or(0)
}

/// The user who introduced `tag` (first post in corpus order).
pub fn tag_creator(corpus: &Corpus, tag: TagId) -> UserId {
    corpus.posts()[corpus.tags().first_post(tag)].user
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserProfile {
    pub user: UserId,
    pub posts: u64,
    pub distribution: WeightedDistribution,
    pub novelty_rate: u64,
}

/// Tag-usage distribution (token counts) for each of `users`.
pub fn user_profiles(corpus: &Corpus, users: &[(UserId, u64)], rates: &[u64]) -> Vec<UserProfile> {
    let mut slot = vec![usize::MAX; corpus.users().len()];
    for (i, &(u, _)) in users.iter().enumerate() {
        slot[u.index()] = i;
    }
    let mut counts: Vec<Vec<(TagId, f64)>> = vec![Vec::new(); users.len()];
    for p in corpus.posts() {
        let s = slot[p.user.index()];
        if s != usize::MAX {
            counts[s].extend(p.tags.iter().map(|&t| (t, 1.0)));
        }
    }
    users
        .iter()
        .zip(counts)
        .map(|(&(user, posts), c)| UserProfile {
            user,
            posts,
            distribution: WeightedDistribution::from_weights(c).expect("active users have tags"),
            novelty_rate: rates.get(user.index()).copied().unwrap_or(0),
        })
        .collect()
}

/// All-pairs divergence between user profiles (condensed upper triangle).
#[derive(Clone, Debug, PartialEq)]
pub struct UserDistances {
    users: Vec<UserId>,
    values: Vec<f64>,
}

impl UserDistances {
    pub fn compute(profiles: &[UserProfile]) -> Self {
        let n = profiles.len();
        let values = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..n).map(move |j| jsd(&profiles[i].distribution, &profiles[j].distribution)))
            .collect();
        Self { users: profiles.iter().map(|p| p.user).collect(), values }
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let n = self.users.len();
        let (i, j) = (i.min(j), i.max(j));
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.values[self.index(i, j)]
        }
    }

    /// Network with an edge wherever the divergence is at most `threshold`.
    pub fn network(&self, threshold: f64) -> SimilarityNetwork {
        let n = self.users.len();
        let mut graph = Graph::new(n);
        let mut edge_jsd = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = self.get(i, j);
                if d <= threshold {
                    graph.add_edge(i, j);
                    edge_jsd.push(d);
                }
            }
        }
        SimilarityNetwork { users: self.users.clone(), threshold, graph, edge_jsd }
    }
}

/// Users as nodes, linked when their tag distributions are within `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityNetwork {
    /// Node `i` is `users[i]`.
    pub users: Vec<UserId>,
    pub threshold: f64,
    pub graph: Graph,
    /// Divergence of each edge, parallel to `graph.edges()`.
    pub edge_jsd: Vec<f64>,
}

impl SimilarityNetwork {
    /// Node indices with at least one edge.
    pub fn connected_nodes(&self) -> Vec<usize> {
        (0..self.graph.node_count()).filter(|&v| self.graph.degree(v) > 0).collect()
    }

    /// The same network restricted to nodes with at least one edge.
    pub fn without_isolated(&self) -> SimilarityNetwork {
        let keep = self.connected_nodes();
        let mut map = vec![usize::MAX; self.graph.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let graph = Graph::from_edges(keep.len(), self.graph.edges().iter().map(|&(a, b)| (map[a], map[b])));
        SimilarityNetwork {
            users: keep.iter().map(|&v| self.users[v]).collect(),
            threshold: self.threshold,
            graph,
            edge_jsd: self.edge_jsd.clone(),
        }
    }
}

pub fn user_similarity_network(profiles: &[UserProfile], threshold: f64) -> SimilarityNetwork {
    UserDistances::compute(profiles).network(threshold)
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeReport {
    pub node: usize,
    pub degree: usize,
    pub core: u32,
    pub community: Option<usize>,
    pub novelty_rate: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorePeripheryReport {
    pub nodes: Vec<NodeReport>,
    /// Spearman correlation between centrality (core number, ties broken by
    /// degree) and novelty rate. Negative when innovators sit on the periphery.
    pub coreness_correlation: f64,
    pub degree_correlation: f64,
}

/// Per-node degree, core number, community and novelty rate, with rank
/// correlations between position and novelty.
pub fn core_periphery_report(g: &Graph, labels: Option<&[usize]>, rates: &[u64]) -> CorePeripheryReport {
    assert_eq!(rates.len(), g.node_count(), "one novelty rate per node");
    let core = core_numbers(g);
    let max_deg = (0..g.node_count()).map(|v| g.degree(v)).max().unwrap_or(0) as f64;
    let nodes: Vec<NodeReport> = (0..g.node_count())
        .map(|v| NodeReport {
            node: v,
            degree: g.degree(v),
            core: core[v],
            community: labels.map(|l| l[v]),
            novelty_rate: rates[v],
        })
        .collect();
    let centrality: Vec<f64> = nodes.iter().map(|n| n.core as f64 * (max_deg + 1.0) + n.degree as f64).collect();
    let degree: Vec<f64> = nodes.iter().map(|n| n.degree as f64).collect();
    let rate: Vec<f64> = nodes.iter().map(|n| n.novelty_rate as f64).collect();
    CorePeripheryReport {
        coreness_correlation: spearman(&centrality, &rate),
        degree_correlation: spearman(&degree, &rate),
        nodes,
    }
}
