use serde::Serialize;

/// Simple undirected graph without self-loops or parallel edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes], edges: Vec::new() }
    }

    /// Builds a graph from an edge list; self-loops and duplicates are ignored.
    pub fn from_edges(nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(nodes);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Returns false for self-loops and existing edges.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        assert!(a < self.adj.len() && b < self.adj.len(), "edge ({a}, {b}) out of range");
        if a == b || self.adj[a].contains(&b) {
            return false;
        }
        self.adj[a].push(b);
        self.adj[b].push(a);
        self.edges.push((a.min(b), a.max(b)));
        true
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }
}

/// Core number of every node: the largest `k` such that the node belongs to
/// a subgraph where all degrees are at least `k`.
pub fn core_numbers(g: &Graph) -> Vec<u32> {
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[degree[v]].push(v);
    }
    let mut core = vec![0u32; n];
    let mut removed = vec![false; n];
    let mut k = 0;
    let mut done = 0;
    while done < n {
        // Entries can be stale (degree dropped since insertion); skip those.
        let Some(v) = buckets[k].pop() else {
            k += 1;
            continue;
        };
        if removed[v] || degree[v] != k {
            continue;
        }
        removed[v] = true;
        core[v] = k as u32;
        done += 1;
        for &u in g.neighbors(v) {
            if !removed[u] && degree[u] > k {
                degree[u] -= 1;
                buckets[degree[u]].push(u);
            }
        }
    }
    core
}
