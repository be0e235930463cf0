//! Sparse undirected network containers.
//!
//! Nodes are addressed by local index 0..n inside a `Net`; the owning
//! pipeline keeps the mapping to global node ids (the `Primitives` id
//! order). Adjacency is stored as sorted neighbor lists, symmetric with a
//! zero diagonal by construction.

/// Undirected network on n nodes with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    adj: Vec<Vec<u32>>,
}

impl Net {
    /// Empty network on n nodes.
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    /// Build from an edge list (local indices, any order, duplicates allowed).
    /// Self-loops are rejected by debug assertion; both directions are stored.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in edges {
            debug_assert!(i != j, "self-loop at {i}");
            adj[i as usize].push(j);
            adj[j as usize].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Self { adj }
    }

    /// Build directly from per-row upper-triangle neighbor lists:
    /// `upper[i]` holds only j > i. Used by parallel pair scans.
    pub fn from_upper_rows(upper: Vec<Vec<u32>>) -> Self {
        let n = upper.len();
        let mut adj = vec![Vec::new(); n];
        for (i, row) in upper.iter().enumerate() {
            for &j in row {
                adj[i].push(j);
                adj[j as usize].push(i as u32);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Self { adj }
    }

    /// Node count.
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Is the pair linked.
    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    /// Degree of node i.
    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Sorted neighbor list of node i.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    /// Toggle a link on or off (used by the equilibrium solver).
    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        debug_assert!(i != j);
        let apply = |list: &mut Vec<u32>, v: u32| match (list.binary_search(&v), on) {
            (Err(pos), true) => list.insert(pos, v),
            (Ok(pos), false) => {
                list.remove(pos);
            }
            _ => {}
        };
        apply(&mut self.adj[i], j as u32);
        apply(&mut self.adj[j], i as u32);
    }

    /// Total number of links.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as sorted (i, j) pairs with i < j.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                if (i as u32) < j {
                    out.push((i as u32, j));
                }
            }
        }
        out
    }

    /// K-neighborhood of i (BFS, includes i itself), returned sorted.
    pub fn k_neighborhood(&self, i: usize, k: usize) -> Vec<u32> {
        let mut seen = vec![false; self.n()];
        seen[i] = true;
        let mut frontier = vec![i as u32];
        let mut out = vec![i as u32];
        for _ in 0..k {
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in self.neighbors(u as usize) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        next.push(v);
                        out.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out.sort_unstable();
        out
    }

    /// Connected component of i, returned sorted.
    pub fn component(&self, i: usize) -> Vec<u32> {
        self.k_neighborhood(i, self.n())
    }

    /// Component-wise union with another network on the same node set.
    pub fn union(&self, other: &Net) -> Net {
        assert_eq!(self.n(), other.n());
        let mut adj = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let mut merged: Vec<u32> =
                self.adj[i].iter().chain(&other.adj[i]).copied().collect();
            merged.sort_unstable();
            merged.dedup();
            adj.push(merged);
        }
        Net { adj }
    }
}

/// A time series of networks on a common node set, periods 0..=T.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetSeries {
    /// Per-period networks; index = period.
    pub nets: Vec<Net>,
}

impl NetSeries {
    /// Build from per-period networks (all on the same node count).
    pub fn new(nets: Vec<Net>) -> Self {
        assert!(!nets.is_empty());
        let n = nets[0].n();
        assert!(nets.iter().all(|m| m.n() == n), "periods must share the node set");
        Self { nets }
    }

    /// Last period index T.
    pub fn t_max(&self) -> usize {
        self.nets.len() - 1
    }

    /// Node count.
    pub fn n(&self) -> usize {
        self.nets[0].n()
    }

    /// Network at period t.
    pub fn at(&self, t: usize) -> &Net {
        &self.nets[t]
    }

    /// Deterministic CSV edge list: header then rows ordered by
    /// (period, lexicographic pair), with global ids supplied by the caller.
    pub fn to_csv(&self, ids: &[u64]) -> String {
        let mut out = String::from("period,i,j\n");
        for (t, net) in self.nets.iter().enumerate() {
            for (i, j) in net.edges() {
                out.push_str(&format!("{t},{},{}\n", ids[i as usize], ids[j as usize]));
            }
        }
        out
    }
}
