use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Aggregated results between an unordered pair `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    /// Wins of `i` over `j`.
    pub wins_i: u32,
    /// Wins of `j` over `i`.
    pub wins_j: u32,
}

impl Edge {
    pub fn matches(&self) -> u32 {
        self.wins_i + self.wins_j
    }
}

/// Directed win counts `w_ij` over `n_items` items, stored sparsely as one
/// [`Edge`] per unordered pair that met at least once. Match counts
/// `n_ij = w_ij + w_ji` are derived.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonData {
    n_items: usize,
    edges: Vec<Edge>,
    index: HashMap<(usize, usize), usize>,
    names: Option<Vec<String>>,
}

impl ComparisonData {
    pub fn empty(n_items: usize) -> Self {
        Self {
            n_items,
            edges: Vec::new(),
            index: HashMap::new(),
            names: None,
        }
    }

    /// Aggregate `(winner, loser, count)` records. Repeated directions are
    /// summed and zero counts ignored; self-pairs and out-of-range indices
    /// are rejected.
    pub fn from_results<I>(n_items: usize, results: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut pairs: BTreeMap<(usize, usize), (u32, u32)> = BTreeMap::new();
        for (winner, loser, count) in results {
            if winner >= n_items || loser >= n_items {
                return Err(Error::InvalidData(format!(
                    "item index {} out of range for {n_items} items",
                    winner.max(loser)
                )));
            }
            if winner == loser {
                return Err(Error::InvalidData(format!(
                    "self-comparison for item {winner}"
                )));
            }
            if count == 0 {
                continue;
            }
            let key = (winner.min(loser), winner.max(loser));
            let entry = pairs.entry(key).or_default();
            let slot = if winner < loser {
                &mut entry.0
            } else {
                &mut entry.1
            };
            *slot = slot
                .checked_add(count)
                .ok_or_else(|| Error::InvalidData("win count overflow".into()))?;
        }
        let edges: Vec<Edge> = pairs
            .into_iter()
            .map(|((i, j), (wins_i, wins_j))| Edge {
                i,
                j,
                wins_i,
                wins_j,
            })
            .collect();
        Ok(Self::from_edges_unchecked(n_items, edges))
    }

    fn from_edges_unchecked(n_items: usize, edges: Vec<Edge>) -> Self {
        let index = edges
            .iter()
            .enumerate()
            .map(|(e, edge)| ((edge.i, edge.j), e))
            .collect();
        Self {
            n_items,
            edges,
            index,
            names: None,
        }
    }

    /// Attach identifiers, one per item.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_items {
            return Err(Error::SizeMismatch(names.len(), self.n_items));
        }
        self.names = Some(names);
        Ok(self)
    }

    /// Same match counts with new win splits, given per edge as
    /// `(wins_i, wins_j)`.
    pub fn with_edge_wins(&self, wins: &[(u32, u32)]) -> Result<Self> {
        if wins.len() != self.edges.len() {
            return Err(Error::SizeMismatch(wins.len(), self.edges.len()));
        }
        let mut out = self.clone();
        for (edge, &(wi, wj)) in out.edges.iter_mut().zip(wins) {
            if wi + wj != edge.matches() {
                return Err(Error::InvalidData(format!(
                    "wins {wi}+{wj} do not add up to {} matches on ({}, {})",
                    edge.matches(),
                    edge.i,
                    edge.j
                )));
            }
            edge.wins_i = wi;
            edge.wins_j = wj;
        }
        Ok(out)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Identifier of item `i`, falling back to its 1-based index.
    pub fn name(&self, i: usize) -> String {
        match &self.names {
            Some(names) => names[i].clone(),
            None => (i + 1).to_string(),
        }
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i.min(j), i.max(j))).copied()
    }

    /// `w_ij`: wins of `i` over `j`.
    pub fn wins(&self, i: usize, j: usize) -> u32 {
        match self.edge_index(i, j) {
            Some(e) if i < j => self.edges[e].wins_i,
            Some(e) => self.edges[e].wins_j,
            None => 0,
        }
    }

    /// `n_ij`, symmetric.
    pub fn matches(&self, i: usize, j: usize) -> u32 {
        self.edge_index(i, j)
            .map_or(0, |e| self.edges[e].matches())
    }

    /// `w_i = Σ_j w_ij` for every item.
    pub fn total_wins(&self) -> Vec<u64> {
        let mut w = vec![0u64; self.n_items];
        for e in &self.edges {
            w[e.i] += u64::from(e.wins_i);
            w[e.j] += u64::from(e.wins_j);
        }
        w
    }

    pub fn total_matches(&self) -> u64 {
        self.edges.iter().map(|e| u64::from(e.matches())).sum()
    }

    /// Fraction of unordered pairs that met at least once.
    pub fn density(&self) -> f64 {
        if self.n_items < 2 {
            return 0.0;
        }
        let pairs = self.n_items * (self.n_items - 1) / 2;
        self.edges.len() as f64 / pairs as f64
    }

    /// Items without any recorded match.
    pub fn isolated_items(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_items];
        for e in &self.edges {
            seen[e.i] = true;
            seen[e.j] = true;
        }
        (0..self.n_items).filter(|&i| !seen[i]).collect()
    }

    /// Connected components of the comparison graph, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n_items).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.n_items {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// Log warnings for inactive items and a disconnected comparison graph.
    /// Neither is an error: inactive items are allocated by the prior alone.
    pub fn warn_structure(&self) {
        let isolated = self.isolated_items();
        if !isolated.is_empty() {
            let names: Vec<String> = isolated.iter().map(|&i| self.name(i)).collect();
            log::warn!(
                "{} item(s) have no recorded matches: {}",
                isolated.len(),
                names.join(", ")
            );
        }
        let comps: Vec<Vec<usize>> = self
            .components()
            .into_iter()
            .filter(|c| c.len() > 1)
            .collect();
        if comps.len() > 1 {
            let listing: Vec<String> = comps
                .iter()
                .map(|c| {
                    let names: Vec<String> = c.iter().map(|&i| self.name(i)).collect();
                    format!("{{{}}}", names.join(", "))
                })
                .collect();
            log::warn!(
                "comparison graph has {} components: {}",
                comps.len(),
                listing.join(" ")
            );
        }
    }
}
