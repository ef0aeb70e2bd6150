use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block labels for each item. Labels are 0-based and contiguous: every
/// value in `0..k()` is used at least once. Files written by this crate use
/// 1-based labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Validate contiguous labels.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        if let Some(gap) = sizes.iter().position(|&m| m == 0) {
            return Err(Error::InvalidData(format!(
                "partition labels skip block {gap}"
            )));
        }
        Ok(Self { labels, sizes })
    }

    /// Relabel arbitrary labels to order of first appearance.
    pub fn canonical_from(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let mut sizes = Vec::new();
        let labels = labels
            .iter()
            .map(|l| {
                let next = map.len();
                let c = *map.entry(*l).or_insert(next);
                if c == sizes.len() {
                    sizes.push(0);
                }
                sizes[c] += 1;
                c
            })
            .collect();
        Self { labels, sizes }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            sizes: vec![1; n],
        }
    }

    pub fn one_block(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            sizes: if n == 0 { vec![] } else { vec![n] },
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Block sizes `m_k`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of occupied blocks.
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    pub fn canonical(&self) -> Self {
        Self::canonical_from(&self.labels)
    }

    /// Equality as set partitions, ignoring label names.
    pub fn same_clustering(&self, other: &Partition) -> bool {
        self.n_items() == other.n_items()
            && self.k() == other.k()
            && self.canonical().labels == other.canonical().labels
    }

    /// Every set partition of `n` items (Bell(n) of them), in
    /// restricted-growth order.
    pub fn enumerate_all(n: usize) -> Vec<Partition> {
        fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Partition>) {
            if prefix.len() == n {
                out.push(Partition::canonical_from(prefix));
                return;
            }
            let next = prefix.iter().max().map_or(0, |m| m + 1);
            for l in 0..=next {
                prefix.push(l);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(&mut Vec::with_capacity(n), n, &mut out);
        }
        out
    }

    /// Apply a block permutation: block `k` becomes `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(Error::SizeMismatch(perm.len(), self.k()));
        }
        Self::from_labels(self.labels.iter().map(|&l| perm[l]).collect())
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(labels: Vec<usize>) -> Result<Self> {
        Self::from_labels(labels)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.labels
    }
}
