//! UPGMA (average linkage) clustering and Newick output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::DistanceMatrix;

/// One agglomeration step. Node ids `0..m` are the leaves in input order;
/// the node created by merge `k` has id `m + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    pub fn root(&self) -> usize {
        self.leaf_count() + self.merges.len() - 1
    }

    /// Merge height of a node; leaves sit at 0.
    pub fn height(&self, node: usize) -> f64 {
        let m = self.leaf_count();
        if node < m {
            0.0
        } else {
            self.merges[node - m].distance
        }
    }

    /// Leaf indices under `node`, left to right.
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        let m = self.leaf_count();
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if n < m {
                out.push(n);
            } else {
                let merge = &self.merges[n - m];
                stack.push(merge.right);
                stack.push(merge.left);
            }
        }
        out
    }

    /// Leaves in drawing order.
    pub fn leaf_order(&self) -> Vec<usize> {
        if self.merges.is_empty() {
            return (0..self.leaf_count()).collect();
        }
        self.leaves_under(self.root())
    }

    /// Cophenetic distances: the merge height at which each pair first joins.
    pub fn cophenetic(&self) -> Result<DistanceMatrix> {
        let m = self.leaf_count();
        let mut rows = vec![vec![0.0; m]; m];
        for merge in &self.merges {
            let left = self.leaves_under(merge.left);
            let right = self.leaves_under(merge.right);
            for &i in &left {
                for &j in &right {
                    rows[i][j] = merge.distance;
                    rows[j][i] = merge.distance;
                }
            }
        }
        DistanceMatrix::new(self.labels.clone(), rows)
    }
}

/// Average-linkage agglomerative clustering.
///
/// The closest pair of active clusters is merged; its distance to any other
/// cluster `C` is the size-weighted mean `(|A| d(A,C) + |B| d(B,C)) / (|A|+|B|)`.
/// Active clusters are kept in a list where the merged cluster replaces the
/// lower of the two positions; ties go to the smallest `(i, j)` in that list.
pub fn upgma(d: &DistanceMatrix) -> Result<Dendrogram> {
    let m = d.size();
    if m < 2 {
        return Err(Error::TooShort("UPGMA needs at least 2 leaves".into()));
    }
    // (node id, size) per active position; dist indexed by position
    let mut active: Vec<(usize, usize)> = (0..m).map(|i| (i, 1)).collect();
    let mut dist: Vec<Vec<f64>> = d.rows().map(<[f64]>::to_vec).collect();
    let mut merges = Vec::with_capacity(m - 1);
    while active.len() > 1 {
        let n = active.len();
        let (mut bi, mut bj, mut best) = (0, 1, f64::INFINITY);
        for i in 0..n {
            for j in i + 1..n {
                if dist[i][j] < best {
                    (bi, bj, best) = (i, j, dist[i][j]);
                }
            }
        }
        let (left, size_a) = active[bi];
        let (right, size_b) = active[bj];
        let size = size_a + size_b;
        let (wa, wb) = (size_a as f64, size_b as f64);
        for k in 0..n {
            if k != bi && k != bj {
                let v = (wa * dist[bi][k] + wb * dist[bj][k]) / (wa + wb);
                dist[bi][k] = v;
                dist[k][bi] = v;
            }
        }
        dist.remove(bj);
        for row in &mut dist {
            row.remove(bj);
        }
        active[bi] = (m + merges.len(), size);
        active.remove(bj);
        merges.push(Merge {
            left,
            right,
            distance: best,
            size,
        });
    }
    Ok(Dendrogram {
        labels: d.labels().to_vec(),
        merges,
    })
}

fn newick_label(label: &str) -> String {
    if label.is_empty() || label.contains(|c: char| "()[]':;,".contains(c) || c.is_whitespace()) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Newick text with ultrametric branch lengths: node heights are half the
/// merge distance and each branch spans parent height minus child height.
pub fn to_newick(t: &Dendrogram) -> String {
    let m = t.leaf_count();
    if t.merges.is_empty() {
        return format!("{};", t.labels.first().map(|l| newick_label(l)).unwrap_or_default());
    }
    fn write(t: &Dendrogram, node: usize, parent_height: f64, out: &mut String) {
        let m = t.leaf_count();
        let height = t.height(node) / 2.0;
        if node < m {
            out.push_str(&newick_label(&t.labels[node]));
        } else {
            let merge = &t.merges[node - m];
            out.push('(');
            write(t, merge.left, height, out);
            out.push(',');
            write(t, merge.right, height, out);
            out.push(')');
        }
        out.push(':');
        out.push_str(&(parent_height - height).to_string());
    }
    let root = t.root();
    let merge = &t.merges[root - m];
    let height = t.height(root) / 2.0;
    let mut out = String::from("(");
    write(t, merge.left, height, &mut out);
    out.push(',');
    write(t, merge.right, height, &mut out);
    out.push_str(");");
    out
}
