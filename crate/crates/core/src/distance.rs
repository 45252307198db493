use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tree::{check_labels, TreeViolation};

/// Largest `|D(a,b) - D(b,a)|` repaired by averaging.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
/// Largest diagonal magnitude clamped to zero.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Symmetric `n x n` dissimilarities in `[0, 1]` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Arc<[String]>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates and normalizes a row-major matrix.
    ///
    /// Entries must lie in `[0, 1]`. Near-symmetric input (within
    /// [`SYMMETRY_TOLERANCE`]) is averaged; a near-zero diagonal (within
    /// [`DIAGONAL_TOLERANCE`]) is clamped.
    pub fn new(labels: Vec<String>, mut values: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n < 4 {
            return Err(Error::Size(format!("need at least 4 objects, got {n}")));
        }
        if values.len() != n * n {
            return Err(Error::format(format!(
                "expected {} entries for n={n}, got {}",
                n * n,
                values.len()
            )));
        }
        check_labels(&labels).map_err(|v| match v {
            TreeViolation::DuplicateLabel(l) => Error::format(format!("duplicate label {l:?}")),
            other => Error::format(other.to_string()),
        })?;
        for a in 0..n {
            for b in 0..n {
                let x = values[a * n + b];
                if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                    return Err(Error::format(format!(
                        "entry ({}, {}) = {x} is outside [0, 1]",
                        labels[a], labels[b]
                    )));
                }
            }
        }
        let mut worst = (0.0f64, 0, 0);
        for a in 0..n {
            for b in a + 1..n {
                let gap = (values[a * n + b] - values[b * n + a]).abs();
                if gap > worst.0 {
                    worst = (gap, a, b);
                }
            }
        }
        if worst.0 > SYMMETRY_TOLERANCE {
            let (gap, a, b) = worst;
            return Err(Error::format(format!(
                "matrix is asymmetric: worst cell ({}, {}) differs by {gap:e}",
                labels[a], labels[b]
            )));
        }
        for a in 0..n {
            let diag = values[a * n + a];
            if diag > DIAGONAL_TOLERANCE {
                return Err(Error::format(format!(
                    "diagonal entry for {} is {diag}, expected 0",
                    labels[a]
                )));
            }
            values[a * n + a] = 0.0;
            for b in a + 1..n {
                let avg = (values[a * n + b] + values[b * n + a]) / 2.0;
                values[a * n + b] = avg;
                values[b * n + a] = avg;
            }
        }
        Ok(DistanceMatrix {
            labels: labels.into(),
            values,
        })
    }

    pub fn from_fn(labels: Vec<String>, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let n = labels.len();
        let values = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self::new(labels, values)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub(crate) fn shared_labels(&self) -> &Arc<[String]> {
        &self.labels
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n() + b]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `alpha * D`; fails if any entry leaves `[0, 1]`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(
            self.labels.to_vec(),
            self.values.iter().map(|x| x * alpha).collect(),
        )
    }

    /// Renames objects: object `k` of `self` becomes object `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::argument("not a permutation"));
        }
        let mut inverse = vec![usize::MAX; n];
        for (k, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::argument("not a permutation"));
            }
            inverse[p] = k;
        }
        let labels = inverse.iter().map(|&k| self.labels[k].clone()).collect();
        Self::from_fn(labels, |a, b| self.get(inverse[a], inverse[b]))
    }

    /// SHA-256 over the matrix with labels sorted, as lowercase hex.
    ///
    /// The digest covers each sorted label followed by a newline, then every
    /// entry in sorted-label order as a big-endian IEEE-754 double.
    pub fn digest(&self) -> String {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.labels[a].cmp(&self.labels[b]));
        let mut hasher = Sha256::new();
        for &k in &order {
            hasher.update(self.labels[k].as_bytes());
            hasher.update(b"\n");
        }
        for &a in &order {
            for &b in &order {
                hasher.update(self.get(a, b).to_be_bytes());
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("o{i}")).collect()
    }

    #[test]
    fn symmetrizes_small_noise() {
        let mut v = vec![0.5; 16];
        for a in 0..4 {
            v[a * 4 + a] = 0.0;
        }
        v[4 + 2] = 0.3;
        v[2 * 4 + 1] = 0.30000000001;
        let d = DistanceMatrix::new(labels(4), v).unwrap();
        assert_eq!(d.get(1, 2), d.get(2, 1));
        assert!((d.get(1, 2) - 0.300000000005).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let ok = |a: usize, b: usize| if a == b { 0.0 } else { 0.5 };
        assert!(matches!(
            DistanceMatrix::from_fn(labels(3), ok),
            Err(Error::Size(_))
        ));
        let err = DistanceMatrix::from_fn(labels(4), |a, b| if (a, b) == (0, 3) { 0.6 } else { ok(a, b) })
            .unwrap_err();
        assert!(err.to_string().contains("(o0, o3)"), "{err}");
        assert!(DistanceMatrix::from_fn(labels(4), |a, b| if a == b { 0.0 } else { 1.5 }).is_err());
        assert!(DistanceMatrix::from_fn(labels(4), |a, b| if a == b { 0.1 } else { 0.5 }).is_err());
        let mut dup = labels(4);
        dup[3] = "o0".into();
        assert!(matches!(DistanceMatrix::from_fn(dup, ok), Err(Error::Format(_))));
    }

    #[test]
    fn digest_ignores_object_order() {
        let d = DistanceMatrix::from_fn(labels(5), |a, b| if a == b { 0.0 } else { (a + b) as f64 / 10.0 })
            .unwrap();
        let p = d.permuted(&[3, 1, 4, 0, 2]).unwrap();
        assert_eq!(d.digest(), p.digest());
        assert_eq!(d.digest().len(), 64);
        let other = d.scaled(0.5).unwrap();
        assert_ne!(d.digest(), other.digest());
    }
}
