//! Cosine similarity and one-to-one signature matching.

use crate::error::{Error, Result};
use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

/// Cosine of the angle between two nonzero vectors.
pub fn cosine_similarity(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!("vectors of length {} and {}", u.len(), v.len())));
    }
    let nu = u.dot(&u).sqrt();
    let nv = v.dot(&v).sqrt();
    if !(nu > 0.0) || !(nv > 0.0) {
        return Err(Error::domain("cosine similarity of a zero vector"));
    }
    Ok((u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Pairwise cosine similarities between the columns of `a` (rows of the result) and of `b`.
/// Pairs involving a zero column score 0.
pub fn cosine_matrix(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let na: Vec<f64> = a.axis_iter(Axis(1)).map(|c| c.dot(&c).sqrt()).collect();
    let nb: Vec<f64> = b.axis_iter(Axis(1)).map(|c| c.dot(&c).sqrt()).collect();
    let mut out = a.t().dot(&b);
    for ((p, q), v) in out.indexed_iter_mut() {
        let d = na[p] * nb[q];
        *v = if d > 0.0 { (*v / d).clamp(-1.0, 1.0) } else { 0.0 };
    }
    out
}

/// Assignment of rows to distinct columns maximising the total score (requires rows ≤ cols).
///
/// Shortest augmenting path form of the Hungarian method, O(rows² · cols).
pub fn assignment_max(score: ArrayView2<'_, f64>) -> Vec<usize> {
    let (n, m) = score.dim();
    assert!(n <= m, "assignment needs rows <= cols");
    if n == 0 {
        return Vec::new();
    }
    // minimise cost = −score; potentials u (rows), v (cols); 1-based with a virtual column 0
    let cost = |i: usize, j: usize| -score[[i - 1, j - 1]];
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// One-to-one matching between estimated and reference signatures.
///
/// The smaller side is conceptually padded with zero columns; a column matched to a pad
/// has partner `None` and similarity 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// Partner of each estimated column.
    pub estimated_to_reference: Vec<Option<usize>>,
    /// Partner of each reference column.
    pub reference_to_estimated: Vec<Option<usize>>,
    /// Cosine of each reference column with its partner (0 for a pad).
    pub reference_similarity: Vec<f64>,
    pub total_similarity: f64,
}

/// Optimal one-to-one matching of the columns of `estimated` to those of `reference`
/// maximising the total cosine similarity.
pub fn hungarian_match(estimated: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>) -> Result<Matching> {
    if estimated.nrows() != reference.nrows() {
        return Err(Error::Dimension(format!(
            "estimated has {} channels, reference {}",
            estimated.nrows(),
            reference.nrows()
        )));
    }
    let (ke, kr) = (estimated.ncols(), reference.ncols());
    let sim = cosine_matrix(estimated, reference);
    let mut e2r = vec![None; ke];
    let mut r2e = vec![None; kr];
    if ke <= kr {
        for (e, r) in assignment_max(sim.view()).into_iter().enumerate() {
            e2r[e] = Some(r);
            r2e[r] = Some(e);
        }
    } else {
        for (r, e) in assignment_max(sim.t()).into_iter().enumerate() {
            e2r[e] = Some(r);
            r2e[r] = Some(e);
        }
    }
    let reference_similarity: Vec<f64> = r2e
        .iter()
        .enumerate()
        .map(|(r, e)| e.map_or(0.0, |e| sim[[e, r]]))
        .collect();
    let total_similarity = reference_similarity.iter().sum();
    Ok(Matching {
        estimated_to_reference: e2r,
        reference_to_estimated: r2e,
        reference_similarity,
        total_similarity,
    })
}

impl Matching {
    /// Reorders the columns of an estimate to follow the reference, inserting zero columns for
    /// pads. Returns a matrix with `max(K_est, K_ref)` columns whose first `K_ref` columns align
    /// with the reference; surplus estimated columns follow in their original order.
    pub fn align_columns(&self, est: ArrayView2<'_, f64>) -> Array2<f64> {
        let kr = self.reference_to_estimated.len();
        let n = kr.max(self.estimated_to_reference.len());
        let mut out = Array2::zeros((est.nrows(), n));
        for (r, e) in self.reference_to_estimated.iter().enumerate() {
            if let Some(e) = e {
                out.column_mut(r).assign(&est.column(*e));
            }
        }
        let mut slot = kr;
        for (e, r) in self.estimated_to_reference.iter().enumerate() {
            if r.is_none() {
                out.column_mut(slot).assign(&est.column(e));
                slot += 1;
            }
        }
        out
    }

    /// Same reordering applied to the rows of a loading matrix.
    pub fn align_rows(&self, est: ArrayView2<'_, f64>) -> Array2<f64> {
        self.align_columns(est.t()).reversed_axes()
    }
}

/// Pads a reference matrix with zero columns up to `n` columns.
pub fn pad_columns(m: ArrayView2<'_, f64>, n: usize) -> Array2<f64> {
    let mut out = Array2::zeros((m.nrows(), n.max(m.ncols())));
    out.slice_mut(ndarray::s![.., ..m.ncols()]).assign(&m);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use ndarray::{array, Array1};

    fn brute_force(score: &Array2<f64>) -> f64 {
        fn rec(score: &Array2<f64>, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == score.nrows() {
                return 0.0;
            }
            let mut best = f64::NEG_INFINITY;
            for c in 0..score.ncols() {
                if !used[c] {
                    used[c] = true;
                    best = best.max(score[[row, c]] + rec(score, row + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        rec(score, 0, &mut vec![false; score.ncols()])
    }

    #[test]
    fn cosine_examples() {
        let u = array![1.0, 1.0, 0.0];
        let v = array![1.0, 0.0, 0.0];
        assert!((cosine_similarity(u.view(), u.view()).unwrap() - 1.0).abs() < 1e-15);
        assert!((cosine_similarity(u.view(), v.view()).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(cosine_similarity(array![0.0, 1.0].view(), array![1.0, 0.0].view()).unwrap(), 0.0);
        assert!(cosine_similarity(Array1::zeros(2).view(), v.slice(ndarray::s![..2])).is_err());
    }

    #[test]
    fn recovers_permutation() {
        let r = array![[0.7, 0.1, 0.2], [0.2, 0.8, 0.1], [0.1, 0.1, 0.7]];
        let perm = [2usize, 0, 1];
        let est = r.select(Axis(1), &perm);
        let m = hungarian_match(est.view(), r.view()).unwrap();
        for (e, &p) in perm.iter().enumerate() {
            assert_eq!(m.estimated_to_reference[e], Some(p));
        }
        assert!((m.total_similarity - 3.0).abs() < 1e-12);
        assert_eq!(m.align_columns(est.view()), r);
    }

    #[test]
    fn pads_smaller_side() {
        let r = array![[0.7, 0.1, 0.2], [0.2, 0.8, 0.1], [0.1, 0.1, 0.7]];
        let est = r.select(Axis(1), &[1, 2]);
        let m = hungarian_match(est.view(), r.view()).unwrap();
        assert_eq!(m.reference_to_estimated.iter().filter(|x| x.is_none()).count(), 1);
        assert_eq!(m.reference_to_estimated[0], None);
        let aligned = m.align_columns(est.view());
        assert_eq!(aligned.column(0).sum(), 0.0);

        let m2 = hungarian_match(r.view(), est.view()).unwrap();
        assert_eq!(m2.estimated_to_reference[0], None);
        let aligned2 = m2.align_columns(r.view());
        assert_eq!(aligned2.ncols(), 3);
        assert_eq!(aligned2.column(2), r.column(0));
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = Rng::seed_from_u64(3);
        for n in 1..=6 {
            for m in n..=6 {
                for _ in 0..10 {
                    let score = Array2::from_shape_fn((n, m), |_| rng.uniform());
                    let a = assignment_max(score.view());
                    let mut seen = vec![false; m];
                    for &c in &a {
                        assert!(!seen[c]);
                        seen[c] = true;
                    }
                    let tot: f64 = a.iter().enumerate().map(|(r, &c)| score[[r, c]]).sum();
                    assert!((tot - brute_force(&score)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn align_rows_follows_columns() {
        let r = array![[1.0, 0.0], [0.0, 1.0]];
        let est = array![[0.0, 1.0], [1.0, 0.0]];
        let th = array![[5.0, 6.0], [7.0, 8.0]];
        let m = hungarian_match(est.view(), r.view()).unwrap();
        assert_eq!(m.align_rows(th.view()), array![[7.0, 8.0], [5.0, 6.0]]);
    }
}
