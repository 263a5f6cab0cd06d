//! Projections onto the positive semidefinite cone.

use alloc::vec;
use alloc::vec::Vec;

use faer::{Mat, MatRef, Side};

use crate::{Complex, Error, Result};

/// Nearest (Frobenius) positive semidefinite matrix to a Hermitian `m`.
pub fn psd_project(m: MatRef<'_, Complex>) -> Result<Mat<Complex>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    let mut defect: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if defect > 1e-10 {
        return Err(Error::NotHermitian { defect });
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    let u = evd.U();
    let s = evd.S();
    let mut out = Mat::<Complex>::zeros(n, n);
    for k in 0..n {
        let lam = s[k].re;
        if lam <= 0.0 {
            continue;
        }
        for j in 0..n {
            let uj = u[(j, k)].conj() * lam;
            for i in 0..n {
                out[(i, j)] += u[(i, k)] * uj;
            }
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: MatRef<'_, Complex>) -> Result<f64> {
    let vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    Ok(vals.first().copied().unwrap_or(0.0))
}

/// Splits a real symmetric `w` into `w = plus - minus` with both parts
/// positive semidefinite and mutually orthogonal.
///
/// Exactly-zero couplings are respected: the matrix is decomposed into the
/// connected components of its sparsity pattern and each component is
/// diagonalized on its own, so entries that start at zero stay zero.
pub(crate) fn split_real(w: &Mat<f64>, plus: &mut Mat<f64>, minus: &mut Mat<f64>) -> Result<()> {
    let n = w.nrows();
    plus.fill(0.0);
    minus.fill(0.0);
    for comp in components(w) {
        if comp.len() == 1 {
            let i = comp[0];
            let v = w[(i, i)];
            if v > 0.0 {
                plus[(i, i)] = v;
            } else {
                minus[(i, i)] = -v;
            }
            continue;
        }
        let d = comp.len();
        let sub = if d == n {
            w.clone()
        } else {
            Mat::<f64>::from_fn(d, d, |a, b| w[(comp[a], comp[b])])
        };
        let evd = sub
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::Eigendecomposition)?;
        let u = evd.U();
        let s = evd.S().column_vector();
        let negatives = (0..d).filter(|&k| s[k] < 0.0).count();
        // Form the lower-rank part explicitly; the other follows from w.
        let use_neg = negatives <= d - negatives;
        let picked: Vec<usize> = (0..d)
            .filter(|&k| if use_neg { s[k] < 0.0 } else { s[k] > 0.0 })
            .collect();
        let mut part = Mat::<f64>::zeros(d, d);
        if !picked.is_empty() {
            let vs = Mat::<f64>::from_fn(d, picked.len(), |i, k| u[(i, picked[k])]);
            let vsd = Mat::<f64>::from_fn(d, picked.len(), |i, k| {
                u[(i, picked[k])] * s[picked[k]].abs()
            });
            part = &vsd * vs.transpose();
        }
        for a in 0..d {
            for b in 0..d {
                let (i, j) = (comp[a], comp[b]);
                let p = 0.5 * (part[(a, b)] + part[(b, a)]);
                if use_neg {
                    minus[(i, j)] = p;
                    plus[(i, j)] = w[(i, j)] + p;
                } else {
                    plus[(i, j)] = p;
                    minus[(i, j)] = p - w[(i, j)];
                }
            }
        }
    }
    Ok(())
}

/// Connected components of the nonzero pattern of a symmetric matrix.
fn components(w: &Mat<f64>) -> Vec<Vec<usize>> {
    let n = w.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..j {
            if w[(i, j)] != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        if label[root] == usize::MAX {
            label[root] = out.len();
            out.push(Vec::new());
        }
        out[label[root]].push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn identity_and_diagonal() {
        let id = Mat::<Complex>::from_fn(3, 3, |i, j| if i == j { c(1.0) } else { c(0.0) });
        let p = psd_project(id.as_ref()).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| (p[(i, j)] - id[(i, j)]).norm() < 1e-14)));

        let d = Mat::<Complex>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(1.0),
            (1, 1) => c(-2.0),
            _ => c(0.0),
        });
        let p = psd_project(d.as_ref()).unwrap();
        assert!((p[(0, 0)] - c(1.0)).norm() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::<Complex>::from_fn(2, 2, |i, j| if i < j { c(1.0) } else { c(0.0) });
        assert!(matches!(
            psd_project(m.as_ref()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn split_respects_blocks() {
        let w = Mat::<f64>::from_fn(4, 4, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (0, 1) | (1, 0) => 2.0,
            (1, 1) => 1.0,
            (2, 2) => -3.0,
            (3, 3) => 0.5,
            _ => 0.0,
        });
        let mut plus = Mat::zeros(4, 4);
        let mut minus = Mat::zeros(4, 4);
        split_real(&w, &mut plus, &mut minus).unwrap();
        // eigenvalues of [[1,2],[2,1]] are 3 and -1
        assert!((plus[(0, 0)] - 1.5).abs() < 1e-14);
        assert!((minus[(0, 1)] + 0.5).abs() < 1e-14);
        assert_eq!(minus[(2, 2)], 3.0);
        assert_eq!(plus[(3, 3)], 0.5);
        assert_eq!(plus[(0, 2)], 0.0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((plus[(i, j)] - minus[(i, j)] - w[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
