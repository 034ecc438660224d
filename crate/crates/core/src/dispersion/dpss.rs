//! Discrete prolate spheroidal sequences via the commuting symmetric
//! tridiagonal matrix.
//!
//! The order-m DPSS of length L and half-bandwidth W is the eigenvector of the
//! tridiagonal matrix with diagonal ((L-1-2i)/2)^2 cos(2 pi W) and
//! off-diagonal i (L-i) / 2 belonging to its (m+1)-largest eigenvalue. The top
//! eigenpairs are found by Sturm-sequence bisection plus inverse iteration,
//! which is exact enough to keep the families orthonormal to well below 1e-10.

use crate::error::{Error, Result};

const PIVMIN: f64 = 1e-300;

#[inline]
fn guard(x: f64) -> f64 {
    if x == 0.0 {
        PIVMIN
    } else {
        x
    }
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, offdiag) strictly
/// below `x`, by the Sturm sequence of the shifted LDL^T factorization.
fn count_below(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q.abs() < PIVMIN {
            if q < 0.0 {
                -PIVMIN
            } else {
                PIVMIN
            }
        } else {
            q
        };
        q = diag[i] - x - offdiag[i - 1] * offdiag[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalue of ascending index `j` (0 = smallest) by bisection.
fn eigenvalue_by_index(diag: &[f64], offdiag: &[f64], j: usize, lo0: f64, hi0: f64) -> f64 {
    let mut lo = lo0;
    let mut hi = hi0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, offdiag, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
        let scale = lo.abs().max(hi.abs()).max(1.0);
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves (T - shift I) out = rhs for a symmetric tridiagonal T, with partial
/// pivoting (the shifted matrix is near-singular by construction during
/// inverse iteration).
fn solve_shifted(diag: &[f64], offdiag: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let sub = offdiag.to_vec();
    let mut b: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut c = offdiag.to_vec();
    let mut c2 = vec![0.0; n]; // second super-diagonal fill-in
    let mut x = rhs.to_vec();

    for i in 0..n.saturating_sub(1) {
        if b[i].abs() >= sub[i].abs() {
            let m = sub[i] / guard(b[i]);
            b[i + 1] -= m * c[i];
            if i + 2 < n {
                c[i + 1] -= m * c2[i];
            }
            x[i + 1] -= m * x[i];
        } else {
            // swap rows i and i+1
            let m = b[i] / sub[i];
            b[i] = sub[i];
            let old_c = c[i];
            c[i] = b[i + 1];
            b[i + 1] = old_c - m * b[i + 1];
            if i + 2 < n {
                let old_c2 = c2[i];
                c2[i] = c[i + 1];
                c[i + 1] = old_c2 - m * c[i + 1];
            }
            x.swap(i, i + 1);
            let xi = x[i];
            x[i + 1] -= m * xi;
        }
    }

    x[n - 1] /= guard(b[n - 1]);
    if n >= 2 {
        x[n - 2] = (x[n - 2] - c[n - 2] * x[n - 1]) / guard(b[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - c[i] * x[i + 1] - c2[i] * x[i + 2]) / guard(b[i]);
    }
    x
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn residual_norm(diag: &[f64], offdiag: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = diag.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut acc = (diag[i] - lambda) * v[i];
        if i > 0 {
            acc += offdiag[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            acc += offdiag[i] * v[i + 1];
        }
        worst = worst.max(acc.abs());
    }
    worst
}

/// Top `count` eigenpairs of a symmetric tridiagonal matrix, eigenvalues in
/// descending order, eigenvectors unit-norm and mutually orthogonal.
pub fn tridiagonal_top_eigh(
    diag: &[f64],
    offdiag: &[f64],
    count: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = diag.len();
    assert!(n >= 1 && offdiag.len() == n - 1);
    assert!(count >= 1 && count <= n);

    if n == 1 {
        return (vec![diag[0]], vec![vec![1.0]]);
    }

    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { offdiag[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let spread = (hi - lo).max(1.0);
    lo -= 1e-12 * spread;
    hi += 1e-12 * spread;

    let scale = diag
        .iter()
        .chain(offdiag.iter())
        .fold(0.0f64, |a, &b| a.max(b.abs()));

    let mut values = Vec::with_capacity(count);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for idx in 0..count {
        let j = n - 1 - idx; // ascending index of the idx-th largest
        let lambda = eigenvalue_by_index(diag, offdiag, j, lo, hi);

        // deterministic quasi-random start vector
        let mut state = 0x9e3779b97f4a7c15u64.wrapping_mul(idx as u64 + 1);
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        normalize(&mut v);

        let tol = 1e-13 * scale.max(1.0);
        for _ in 0..16 {
            let mut w = solve_shifted(diag, offdiag, lambda, &v);
            // keep the iterate orthogonal to already-found top eigenvectors
            for prev in &vectors {
                let dot: f64 = w.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (wi, pi) in w.iter_mut().zip(prev) {
                    *wi -= dot * pi;
                }
            }
            normalize(&mut w);
            v = w;
            if residual_norm(diag, offdiag, lambda, &v) <= tol {
                break;
            }
        }

        values.push(lambda);
        vectors.push(v);
    }
    (values, vectors)
}

/// The `count` most band-concentrated DPSS tapers of length `len` for a
/// time-halfbandwidth product `nw` (half-bandwidth W = nw / len). Tapers are
/// unit-norm, mutually orthogonal, ordered by decreasing concentration, and
/// sign-normalized so the first nonzero element is positive.
pub fn dpss_sequences(len: usize, nw: f64, count: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 || count > len {
        return Err(Error::InvalidTaperOrder {
            requested: count,
            len,
        });
    }
    assert!(nw > 0.0, "time-halfbandwidth product must be positive");

    let w = nw / len as f64;
    let cos_w = (std::f64::consts::TAU * w).cos();
    let diag: Vec<f64> = (0..len)
        .map(|i| {
            let h = (len as f64 - 1.0 - 2.0 * i as f64) / 2.0;
            h * h * cos_w
        })
        .collect();
    let offdiag: Vec<f64> = (1..len)
        .map(|i| i as f64 * (len - i) as f64 / 2.0)
        .collect();

    let (_, mut vectors) = tridiagonal_top_eigh(&diag, &offdiag, count);
    for v in vectors.iter_mut() {
        if let Some(first) = v.iter().find(|x| **x != 0.0) {
            if *first < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
        }
    }
    Ok(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense cyclic-Jacobi eigensolver used as an independent oracle.
    #[allow(clippy::needless_range_loop)]
    fn jacobi_eigh(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = a.len();
        let mut v = vec![vec![0.0; n]; n];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for i in 0..n {
                        let aip = a[i][p];
                        let aiq = a[i][q];
                        a[i][p] = c * aip - s * aiq;
                        a[i][q] = s * aip + c * aiq;
                    }
                    for j in 0..n {
                        let apj = a[p][j];
                        let aqj = a[q][j];
                        a[p][j] = c * apj - s * aqj;
                        a[q][j] = s * apj + c * aqj;
                    }
                    for i in 0..n {
                        let vip = v[i][p];
                        let viq = v[i][q];
                        v[i][p] = c * vip - s * viq;
                        v[i][q] = s * vip + c * viq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
        let values = order.iter().map(|&i| a[i][i]).collect();
        let vectors = order
            .iter()
            .map(|&col| (0..n).map(|row| v[row][col]).collect())
            .collect();
        (values, vectors)
    }

    fn dpss_tridiagonal(len: usize, nw: f64) -> (Vec<f64>, Vec<f64>) {
        let w = nw / len as f64;
        let cos_w = (std::f64::consts::TAU * w).cos();
        let diag = (0..len)
            .map(|i| {
                let h = (len as f64 - 1.0 - 2.0 * i as f64) / 2.0;
                h * h * cos_w
            })
            .collect();
        let offdiag = (1..len)
            .map(|i| i as f64 * (len - i) as f64 / 2.0)
            .collect();
        (diag, offdiag)
    }

    #[test]
    fn matches_dense_oracle_on_length_eight() {
        let (diag, offdiag) = dpss_tridiagonal(8, 1.0);
        let (values, vectors) = tridiagonal_top_eigh(&diag, &offdiag, 8);

        let mut dense = vec![vec![0.0; 8]; 8];
        for i in 0..8 {
            dense[i][i] = diag[i];
            if i + 1 < 8 {
                dense[i][i + 1] = offdiag[i];
                dense[i + 1][i] = offdiag[i];
            }
        }
        let (oracle_values, oracle_vectors) = jacobi_eigh(dense);

        for i in 0..8 {
            assert!(
                (values[i] - oracle_values[i]).abs() <= 1e-10 * values[i].abs().max(1.0),
                "eigenvalue {i}: {} vs oracle {}",
                values[i],
                oracle_values[i]
            );
            // align signs before comparing vectors
            let dot: f64 = vectors[i]
                .iter()
                .zip(&oracle_vectors[i])
                .map(|(a, b)| a * b)
                .sum();
            let sign = dot.signum();
            for (a, b) in vectors[i].iter().zip(&oracle_vectors[i]) {
                assert!(
                    (a - sign * b).abs() < 1e-10,
                    "eigenvector {i} mismatch: {a} vs {}",
                    sign * b
                );
            }
        }
    }

    #[test]
    fn families_are_orthonormal() {
        for (len, nw, count) in [(64usize, 1.5, 2usize), (311, 1.0, 1), (200, 2.5, 4)] {
            let tapers = dpss_sequences(len, nw, count).unwrap();
            for i in 0..count {
                for j in 0..count {
                    let dot: f64 = tapers[i].iter().zip(&tapers[j]).map(|(a, b)| a * b).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (dot - expect).abs() < 1e-10,
                        "len {len}: <{i},{j}> = {dot}"
                    );
                }
            }
        }
    }

    #[test]
    fn zeroth_order_is_positive_and_symmetric() {
        let tapers = dpss_sequences(33, 1.0, 1).unwrap();
        let t = &tapers[0];
        assert!(t.iter().all(|&x| x > 0.0));
        for i in 0..t.len() {
            assert!((t[i] - t[t.len() - 1 - i]).abs() < 1e-10);
        }
        // bell shape: maximum at the midpoint
        let mid = t.len() / 2;
        assert!(t.iter().all(|&x| x <= t[mid] + 1e-12));
    }

    #[test]
    fn first_order_is_odd_about_midpoint() {
        let tapers = dpss_sequences(32, 2.0, 2).unwrap();
        let t = &tapers[1];
        for i in 0..t.len() {
            assert!((t[i] + t[t.len() - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn too_many_tapers_rejected() {
        assert_eq!(
            dpss_sequences(4, 1.0, 5).unwrap_err().kind(),
            "InvalidTaperOrder"
        );
    }

    #[test]
    fn length_one_is_trivial() {
        let tapers = dpss_sequences(1, 1.0, 1).unwrap();
        assert_eq!(tapers, vec![vec![1.0]]);
    }
}
