//! Real Schur decomposition: Householder Hessenberg reduction followed by
//! Francis double-shift QR iteration with deflation.
//!
//! The factorization is a = u * t * u^T with u orthogonal and t quasi upper
//! triangular: real eigenvalues appear as 1x1 diagonal entries, complex
//! conjugate pairs as standardized 2x2 diagonal blocks (b*c < 0). Entries
//! below the first subdiagonal are exact zeros, as are subdiagonal entries
//! outside 2x2 blocks. No eigenvalue ordering is imposed. The computation is
//! sequential and branch-deterministic: identical input bits give identical
//! factor bits.

use crate::matrix::{Matrix, MatrixError};

/// Relative deflation threshold on subdiagonal entries.
const DEFLATE_EPS: f64 = 1e-12;
/// Total sweep budget is `BUDGET_PER_N * n`.
const BUDGET_PER_N: usize = 100;
/// An exceptional shift is used after this many sweeps without deflation.
const STALL_LIMIT: usize = 10;

#[derive(Debug, Clone)]
pub struct SchurFactors {
    /// Orthogonal factor (the watermarking key half).
    pub u: Matrix,
    /// Quasi upper triangular factor.
    pub t: Matrix,
}

/// Reduce a square matrix to upper Hessenberg form: a = q * h * q^T.
pub fn hessenberg(a: &Matrix) -> Result<(Matrix, Matrix), MatrixError> {
    check_input(a)?;
    let mut h = a.clone();
    let mut q = Matrix::identity(a.rows());
    hessenberg_in_place(&mut h, &mut q);
    Ok((q, h))
}

/// Full real Schur decomposition.
pub fn schur_decompose(a: &Matrix) -> Result<SchurFactors, MatrixError> {
    check_input(a)?;
    let n = a.rows();
    let mut t = a.clone();
    let mut u = Matrix::identity(n);
    hessenberg_in_place(&mut t, &mut u);
    qr_iterate(&mut t, &mut u)?;
    // Defense against -0.0 and rounding dust below the first subdiagonal.
    for i in 2..n {
        for j in 0..i - 1 {
            t[(i, j)] = 0.0;
        }
    }
    Ok(SchurFactors { u, t })
}

/// Rebuild the original matrix as u * t * u^T.
pub fn schur_reconstruct(f: &SchurFactors) -> Result<Matrix, MatrixError> {
    if !f.u.is_square() || !f.t.is_square() || f.u.rows() != f.t.rows() {
        return Err(MatrixError::Dimension {
            left_rows: f.u.rows(),
            left_cols: f.u.cols(),
            right_rows: f.t.rows(),
            right_cols: f.t.cols(),
        });
    }
    f.u.matmul(&f.t)?.matmul_transposed(&f.u)
}

fn check_input(a: &Matrix) -> Result<(), MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() == 0 {
        return Err(MatrixError::Empty);
    }
    a.check_finite()
}

fn hessenberg_in_place(h: &mut Matrix, q: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        // Householder vector annihilating h[k+2.., k].
        let mut tail2 = 0.0;
        for i in k + 2..n {
            tail2 += h[(i, k)] * h[(i, k)];
        }
        if tail2 == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let norm = (x0 * x0 + tail2).sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h[(i, k)];
        }
        let vtv: f64 = v[k + 1..n].iter().map(|x| x * x).sum();
        let beta = 2.0 / vtv;

        // h <- P h, rows k+1..n.
        for j in k..n {
            let mut s = 0.0;
            for i in k + 1..n {
                s += v[i] * h[(i, j)];
            }
            let bs = beta * s;
            for i in k + 1..n {
                h[(i, j)] -= bs * v[i];
            }
        }
        // h <- h P, cols k+1..n.
        for i in 0..n {
            let mut s = 0.0;
            for j in k + 1..n {
                s += h[(i, j)] * v[j];
            }
            let bs = beta * s;
            for j in k + 1..n {
                h[(i, j)] -= bs * v[j];
            }
        }
        // q <- q P.
        for i in 0..n {
            let mut s = 0.0;
            for j in k + 1..n {
                s += q[(i, j)] * v[j];
            }
            let bs = beta * s;
            for j in k + 1..n {
                q[(i, j)] -= bs * v[j];
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = 0.0;
        }
    }
}

fn qr_iterate(t: &mut Matrix, u: &mut Matrix) -> Result<(), MatrixError> {
    let n = t.rows();
    let budget = BUDGET_PER_N * n;
    let mut sweeps = 0usize;
    let mut stall = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        let lo = deflate_scan(t, hi);
        if lo == hi {
            hi -= 1;
            stall = 0;
            continue;
        }
        if lo + 1 == hi {
            standardize_block(t, u, lo);
            if lo == 0 {
                return Ok(());
            }
            hi = lo - 1;
            stall = 0;
            continue;
        }
        if sweeps >= budget {
            return Err(MatrixError::Convergence { budget, index: hi });
        }
        sweeps += 1;
        stall += 1;
        francis_sweep(t, u, lo, hi, stall.is_multiple_of(STALL_LIMIT));
    }
    Ok(())
}

/// Scan subdiagonals from `hi` down; zero and return the first negligible one.
fn deflate_scan(t: &mut Matrix, hi: usize) -> usize {
    let mut l = hi;
    while l > 0 {
        let sub = t[(l, l - 1)];
        if sub == 0.0 {
            return l;
        }
        let tol = DEFLATE_EPS * (t[(l - 1, l - 1)].abs() + t[(l, l)].abs());
        if sub.abs() <= tol {
            t[(l, l - 1)] = 0.0;
            return l;
        }
        l -= 1;
    }
    0
}

/// One implicit double-shift sweep on the active block [lo, hi], hi-lo >= 2.
fn francis_sweep(t: &mut Matrix, u: &mut Matrix, lo: usize, hi: usize, exceptional: bool) {
    let (ssum, sprod) = if exceptional {
        // Synthetic shift pair breaking symmetry-induced stalls.
        let s = t[(hi, hi - 1)].abs() + t[(hi - 1, hi - 2)].abs();
        let d = 0.75 * s + t[(hi, hi)];
        (2.0 * d, d * d + 0.4375 * s * s)
    } else {
        let a = t[(hi - 1, hi - 1)];
        let b = t[(hi - 1, hi)];
        let c = t[(hi, hi - 1)];
        let d = t[(hi, hi)];
        (a + d, a * d - b * c)
    };

    // First column of (T - s1 I)(T - s2 I) restricted to the block.
    let h00 = t[(lo, lo)];
    let h01 = t[(lo, lo + 1)];
    let h10 = t[(lo + 1, lo)];
    let h11 = t[(lo + 1, lo + 1)];
    let h21 = t[(lo + 2, lo + 1)];
    let mut x = h00 * h00 + h01 * h10 - ssum * h00 + sprod;
    let mut y = h10 * (h00 + h11 - ssum);
    let mut z = h10 * h21;

    for k in lo..hi - 1 {
        if let Some((v0, v1, v2, beta)) = householder3(x, y, z) {
            let c0 = if k > lo { k - 1 } else { lo };
            apply_left3(t, k, c0, v0, v1, v2, beta);
            apply_right3(t, k, (k + 3).min(hi), v0, v1, v2, beta);
            apply_right3(u, k, u.rows() - 1, v0, v1, v2, beta);
        }
        if k > lo {
            t[(k + 1, k - 1)] = 0.0;
            t[(k + 2, k - 1)] = 0.0;
        }
        x = t[(k + 1, k)];
        y = t[(k + 2, k)];
        if k + 3 <= hi {
            z = t[(k + 3, k)];
        }
    }
    // Final 2-row reflector annihilating t[hi, hi-2].
    if let Some((v0, v1, beta)) = householder2(x, y) {
        apply_left2(t, hi - 1, hi - 2, v0, v1, beta);
        apply_right2(t, hi - 1, hi, v0, v1, beta);
        apply_right2(u, hi - 1, u.rows() - 1, v0, v1, beta);
    }
    t[(hi, hi - 2)] = 0.0;
}

fn householder3(x: f64, y: f64, z: f64) -> Option<(f64, f64, f64, f64)> {
    if y == 0.0 && z == 0.0 {
        return None;
    }
    let scale = x.abs().max(y.abs()).max(z.abs());
    let (xs, ys, zs) = (x / scale, y / scale, z / scale);
    let norm = (xs * xs + ys * ys + zs * zs).sqrt();
    let alpha = if xs >= 0.0 { -norm } else { norm };
    let v0 = xs - alpha;
    let beta = 2.0 / (v0 * v0 + ys * ys + zs * zs);
    Some((v0, ys, zs, beta))
}

fn householder2(x: f64, y: f64) -> Option<(f64, f64, f64)> {
    if y == 0.0 {
        return None;
    }
    let scale = x.abs().max(y.abs());
    let (xs, ys) = (x / scale, y / scale);
    let norm = (xs * xs + ys * ys).sqrt();
    let alpha = if xs >= 0.0 { -norm } else { norm };
    let v0 = xs - alpha;
    let beta = 2.0 / (v0 * v0 + ys * ys);
    Some((v0, ys, beta))
}

/// Rows k..k+3 of t get P = I - beta v v^T from the left, cols c0 onward.
fn apply_left3(t: &mut Matrix, k: usize, c0: usize, v0: f64, v1: f64, v2: f64, beta: f64) {
    let n = t.cols();
    let data = t.data_mut();
    let (r0, r1, r2) = (k * n, (k + 1) * n, (k + 2) * n);
    for j in c0..n {
        let s = v0 * data[r0 + j] + v1 * data[r1 + j] + v2 * data[r2 + j];
        let bs = beta * s;
        data[r0 + j] -= bs * v0;
        data[r1 + j] -= bs * v1;
        data[r2 + j] -= bs * v2;
    }
}

/// Cols k..k+3 of t get P from the right, rows 0..=rmax.
fn apply_right3(t: &mut Matrix, k: usize, rmax: usize, v0: f64, v1: f64, v2: f64, beta: f64) {
    let n = t.cols();
    let data = t.data_mut();
    for i in 0..=rmax {
        let r = i * n + k;
        let s = v0 * data[r] + v1 * data[r + 1] + v2 * data[r + 2];
        let bs = beta * s;
        data[r] -= bs * v0;
        data[r + 1] -= bs * v1;
        data[r + 2] -= bs * v2;
    }
}

fn apply_left2(t: &mut Matrix, k: usize, c0: usize, v0: f64, v1: f64, beta: f64) {
    let n = t.cols();
    let data = t.data_mut();
    let (r0, r1) = (k * n, (k + 1) * n);
    for j in c0..n {
        let s = v0 * data[r0 + j] + v1 * data[r1 + j];
        let bs = beta * s;
        data[r0 + j] -= bs * v0;
        data[r1 + j] -= bs * v1;
    }
}

fn apply_right2(t: &mut Matrix, k: usize, rmax: usize, v0: f64, v1: f64, beta: f64) {
    let n = t.cols();
    let data = t.data_mut();
    for i in 0..=rmax {
        let r = i * n + k;
        let s = v0 * data[r] + v1 * data[r + 1];
        let bs = beta * s;
        data[r] -= bs * v0;
        data[r + 1] -= bs * v1;
    }
}

/// Resolve the 2x2 diagonal block at (k, k+1): rotate a real pair into
/// triangular form, or a complex pair into the standardized equal-diagonal
/// form with t[k,k+1] * t[k+1,k] < 0.
fn standardize_block(t: &mut Matrix, u: &mut Matrix, k: usize) {
    let a = t[(k, k)];
    let b = t[(k, k + 1)];
    let c = t[(k + 1, k)];
    let d = t[(k + 1, k + 1)];
    if c == 0.0 {
        return;
    }
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    let (cs, sn, real_pair) = if disc >= 0.0 {
        // Eigenvector for the eigenvalue farther from d: lambda - d = p + sign(p)*sqrt(disc).
        let vd = p + disc.sqrt().copysign(p);
        let h = vd.hypot(c);
        (vd / h, c / h, true)
    } else {
        // Equal-diagonal rotation: (a-d)cos2t + (b+c)sin2t = 0.
        let theta = 0.5 * (d - a).atan2(b + c);
        (theta.cos(), theta.sin(), false)
    };
    rotate_rows(t, k, cs, sn, k);
    rotate_cols(t, k, cs, sn, k + 1);
    rotate_cols(u, k, cs, sn, u.rows() - 1);
    if real_pair {
        t[(k + 1, k)] = 0.0;
    }
}

/// Rows (k, k+1) <- G^T * rows, G = [[cs, -sn], [sn, cs]], cols c0 onward.
fn rotate_rows(t: &mut Matrix, k: usize, cs: f64, sn: f64, c0: usize) {
    let n = t.cols();
    let data = t.data_mut();
    let (r0, r1) = (k * n, (k + 1) * n);
    for j in c0..n {
        let x = data[r0 + j];
        let y = data[r1 + j];
        data[r0 + j] = cs * x + sn * y;
        data[r1 + j] = cs * y - sn * x;
    }
}

/// Cols (k, k+1) <- cols * G, rows 0..=rmax.
fn rotate_cols(t: &mut Matrix, k: usize, cs: f64, sn: f64, rmax: usize) {
    let n = t.cols();
    let data = t.data_mut();
    for i in 0..=rmax {
        let r = i * n + k;
        let x = data[r];
        let y = data[r + 1];
        data[r] = cs * x + sn * y;
        data[r + 1] = cs * y - sn * x;
    }
}
