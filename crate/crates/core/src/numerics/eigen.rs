//! Eigenvalues of dense non-Hermitian complex matrices.
//!
//! The pipeline is the classical one: balance (permute out isolated
//! eigenvalues, then diagonally rescale the remaining block), reduce to upper
//! Hessenberg form with Householder reflectors and run the single-shift
//! complex QR iteration with Wilkinson shifts and deflation.
//!
//! The permutation step matters for finite sections of operators whose
//! sparsity graph is acyclic: such matrices are permutation-similar to a
//! triangular matrix, and their eigenvalues come out exactly instead of being
//! smeared into `eps^(1/k)` clusters by the QR rounding.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const RADIX: f64 = 2.0;
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of a square matrix, repeated by algebraic multiplicity and
/// in no particular order.
pub fn eig_dense(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !m.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }

    let mut a = m.clone();
    let (lo, hi) = permute_isolated(&mut a);

    let mut eigenvalues = Vec::with_capacity(n);
    eigenvalues.extend((0..lo).map(|i| a[(i, i)]));
    eigenvalues.extend((hi + 1..n).map(|i| a[(i, i)]));

    if lo <= hi {
        let mut core = a.submatrix(lo, lo, hi - lo + 1, hi - lo + 1);
        scale_balance(&mut core);
        hessenberg(&mut core);
        eigenvalues.extend(hessenberg_qr(&mut core)?);
    }
    Ok(eigenvalues)
}

fn swap_symmetric(a: &mut ComplexMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    let n = a.rows();
    for c in 0..n {
        let t = a[(i, c)];
        a[(i, c)] = a[(j, c)];
        a[(j, c)] = t;
    }
    for r in 0..n {
        let t = a[(r, i)];
        a[(r, i)] = a[(r, j)];
        a[(r, j)] = t;
    }
}

/// Permutes rows/columns with no off-diagonal coupling to the ends of the
/// matrix. Returns the inclusive active window `(lo, hi)`; diagonal entries
/// outside it are eigenvalues. `lo > hi` means everything was isolated.
fn permute_isolated(a: &mut ComplexMatrix) -> (usize, usize) {
    let zero = Complex64::new(0.0, 0.0);
    let n = a.rows();
    let mut lo = 0usize;
    let mut hi = n - 1;

    // Rows that are zero off the diagonal within columns lo..=hi go to the bottom.
    'rows: loop {
        for j in (lo..=hi).rev() {
            if (lo..=hi).all(|c| c == j || a[(j, c)] == zero) {
                swap_symmetric(a, j, hi);
                if hi == lo {
                    return (lo + 1, lo);
                }
                hi -= 1;
                continue 'rows;
            }
        }
        break;
    }

    // Columns that are zero off the diagonal within rows lo..=hi go to the top.
    'cols: loop {
        for j in lo..=hi {
            if (lo..=hi).all(|r| r == j || a[(r, j)] == zero) {
                swap_symmetric(a, j, lo);
                lo += 1;
                if lo > hi {
                    return (lo, hi);
                }
                continue 'cols;
            }
        }
        break;
    }
    (lo, hi)
}

/// Diagonal similarity by powers of two so that row and column norms match.
fn scale_balance(a: &mut ComplexMatrix) {
    let n = a.rows();
    let l1 = |z: Complex64| z.re.abs() + z.im.abs();
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += l1(a[(j, i)]);
                    r += l1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut ComplexMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    for k in 0..n - 2 {
        let tail_norm: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if tail_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let norm = (x0.norm_sqr() + tail_norm * tail_norm).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;

        let len = n - k - 1;
        v[0] = x0 - alpha;
        for i in 1..len {
            v[i] = a[(k + 1 + i, k)];
        }
        let vnorm: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v[..len].iter_mut().for_each(|z| *z /= vnorm);

        // Left: rows k+1.., H = (I - 2 v v^H) H
        for j in k..n {
            let dot: Complex64 = (0..len).map(|i| v[i].conj() * a[(k + 1 + i, j)]).sum();
            let dot = dot * 2.0;
            for i in 0..len {
                a[(k + 1 + i, j)] -= v[i] * dot;
            }
        }
        // Right: columns k+1.., H = H (I - 2 v v^H)
        for r in 0..n {
            let dot: Complex64 = (0..len).map(|i| a[(r, k + 1 + i)] * v[i]).sum();
            let dot = dot * 2.0;
            for i in 0..len {
                a[(r, k + 1 + i)] -= dot * v[i].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = zero;
        }
    }
}

/// Unitary rotation `[c s; -conj(s) c]` annihilating `y` in `(x, y)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let norm = ax.hypot(y.norm());
    if norm == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    (ax / norm, (x / ax) * y.conj() / norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let e1 = mid + disc;
    let e2 = mid - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Shifted QR on an upper Hessenberg matrix; destroys `h`.
fn hessenberg_qr(h: &mut ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let zero = Complex64::new(0.0, 0.0);
    let hnorm = h.frobenius_norm();
    let mut out = Vec::with_capacity(n);
    if hnorm == 0.0 {
        out.extend(std::iter::repeat(zero).take(n));
        return Ok(out);
    }

    let mut hi = n - 1;
    let mut sweeps = 0usize;
    loop {
        if hi == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        // Locate the bottom of the unreduced block ending at hi.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut tst = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if tst == 0.0 {
                if lo >= 2 {
                    tst += h[(lo - 1, lo - 2)].norm();
                }
                if lo + 1 <= hi {
                    tst += h[(lo + 1, lo)].norm();
                }
            }
            if tst == 0.0 {
                tst = hnorm;
            }
            if sub <= eps * tst {
                h[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            out.push(h[(hi, hi)]);
            hi -= 1;
            sweeps = 0;
            continue;
        }

        sweeps += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::EigenNotConverged {
                index: hi,
                iterations: sweeps,
            });
        }

        let shift = if sweeps % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Implicit single-shift sweep on the window lo..=hi.
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let first_col = if k > lo { k - 1 } else { lo };
            for j in first_col..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = zero;
            }
            let last_row = (k + 2).min(hi);
            for i in lo..=last_row {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    Ok(out)
}
