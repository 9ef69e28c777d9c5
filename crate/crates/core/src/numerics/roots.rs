//! All-roots polynomial solver (Aberth–Ehrlich iteration with Newton polish).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Leading coefficients below this fraction of the largest coefficient are
/// treated as zero, each one recording a root at infinity.
pub const LEADING_DEFLATION_TOL: f64 = 1e-13;

/// Post-polish residual bound, relative to `max|c_k| * max(1, |z|)^d`.
pub const RESIDUAL_TOL: f64 = 1e-10;

const MAX_ITERATIONS: usize = 1000;
const POLISH_STEPS: usize = 8;

/// Roots of a polynomial after deflation of vanishing leading coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyRoots {
    /// Finite roots, one entry per multiplicity.
    pub roots: Vec<Complex64>,
    /// Number of stripped leading coefficients (roots "at infinity").
    pub at_infinity: usize,
    /// Aberth sweeps used.
    pub iterations: usize,
}

impl PolyRoots {
    pub fn degree(&self) -> usize {
        self.roots.len()
    }
}

/// Value and derivative by Horner's rule; `coeffs` is low-to-high.
#[inline]
pub fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

#[inline]
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Multiplies two polynomials given low-to-high.
pub fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Finds all roots of `sum_k coeffs[k] z^k`.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<PolyRoots> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroPolynomial);
    }

    let mut hi = coeffs.len();
    while coeffs[hi - 1].norm() < LEADING_DEFLATION_TOL * scale {
        hi -= 1;
    }
    let at_infinity = coeffs.len() - hi;

    let mut lo = 0;
    while coeffs[lo] == Complex64::new(0.0, 0.0) {
        lo += 1;
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); lo];
    let poly = &coeffs[lo..hi];
    let degree = poly.len() - 1;

    let iterations = match degree {
        0 => 0,
        1 => {
            roots.push(-poly[0] / poly[1]);
            0
        }
        _ => {
            let (found, iters) = aberth(poly)?;
            roots.extend(found);
            iters
        }
    };

    Ok(PolyRoots {
        roots,
        at_infinity,
        iterations,
    })
}

fn residual_bound(poly: &[Complex64], z: Complex64) -> f64 {
    let scale = poly.iter().map(|c| c.norm()).fold(0.0, f64::max);
    RESIDUAL_TOL * scale * z.norm().max(1.0).powi(poly.len() as i32 - 1)
}

fn aberth(poly: &[Complex64]) -> Result<(Vec<Complex64>, usize)> {
    let degree = poly.len() - 1;
    let lead = poly[degree];
    let monic: Vec<Complex64> = poly.iter().map(|c| c / lead).collect();
    let dmonic: Vec<Complex64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();

    // Start on a circle whose radius is the geometric mean of the root moduli.
    let radius = monic[0].norm().powf(1.0 / degree as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            Complex64::from_polar(
                radius,
                std::f64::consts::TAU * k as f64 / degree as f64 + 0.4,
            )
        })
        .collect();
    let mut settled = vec![false; degree];

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut all_settled = true;
        for i in 0..degree {
            if settled[i] {
                continue;
            }
            let p = horner(&monic, z[i]);
            let dp = horner(&dmonic, z[i]);
            if p == Complex64::new(0.0, 0.0) {
                settled[i] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                // Coincident iterates: nudge apart and keep going.
                let nudge = Complex64::new(1e-8, 1e-8) * z[i].norm().max(1.0);
                z[i] += nudge;
                all_settled = false;
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                settled[i] = true;
            } else {
                all_settled = false;
            }
        }
        if all_settled {
            break;
        }
    }

    for root in z.iter_mut() {
        polish(poly, root);
    }

    let worst = z
        .iter()
        .map(|&r| horner(poly, r).norm() / residual_bound(poly, r))
        .fold(0.0, f64::max);
    if worst > 1.0 || z.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::RootsNotConverged {
            iterations,
            residual: worst * RESIDUAL_TOL,
            best: z,
        });
    }
    Ok((z, iterations))
}

/// Newton refinement that only accepts residual-decreasing steps.
fn polish(poly: &[Complex64], root: &mut Complex64) {
    let (mut p, mut dp) = horner_with_derivative(poly, *root);
    for _ in 0..POLISH_STEPS {
        if dp == Complex64::new(0.0, 0.0) || p == Complex64::new(0.0, 0.0) {
            return;
        }
        let candidate = *root - p / dp;
        let (cp, cdp) = horner_with_derivative(poly, candidate);
        if cp.norm() >= p.norm() {
            return;
        }
        *root = candidate;
        p = cp;
        dp = cdp;
    }
}
