//! The adjoint side: composition operators on the inner disk and the outer
//! exterior disk, the block matrix that represents `L*`, and the contour
//! pairing that identifies `H^2(D_r) + H^2_0(D_R^inf)` with the dual of
//! `H^2(A)`.
//!
//! Dual vectors are kept in raw monomials: `h1 = sum_{m>=0} h1_m z^m` and
//! `h2 = sum_{m>=1} h2_m z^{-m}`. The pairing is
//!
//! ```text
//! l(f) = (1/2 pi i) \oint_{|z|=r} f h1 dz + (1/2 pi i) \oint_{|z|=R} f h2 dz
//!      = sum_{m>=0} h1_m f_{-m-1} + sum_{m>=1} h2_m f_{m-1}
//! ```
//!
//! with `f_k` the raw Laurent coefficients of `f`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::hardy::{Annulus, LaurentVector};
use crate::numerics::dft::circle_points;
use crate::numerics::ComplexMatrix;
use crate::transfer::{clean_coefficients, default_samples, transfer_matrix, TransferMatrix};

/// Minimum distance of a kernel probe from the annulus boundary.
pub const PROBE_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Disk,
    Exterior,
}

/// Matrix of `f -> f o B` on monomials.
///
/// For the disk, column `n` holds the Taylor coefficients `0..=N` of `B^n`.
/// For the exterior the same is done in the chart `w = 1/z` with
/// `g(w) = 1/B(1/w)`: column `m` holds the coefficients of `z^0, z^{-1}, ..,
/// z^{-N}` in `B^{-m}`. Row 0 of that matrix is the projection onto
/// constants, rows `1..=N` the part vanishing at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionMatrix {
    pub domain: Domain,
    /// Sampling radius: `r` for the disk, `1/R` in the exterior chart.
    pub radius: f64,
    pub order: usize,
    pub samples: usize,
    pub matrix: ComplexMatrix,
    pub aliased_columns: Vec<usize>,
}

impl CompositionMatrix {
    /// Exterior only: constants of `z^{-m} o B`, `m = 1..=N`.
    pub fn plus_row(&self) -> Vec<Complex64> {
        (1..=self.order).map(|m| self.matrix[(0, m)]).collect()
    }

    /// Exterior only: the `N x N` block on `z^{-1}, .., z^{-N}`.
    pub fn minus_block(&self) -> ComplexMatrix {
        self.matrix.submatrix(1, 1, self.order, self.order)
    }
}

/// Taylor coefficients of `b^n` for `n = 0..=order`, read on `|z| = radius`.
fn taylor_powers(
    b: &BlaschkeProduct,
    radius: f64,
    order: usize,
    samples: usize,
    domain: Domain,
) -> Result<CompositionMatrix> {
    if samples < default_samples(order) {
        return Err(Error::Precondition(format!(
            "M = {samples} is below 4(2N+1) = {}",
            default_samples(order)
        )));
    }
    let values: Vec<Complex64> = circle_points(samples, radius)
        .into_iter()
        .map(|z| b.evaluate(z))
        .collect::<Result<_>>()?;
    let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let columns: Vec<(Vec<Complex64>, bool)> = (0..=order)
        .into_par_iter()
        .map(|n| {
            let powers: Vec<Complex64> = values.iter().map(|v| v.powi(n as i32)).collect();
            let (hat, aliased) = clean_coefficients(&powers, sup.powi(n as i32));
            let col = (0..=order).map(|k| hat[k] * radius.powi(-(k as i32))).collect();
            (col, aliased)
        })
        .collect();

    let aliased_columns = columns
        .iter()
        .enumerate()
        .filter(|(_, (_, a))| *a)
        .map(|(n, _)| n)
        .collect();
    let cols: Vec<Vec<Complex64>> = columns.into_iter().map(|(c, _)| c).collect();
    Ok(CompositionMatrix {
        domain,
        radius,
        order,
        samples,
        matrix: ComplexMatrix::from_columns(&cols),
        aliased_columns,
    })
}

pub fn composition_matrix_disk(
    b: &BlaschkeProduct,
    a: &Annulus,
    order: usize,
    samples: usize,
) -> Result<CompositionMatrix> {
    taylor_powers(b, a.inner(), order, samples, Domain::Disk)
}

pub fn composition_matrix_exterior(
    b: &BlaschkeProduct,
    a: &Annulus,
    order: usize,
    samples: usize,
) -> Result<CompositionMatrix> {
    let g = b.conjugate_at_infinity();
    let mut c = taylor_powers(&g, 1.0 / a.outer(), order, samples, Domain::Exterior)?;
    // The constant of B^{-m} is exactly g(0)^m; zero when infinity is fixed.
    let g0 = g.evaluate(Complex64::new(0.0, 0.0))?;
    for m in 0..=order {
        c.matrix[(0, m)] = g0.powi(m as i32);
    }
    Ok(c)
}

/// `[[C_disk, P+ C_ext], [0, P- C_ext]]` on the ordered basis
/// `z^0, .., z^N ; z^{-1}, .., z^{-N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointBlockMatrix {
    pub order: usize,
    pub matrix: ComplexMatrix,
    pub disk: CompositionMatrix,
    pub exterior: CompositionMatrix,
}

impl AdjointBlockMatrix {
    pub fn apply(&self, v: &DualPair) -> Result<DualPair> {
        let n = self.order;
        if v.inner.len() > n + 1 || v.outer.len() > n {
            return Err(Error::Precondition(format!(
                "dual pair of sizes ({}, {}) exceeds order {n}",
                v.inner.len(),
                v.outer.len()
            )));
        }
        let mut x = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        x[..v.inner.len()].copy_from_slice(&v.inner);
        x[n + 1..n + 1 + v.outer.len()].copy_from_slice(&v.outer);
        let y = self.matrix.mul_vec(&x);
        Ok(DualPair {
            inner: y[..=n].to_vec(),
            outer: y[n + 1..].to_vec(),
        })
    }

    /// The structurally zero lower-left block.
    pub fn lower_left(&self) -> ComplexMatrix {
        self.matrix.submatrix(self.order + 1, 0, self.order, self.order + 1)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W, annulus: &Annulus) -> std::io::Result<()> {
        crate::io::write_matrix_csv(
            out,
            &self.matrix,
            &[
                ("r", annulus.inner().to_string()),
                ("R", annulus.outer().to_string()),
                ("N", self.order.to_string()),
                ("M", self.disk.samples.to_string()),
                ("block", "adjoint".to_string()),
            ],
        )
    }
}

pub fn adjoint_block_matrix(
    b: &BlaschkeProduct,
    a: &Annulus,
    order: usize,
    samples: usize,
) -> Result<AdjointBlockMatrix> {
    let disk = composition_matrix_disk(b, a, order, samples)?;
    let exterior = composition_matrix_exterior(b, a, order, samples)?;
    let mut matrix = ComplexMatrix::zeros(2 * order + 1, 2 * order + 1);
    matrix.set_block(0, 0, &disk.matrix);
    for (j, v) in exterior.plus_row().into_iter().enumerate() {
        matrix[(0, order + 1 + j)] = v;
    }
    matrix.set_block(order + 1, order + 1, &exterior.minus_block());
    Ok(AdjointBlockMatrix {
        order,
        matrix,
        disk,
        exterior,
    })
}

/// `(h1, h2)` in raw monomials: `inner[m]` multiplies `z^m`, `outer[m-1]`
/// multiplies `z^{-m}`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DualPair {
    pub inner: Vec<Complex64>,
    pub outer: Vec<Complex64>,
}

impl DualPair {
    pub fn evaluate_inner(&self, z: Complex64) -> Complex64 {
        self.inner
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn evaluate_outer(&self, z: Complex64) -> Complex64 {
        let w = z.inv();
        self.outer
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
            * w
    }
}

/// Exact residue evaluation of `l(f)` for the functional `J(h1, h2)`.
pub fn pairing_functional(pair: &DualPair, f: &LaurentVector) -> Complex64 {
    let raw = f.raw();
    let order = f.order() as i64;
    let coeff = |k: i64| {
        if k.abs() <= order {
            raw[(k + order) as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let inner: Complex64 = pair
        .inner
        .iter()
        .enumerate()
        .map(|(m, h)| h * coeff(-(m as i64) - 1))
        .sum();
    let outer: Complex64 = pair
        .outer
        .iter()
        .enumerate()
        .map(|(j, h)| h * coeff(j as i64))
        .sum();
    inner + outer
}

/// Supports of the random vectors in the adjoint identity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestSupport {
    /// `f` on modes `-N..N-1`, `h1` of degree `< N`, `h2` on `z^{-1}..z^{-N}`:
    /// both sides are computed without truncation loss.
    Consistent,
    /// `f` on all modes `-N..=N` and `h1` of degree `N`: exposes truncation.
    Full,
}

fn gaussian_unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..len)
        .map(|_| {
            Complex64::new(
                StandardNormal.sample(&mut *rng),
                StandardNormal.sample(&mut *rng),
            )
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Random unit-norm `(h1, h2, f)`; unit norm is taken in the orthonormal
/// bases `z^m / r^m`, `z^{-m} R^m` and `e_n` respectively.
fn random_triple(
    rng: &mut ChaCha8Rng,
    a: &Annulus,
    order: usize,
    support: TestSupport,
) -> Result<(DualPair, LaurentVector)> {
    let (inner_len, f_hi) = match support {
        TestSupport::Consistent => (order, order as i64 - 1),
        TestSupport::Full => (order + 1, order as i64),
    };
    let h = gaussian_unit(rng, inner_len + order);
    let inner = h[..inner_len]
        .iter()
        .enumerate()
        .map(|(m, c)| c / a.inner().powi(m as i32))
        .collect();
    let outer = h[inner_len..]
        .iter()
        .enumerate()
        .map(|(j, c)| c * a.outer().powi(j as i32 + 1))
        .collect();
    let n = order as i64;
    let g = gaussian_unit(rng, (f_hi + n + 1) as usize);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
    coeffs[..g.len()].copy_from_slice(&g);
    Ok((DualPair { inner, outer }, LaurentVector::new(*a, coeffs)?))
}

/// Residual of `l_{(h1,h2)}(L f) = l_{L'(h1,h2)}(f)` on prebuilt matrices.
pub fn adjoint_residual_for(
    transfer: &TransferMatrix,
    adjoint: &AdjointBlockMatrix,
    trials: usize,
    seed: u64,
    support: TestSupport,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (pair, f) = random_triple(&mut rng, &transfer.annulus, transfer.order, support)?;
        let lhs = pairing_functional(&pair, &transfer.apply(&f)?);
        let rhs = pairing_functional(&adjoint.apply(&pair)?, &f);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Maximum residual of the adjoint identity over `trials` seeded random triples.
pub fn adjoint_identity_residual(
    b: &BlaschkeProduct,
    a: &Annulus,
    order: usize,
    samples: usize,
    trials: usize,
    seed: u64,
    support: TestSupport,
) -> Result<f64> {
    let transfer = transfer_matrix(b, a, order, samples)?;
    let adjoint = adjoint_block_matrix(b, a, order, samples)?;
    adjoint_residual_for(&transfer, &adjoint, trials, seed, support)
}

/// `-K_z` for a probe inside the inner disk, `K_z` for a probe outside the
/// outer circle, with `K_z(w) = 1/(z - w)`, truncated to order `N`.
pub fn kernel_vector(a: &Annulus, order: usize, z: Complex64) -> Result<LaurentVector> {
    let modulus = z.norm();
    let n = order as i64;
    let mut raw = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
    if modulus <= a.inner() - PROBE_MARGIN {
        // 1/(w - z) = sum_k z^k w^{-k-1}
        for k in 0..n {
            raw[(n - k - 1) as usize] = z.powi(k as i32);
        }
    } else if modulus >= a.outer() + PROBE_MARGIN {
        // 1/(z - w) = sum_k w^k z^{-k-1}
        for k in 0..n {
            raw[(n + k) as usize] = z.powi(-(k as i32) - 1);
        }
    } else {
        let min_distance = (modulus - a.inner()).abs().min((modulus - a.outer()).abs());
        return Err(Error::ProbeTooClose { point: z, min_distance });
    }
    LaurentVector::from_raw(*a, &raw)
}

/// `max |l(+-K_z) - h(z)|` over probes, `h = h1` inside and `h2` outside.
pub fn kernel_reconstruction_error(
    pair: &DualPair,
    a: &Annulus,
    order: usize,
    probes: &[Complex64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in probes {
        let k = kernel_vector(a, order, z)?;
        let expected = if z.norm() < a.inner() {
            pair.evaluate_inner(z)
        } else {
            pair.evaluate_outer(z)
        };
        worst = worst.max((pairing_functional(pair, &k) - expected).norm());
    }
    Ok(worst)
}

/// Kernel reconstruction for a seeded random `(h1, h2)` with `h1` of
/// degree `< N` and `h2` on `z^{-1}..z^{-N}`.
pub fn kernel_reconstruction_check(
    a: &Annulus,
    order: usize,
    probes: &[Complex64],
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pair, _) = random_triple(&mut rng, a, order, TestSupport::Consistent)?;
    kernel_reconstruction_error(&pair, a, order, probes)
}
