//! Finite sections of the transfer operator
//! `(L f)(z) = sum_k phi_k'(z) f(phi_k(z))` in the basis `e_n`.
//!
//! `L z^m` is sampled at the `M`-th roots of unity, where every preimage of a
//! circle point is again on the circle, and its Laurent coefficients are read
//! off by a DFT.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::hardy::{basis_weight, Annulus, LaurentVector};
use crate::numerics::dft::{circle_points, dft_forward, mode_index, signed_mode};
use crate::numerics::roots::poly_roots;
use crate::numerics::ComplexMatrix;

pub const BRANCH_RESIDUAL_TOL: f64 = 1e-10;
/// Raw Fourier coefficients below this fraction of the sample magnitude
/// scale are cancellation round-off and are set to exactly zero.
pub const COEFF_NOISE_REL: f64 = 1e-14;
/// Column energy fraction in the high band that flags aliasing.
pub const ALIASING_TOL: f64 = 1e-10;

/// All preimages of one point under `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSet {
    pub base: Complex64,
    /// Sorted by argument in `[0, 2pi)`.
    pub preimages: Vec<Complex64>,
    /// `phi_k' = 1 / B'(w_k)`.
    pub derivatives: Vec<Complex64>,
}

pub fn inverse_branches(b: &BlaschkeProduct, z: Complex64) -> Result<BranchSet> {
    if (z.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("base point {z} is not on the unit circle")));
    }
    let found = poly_roots(&b.preimage_polynomial(z))?;
    if found.roots.len() != b.degree() {
        return Err(Error::Precondition(format!(
            "expected {} preimages of {z}, found {}",
            b.degree(),
            found.roots.len()
        )));
    }
    let mut preimages = Vec::with_capacity(found.roots.len());
    for mut w in found.roots {
        let mut residual = (b.evaluate(w)? - z).norm();
        for _ in 0..4 {
            if residual == 0.0 {
                break;
            }
            let candidate = w - (b.evaluate(w)? - z) / b.derivative(w)?;
            let next = (b.evaluate(candidate)? - z).norm();
            if next >= residual {
                break;
            }
            w = candidate;
            residual = next;
        }
        if residual > BRANCH_RESIDUAL_TOL || (w.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::BranchResidual { point: w, residual });
        }
        preimages.push(w);
    }
    preimages.sort_by(|a, b| {
        a.arg()
            .rem_euclid(std::f64::consts::TAU)
            .total_cmp(&b.arg().rem_euclid(std::f64::consts::TAU))
    });
    let derivatives = preimages
        .iter()
        .map(|&w| b.derivative(w).map(|d| d.inv()))
        .collect::<Result<_>>()?;
    Ok(BranchSet { base: z, preimages, derivatives })
}

/// `(2N+1) x (2N+1)` matrix of `L` in the basis `e_{-N}, .., e_N`; entry
/// `(n + N, m + N)` is `L_{n,m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub annulus: Annulus,
    pub order: usize,
    pub samples: usize,
    pub matrix: ComplexMatrix,
    /// Columns whose high-frequency energy exceeded the aliasing tolerance.
    pub aliased_columns: Vec<i64>,
}

impl TransferMatrix {
    pub fn entry(&self, n: i64, m: i64) -> Complex64 {
        let o = self.order as i64;
        self.matrix[((n + o) as usize, (m + o) as usize)]
    }

    pub fn apply(&self, v: &LaurentVector) -> Result<LaurentVector> {
        if v.order() != self.order {
            return Err(Error::Precondition(format!(
                "vector order {} does not match matrix order {}",
                v.order(),
                self.order
            )));
        }
        LaurentVector::new(self.annulus, self.matrix.mul_vec(v.coeffs()))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Least-squares fit `|L_{n,m}| <= C rho^{|n|}` to the row maxima above the
    /// noise floor; returns `(C, rho)`, or `None` with fewer than two such rows.
    pub fn fitted_row_decay(&self) -> Option<(f64, f64)> {
        let o = self.order as i64;
        let mut profile = vec![0.0f64; self.order + 1];
        for n in -o..=o {
            let row_max = (-o..=o).map(|m| self.entry(n, m).norm()).fold(0.0, f64::max);
            let k = n.unsigned_abs() as usize;
            profile[k] = profile[k].max(row_max);
        }
        let points: Vec<(f64, f64)> = profile
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 1e-13)
            .map(|(k, v)| (k as f64, v.ln()))
            .collect();
        let (slope, intercept, _) = linear_fit(&points)?;
        Some((intercept.exp(), slope.exp()))
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        crate::io::write_matrix_csv(
            out,
            &self.matrix,
            &[
                ("r", self.annulus.inner().to_string()),
                ("R", self.annulus.outer().to_string()),
                ("N", self.order.to_string()),
                ("M", self.samples.to_string()),
            ],
        )
    }
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, r_squared)`.
pub(crate) fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, my - slope * mx, r2))
}

/// Default sample count `4 (2N + 1)`.
pub fn default_samples(order: usize) -> usize {
    4 * (2 * order + 1)
}

/// DFT of a sampled column with round-off suppression and the aliasing
/// sentinel; returns raw coefficients in DFT slot order and the flag.
pub(crate) fn clean_coefficients(samples: &[Complex64], scale: f64) -> (Vec<Complex64>, bool) {
    let m = samples.len();
    let mut hat = dft_forward(samples);
    let floor = COEFF_NOISE_REL * scale;
    for c in hat.iter_mut() {
        if c.norm() < floor {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let total: f64 = hat.iter().map(|c| c.norm_sqr()).sum();
    let high: f64 = hat
        .iter()
        .enumerate()
        .filter(|(k, _)| signed_mode(*k, m).unsigned_abs() as usize > m / 4)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    (hat, total > 0.0 && high > ALIASING_TOL * total)
}

pub fn transfer_matrix(
    b: &BlaschkeProduct,
    annulus: &Annulus,
    order: usize,
    samples: usize,
) -> Result<TransferMatrix> {
    if samples < default_samples(order) {
        return Err(Error::Precondition(format!(
            "M = {samples} is below 4(2N+1) = {}",
            default_samples(order)
        )));
    }
    let report = b.expansivity_check(1024)?;
    if !report.expanding {
        return Err(Error::NotExpanding {
            min_derivative_modulus: report.min_derivative_modulus,
        });
    }

    let branches: Vec<BranchSet> = circle_points(samples, 1.0)
        .into_par_iter()
        .map(|z| inverse_branches(b, z))
        .collect::<Result<_>>()?;
    // All |phi_k| = 1, so |phi_k' phi_k^m| summed over k does not depend on m.
    let scale = branches
        .iter()
        .map(|s| s.derivatives.iter().map(|d| d.norm()).sum::<f64>())
        .fold(0.0, f64::max);

    let o = order as i64;
    let columns: Vec<(Vec<Complex64>, bool)> = (-o..=o)
        .into_par_iter()
        .map(|m| {
            let values: Vec<Complex64> = branches
                .iter()
                .map(|s| {
                    s.preimages
                        .iter()
                        .zip(&s.derivatives)
                        .map(|(w, d)| d * w.powi(m as i32))
                        .sum()
                })
                .collect();
            let (hat, aliased) = clean_coefficients(&values, scale);
            let dm = basis_weight(m, annulus);
            let col = (-o..=o)
                .map(|n| hat[mode_index(n, samples)] * (basis_weight(n, annulus) / dm))
                .collect();
            (col, aliased)
        })
        .collect();

    let aliased_columns = columns
        .iter()
        .zip(-o..=o)
        .filter(|((_, a), _)| *a)
        .map(|(_, m)| m)
        .collect();
    let cols: Vec<Vec<Complex64>> = columns.into_iter().map(|(c, _)| c).collect();
    Ok(TransferMatrix {
        annulus: *annulus,
        order,
        samples,
        matrix: ComplexMatrix::from_columns(&cols),
        aliased_columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eig_dense;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn contains(set: &[Complex64], z: Complex64, tol: f64) -> bool {
        set.iter().any(|w| (w - z).norm() < tol)
    }

    fn square() -> BlaschkeProduct {
        BlaschkeProduct::power(2).unwrap()
    }

    fn half() -> BlaschkeProduct {
        BlaschkeProduct::mu_family(c(0.5, 0.0)).unwrap()
    }

    #[test]
    fn branches_of_z_squared() {
        let s = inverse_branches(&square(), c(1.0, 0.0)).unwrap();
        assert_eq!(s.preimages.len(), 2);
        assert!((s.preimages[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s.preimages[1] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((s.derivatives[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((s.derivatives[1] - c(-0.5, 0.0)).norm() < 1e-15);

        let s = inverse_branches(&square(), c(-1.0, 0.0)).unwrap();
        assert!(contains(&s.preimages, c(0.0, 1.0), 1e-15));
        assert!(contains(&s.preimages, c(0.0, -1.0), 1e-15));
    }

    #[test]
    fn branches_of_mu_half() {
        let b = half();
        let s = inverse_branches(&b, c(-1.0, 0.0)).unwrap();
        assert!(contains(&s.preimages, c(1.0, 0.0), 1e-14));
        assert!(contains(&s.preimages, c(-1.0, 0.0), 1e-14));
        for w in &s.preimages {
            assert!((b.evaluate(*w).unwrap() - c(-1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn z_squared_branch_identity() {
        for j in 0..64 {
            let z = Complex64::from_polar(1.0, TAU * j as f64 / 64.0);
            let s = inverse_branches(&square(), z).unwrap();
            let total: Complex64 = s.preimages.iter().zip(&s.derivatives).map(|(w, d)| w * d).sum();
            assert!((total - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn off_circle_base_is_rejected() {
        assert!(inverse_branches(&square(), c(0.5, 0.0)).is_err());
    }

    /// `L z^m` for `B = z^2`: `z^{(m-1)/2}` for odd `m`, zero for even `m`.
    fn square_oracle(n: i64, m: i64) -> f64 {
        if m.rem_euclid(2) == 1 && n == (m - 1).div_euclid(2) {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn z_squared_matrix_closed_form() {
        let a = Annulus::new(0.5, 2.0).unwrap();
        let order = 10;
        let t = transfer_matrix(&square(), &a, order, default_samples(order)).unwrap();
        let o = order as i64;
        for m in -o..=o {
            for n in -o..=o {
                let expected = square_oracle(n, m) * basis_weight(n, &a) / basis_weight(m, &a);
                assert!((t.entry(n, m) - expected).norm() < 1e-13, "({n},{m})");
            }
        }
        assert!(t.entry(0, 0).norm() == 0.0);
        assert!((t.entry(0, 1) - basis_weight(0, &a) / basis_weight(1, &a)).norm() < 1e-15);
        assert!((t.entry(-1, -1) - 1.0).norm() < 1e-14);
        assert!(t.aliased_columns.is_empty());
    }

    #[test]
    fn z_squared_trace_is_one() {
        let a = Annulus::new(0.5, 2.0).unwrap();
        for order in [1, 2, 5, 16] {
            let t = transfer_matrix(&square(), &a, order, default_samples(order)).unwrap();
            assert!((t.trace() - 1.0).norm() < 1e-13, "N={order}");
        }
    }

    #[test]
    fn z_squared_eigenvector() {
        let a = Annulus::new(0.5, 2.0).unwrap();
        let t = transfer_matrix(&square(), &a, 8, default_samples(8)).unwrap();
        let v = LaurentVector::basis(a, 8, -1);
        let image = t.apply(&v).unwrap();
        for (x, y) in image.coeffs().iter().zip(v.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn mu_half_leading_eigenvalues() {
        let b = half();
        let a = Annulus::symmetric(0.75).unwrap();
        let t = transfer_matrix(&b, &a, 16, default_samples(16)).unwrap();
        let mut ev = eig_dense(&t.matrix).unwrap();
        ev.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        let expected = [1.0, 0.5, 0.5, 0.25, 0.25];
        for (e, x) in ev.iter().zip(expected) {
            assert!((e - x).norm() < 1e-6, "{e} vs {x}");
        }
    }

    #[test]
    fn rejects_undersampling() {
        let a = Annulus::new(0.5, 2.0).unwrap();
        assert!(transfer_matrix(&square(), &a, 4, 35).is_err());
    }

    #[test]
    fn column_decay_rate() {
        let b = half();
        let a = Annulus::symmetric(0.75).unwrap();
        let t = transfer_matrix(&b, &a, 16, default_samples(16)).unwrap();
        let (_, rho) = t.fitted_row_decay().unwrap();
        assert!(rho < 1.0);
        assert!(rho <= a.inner().max(1.0 / a.outer()) + 0.1, "rho = {rho}");
    }

    #[test]
    fn doubling_samples_is_stable() {
        let b = BlaschkeProduct::mu_family(c(0.3, 0.2)).unwrap();
        let a = Annulus::symmetric(0.75).unwrap();
        let t1 = transfer_matrix(&b, &a, 12, default_samples(12)).unwrap();
        let t2 = transfer_matrix(&b, &a, 12, 2 * default_samples(12)).unwrap();
        for (x, y) in t1.matrix.as_slice().iter().zip(t2.matrix.as_slice()) {
            assert!((x - y).norm() <= 1e-11);
        }
    }

    #[test]
    fn csv_header() {
        let a = Annulus::new(0.5, 2.0).unwrap();
        let t = transfer_matrix(&square(), &a, 1, default_samples(1)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# r=0.5,R=2,N=1,M=12");
        assert_eq!(lines.count(), 3);
    }

    fn arb_expanding() -> impl Strategy<Value = BlaschkeProduct> {
        (prop::collection::vec((0.0f64..0.6, 0.0f64..TAU), 1..3), 0.0f64..TAU).prop_map(
            |(zs, phase)| {
                let mut zeros = vec![c(0.0, 0.0)];
                zeros.extend(zs.iter().map(|&(r, t)| Complex64::from_polar(r, t)));
                BlaschkeProduct::new(zeros, Complex64::from_polar(1.0, phase)).unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // Branch sums against an independent contour integral:
        // sum_k phi_k' phi_k^m = (1/2 pi i) \oint_{|w|=2} w^m D(w) / (N(w) - z D(w)) dw,
        // the integrand being holomorphic outside the unit circle.
        #[test]
        fn branch_sums_match_contour_integral(b in arb_expanding(), theta in 0.0f64..TAU) {
            let z = Complex64::from_polar(1.0, theta);
            let s = inverse_branches(&b, z).unwrap();
            prop_assert_eq!(s.preimages.len(), b.degree());
            for w in &s.preimages {
                prop_assert!((w.norm() - 1.0).abs() <= 1e-9);
                prop_assert!((b.evaluate(*w).unwrap() - s.base).norm() <= 1e-10);
            }
            let num = b.preimage_polynomial(z);
            let den = b.denominator();
            let pts = circle_points(2048, 2.0);
            for m in 0..4 {
                let integral: Complex64 = pts
                    .iter()
                    .map(|&w| {
                        crate::numerics::roots::horner(&den, w) * w.powi(m + 1)
                            / crate::numerics::roots::horner(&num, w)
                    })
                    .sum::<Complex64>()
                    / pts.len() as f64;
                let total: Complex64 = s
                    .preimages
                    .iter()
                    .zip(&s.derivatives)
                    .map(|(w, d)| d * w.powi(m))
                    .sum();
                prop_assert!((total - integral).norm() <= 1e-10, "m={} {} vs {}", m, total, integral);
            }
        }

        #[test]
        fn aliasing_stability(b in arb_expanding()) {
            let a = match crate::hardy::admissible_annulus(&b, 1024) {
                Ok(a) => a,
                Err(_) => return Ok(()),
            };
            let order = 8;
            let t1 = transfer_matrix(&b, &a, order, default_samples(order)).unwrap();
            let t2 = transfer_matrix(&b, &a, order, 2 * default_samples(order)).unwrap();
            let scale = t1.matrix.frobenius_norm().max(1.0);
            for (x, y) in t1.matrix.as_slice().iter().zip(t2.matrix.as_slice()) {
                prop_assert!((x - y).norm() <= 1e-11 * scale);
            }
        }
    }
}
