//! Finite Blaschke products, their fixed points and the predicted transfer
//! operator spectrum.
//!
//! A finite Blaschke product of degree `n >= 2` is
//!
//! ```text
//! B(z) = C * prod_i (z - a_i) / (1 - conj(a_i) z),   |a_i| < 1, |C| = 1.
//! ```
//!
//! It maps the unit circle onto itself, the disk onto the disk and the
//! exterior onto the exterior. When `|B'| > 1` on the circle there is exactly
//! one attracting fixed point `z0` in the disk, its mirror `1/conj(z0)`
//! outside, and `n - 1` repelling fixed points on the circle.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots::{horner, poly_mul, poly_roots};

/// Relative distance to a pole below which evaluation is refused.
pub const POLE_TOL: f64 = 1e-14;
/// Distance to a zero below which the derivative switches to the product rule.
pub const ZERO_PROXIMITY: f64 = 1e-6;
/// `|z0|` below which the exterior fixed point is taken to be infinity.
pub const ORIGIN_TOL: f64 = 1e-12;
/// Accepted deviation of `|C|` from one before renormalization.
const CONSTANT_MODULUS_TOL: f64 = 1e-6;

const PLAIN_ITERATION_CAP: usize = 100_000;
const NEWTON_CAP: usize = 50;
const CIRCLE_TOL: f64 = 1e-8;
const DEFAULT_EXPANSIVITY_SAMPLES: usize = 4096;

#[derive(Serialize, Deserialize)]
struct RawBlaschke {
    zeros: Vec<Complex64>,
    constant: Complex64,
}

/// A finite Blaschke product with at least two zeros, all inside the unit disk.
///
/// Serializes as `{"zeros": [[re, im], ...], "constant": [re, im]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlaschke", into = "RawBlaschke")]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    constant: Complex64,
}

impl TryFrom<RawBlaschke> for BlaschkeProduct {
    type Error = Error;

    fn try_from(raw: RawBlaschke) -> Result<Self> {
        Self::new(raw.zeros, raw.constant)
    }
}

impl From<BlaschkeProduct> for RawBlaschke {
    fn from(b: BlaschkeProduct) -> Self {
        RawBlaschke {
            zeros: b.zeros,
            constant: b.constant,
        }
    }
}

/// Result of probing `|B'|` on the unit circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansivityReport {
    /// `sum_i (1 - |a_i|) / (1 + |a_i|) - 1`; positive is a sufficient
    /// certificate of expansion.
    pub sum_margin: f64,
    /// Refined minimum of `|B'(e^{i theta})|`.
    pub min_derivative_modulus: f64,
    /// Angle at which the minimum is attained.
    pub argmin_angle: f64,
    /// Decided by `min_derivative_modulus > 1`.
    pub expanding: bool,
}

/// Fixed point structure of an expanding Blaschke product.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub interior_point: Complex64,
    pub interior_multiplier: Complex64,
    /// `None` when the exterior fixed point is infinity.
    pub exterior_point: Option<Complex64>,
    pub exterior_multiplier: Complex64,
    /// Repelling fixed points on the circle with their multipliers, sorted by
    /// argument.
    pub circle_points: Vec<(Complex64, Complex64)>,
}

/// Truncated multiset `{lambda^n : n >= 0} + {conj(lambda)^n : n >= 1} + {0}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedSpectrum {
    /// Entries in non-increasing modulus, repeated by multiplicity.
    pub entries: Vec<Complex64>,
    /// Multiplier of the attracting fixed point in the disk.
    pub multiplier: Complex64,
    /// How many trailing zeros were appended to reach the requested count.
    /// They stand for the accumulation point 0, not for computed multiplicity.
    pub zero_fill: usize,
}

impl PredictedSpectrum {
    /// Builds the truncated prediction for a given multiplier.
    ///
    /// Entries of equal modulus (`lambda^n` and `conj(lambda)^n`) are never
    /// split, so the result may hold one more entry than `count`.
    pub fn from_multiplier(multiplier: Complex64, count: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let mut entries = vec![one];
        let mut power = one;
        while entries.len() < count {
            power *= multiplier;
            if power.norm() < 1e-300 {
                break;
            }
            entries.push(power);
            entries.push(power.conj());
        }
        let zero_fill = count.saturating_sub(entries.len());
        entries.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(zero_fill));
        Self {
            entries,
            multiplier,
            zero_fill,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct values with their multiplicities, in order of appearance.
    pub fn grouped(&self) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for &e in &self.entries {
            match out.iter_mut().find(|(v, _)| *v == e) {
                Some((_, k)) => *k += 1,
                None => out.push((e, 1)),
            }
        }
        out
    }

    /// `sum` of the full (untruncated) multiset: `1/(1-l) + conj(l)/(1-conj(l))`.
    pub fn trace(&self) -> Complex64 {
        let l = self.multiplier;
        let one = Complex64::new(1.0, 0.0);
        one / (one - l) + l.conj() / (one - l.conj())
    }
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>, constant: Complex64) -> Result<Self> {
        if zeros.len() < 2 {
            return Err(Error::InvalidBlaschke(format!(
                "need at least two zeros, got {}",
                zeros.len()
            )));
        }
        if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::InvalidBlaschke(format!(
                "zero {a} is not inside the unit disk"
            )));
        }
        let modulus = constant.norm();
        if !modulus.is_finite() || (modulus - 1.0).abs() > CONSTANT_MODULUS_TOL {
            return Err(Error::InvalidBlaschke(format!(
                "constant {constant} must have modulus 1"
            )));
        }
        Ok(Self {
            zeros,
            constant: constant / modulus,
        })
    }

    /// `B(z) = z^n`.
    pub fn power(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n], Complex64::new(1.0, 0.0))
    }

    /// `B(z) = z (mu - z) / (1 - conj(mu) z)`, i.e. zeros `{0, mu}` and `C = -1`.
    pub fn mu_family(mu: Complex64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0), mu], Complex64::new(-1.0, 0.0))
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn max_zero_modulus(&self) -> f64 {
        self.zeros.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    fn check_pole(&self, z: Complex64) -> Result<()> {
        for &a in &self.zeros {
            let az = a.conj() * z;
            if (Complex64::new(1.0, 0.0) - az).norm() <= POLE_TOL * (1.0 + az.norm()) {
                return Err(Error::NearPole { point: z, zero: a });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self.eval_unchecked(z))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        self.zeros
            .iter()
            .fold(self.constant, |acc, &a| acc * (z - a) / (one - a.conj() * z))
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self.derivative_unchecked(z))
    }

    pub(crate) fn derivative_unchecked(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let near_zero = self
            .zeros
            .iter()
            .any(|&a| (z - a).norm() < ZERO_PROXIMITY);
        if near_zero {
            // Product rule: d/dz (z - a)/(1 - conj(a) z) = (1 - |a|^2)/(1 - conj(a) z)^2.
            let factors: Vec<Complex64> = self
                .zeros
                .iter()
                .map(|&a| (z - a) / (one - a.conj() * z))
                .collect();
            let mut total = Complex64::new(0.0, 0.0);
            for (i, &a) in self.zeros.iter().enumerate() {
                let den = one - a.conj() * z;
                let mut term = Complex64::new(1.0 - a.norm_sqr(), 0.0) / (den * den);
                for (j, f) in factors.iter().enumerate() {
                    if j != i {
                        term *= f;
                    }
                }
                total += term;
            }
            self.constant * total
        } else {
            let log_derivative: Complex64 = self
                .zeros
                .iter()
                .map(|&a| (z - a).inv() + a.conj() / (one - a.conj() * z))
                .sum();
            self.eval_unchecked(z) * log_derivative
        }
    }

    /// `|B'(e^{i theta})| = sum_i (1 - |a_i|^2) / |e^{i theta} - a_i|^2`.
    ///
    /// This closed form holds only on the unit circle.
    pub fn circle_derivative_modulus(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        self.zeros
            .iter()
            .map(|&a| (1.0 - a.norm_sqr()) / (z - a).norm_sqr())
            .sum()
    }

    /// Numerator `C prod (z - a_i)`, low-to-high.
    pub fn numerator(&self) -> Vec<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        self.zeros
            .iter()
            .fold(vec![self.constant], |acc, &a| poly_mul(&acc, &[-a, one]))
    }

    /// Denominator `prod (1 - conj(a_i) z)`, low-to-high.
    pub fn denominator(&self) -> Vec<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        self.zeros
            .iter()
            .fold(vec![one], |acc, &a| poly_mul(&acc, &[one, -a.conj()]))
    }

    /// Polynomial whose roots are the solutions `w` of `B(w) = z`.
    pub fn preimage_polynomial(&self, z: Complex64) -> Vec<Complex64> {
        let mut p = self.numerator();
        for (pk, dk) in p.iter_mut().zip(self.denominator()) {
            *pk -= z * dk;
        }
        p
    }

    /// Polynomial `C prod (z - a_i) - z prod (1 - conj(a_i) z)` of degree
    /// `n + 1` whose roots are the finite fixed points.
    pub fn fixed_point_polynomial(&self) -> Vec<Complex64> {
        let mut p = self.numerator();
        p.push(Complex64::new(0.0, 0.0));
        for (k, dk) in self.denominator().into_iter().enumerate() {
            p[k + 1] -= dk;
        }
        p
    }

    /// The map `g(w) = 1 / B(1/w)`, which is again a Blaschke product with
    /// zeros `conj(a_i)` and constant `conj(C)`. It expresses `B` near infinity.
    pub fn conjugate_at_infinity(&self) -> BlaschkeProduct {
        BlaschkeProduct {
            zeros: self.zeros.iter().map(|a| a.conj()).collect(),
            constant: self.constant.conj(),
        }
    }

    /// `B(infinity)`, or `None` when infinity is fixed (some `a_i = 0`).
    pub fn value_at_infinity(&self) -> Option<Complex64> {
        let g0 = self.conjugate_at_infinity().eval_unchecked(Complex64::new(0.0, 0.0));
        if g0 == Complex64::new(0.0, 0.0) {
            None
        } else {
            Some(g0.inv())
        }
    }

    pub fn expansivity_check(&self, samples: usize) -> Result<ExpansivityReport> {
        if samples < 256 {
            return Err(Error::Precondition(format!(
                "expansivity check needs at least 256 samples, got {samples}"
            )));
        }
        let sum_margin = self
            .zeros
            .iter()
            .map(|a| (1.0 - a.norm()) / (1.0 + a.norm()))
            .sum::<f64>()
            - 1.0;

        let f = |theta: f64| self.derivative_unchecked(Complex64::from_polar(1.0, theta)).norm();
        let step = TAU / samples as f64;
        let (j_min, _) = (0..samples)
            .map(|j| (j, f(j as f64 * step)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        let center = j_min as f64 * step;
        let (argmin_angle, min_derivative_modulus) = golden_section(f, center - step, center + step);

        Ok(ExpansivityReport {
            sum_margin,
            min_derivative_modulus,
            argmin_angle: argmin_angle.rem_euclid(TAU),
            expanding: min_derivative_modulus > 1.0,
        })
    }

    fn require_expanding(&self) -> Result<()> {
        let report = self.expansivity_check(DEFAULT_EXPANSIVITY_SAMPLES)?;
        if report.expanding {
            Ok(())
        } else {
            Err(Error::NotExpanding {
                min_derivative_modulus: report.min_derivative_modulus,
            })
        }
    }

    pub fn fixed_points(&self) -> Result<FixedPointReport> {
        self.require_expanding()?;
        let one = Complex64::new(1.0, 0.0);

        let mut z = Complex64::new(0.0, 0.0);
        for _ in 0..PLAIN_ITERATION_CAP {
            let next = self.eval_unchecked(z);
            let delta = (next - z).norm();
            z = next;
            if delta < 1e-14 {
                break;
            }
        }
        for _ in 0..NEWTON_CAP {
            let residual = self.eval_unchecked(z) - z;
            if residual.norm() == 0.0 {
                break;
            }
            let step = residual / (self.derivative_unchecked(z) - one);
            z -= step;
            if step.norm() <= 1e-16 * z.norm().max(1e-300) {
                break;
            }
        }
        let residual = (self.eval_unchecked(z) - z).norm();
        if !(z.norm() < 1.0) || !(residual <= 1e-12) {
            return Err(Error::FixedPointFailure(format!(
                "interior iteration ended at {z} with residual {residual:e}"
            )));
        }
        let interior_point = z;
        let interior_multiplier = self.derivative_unchecked(z);

        let (exterior_point, exterior_multiplier) = if z.norm() < ORIGIN_TOL {
            let g = self.conjugate_at_infinity();
            (None, g.derivative_unchecked(Complex64::new(0.0, 0.0)))
        } else {
            let zhat = z.conj().inv();
            (Some(zhat), self.derivative(zhat)?)
        };
        if (exterior_multiplier - interior_multiplier.conj()).norm() > 1e-9 {
            return Err(Error::FixedPointFailure(format!(
                "exterior multiplier {exterior_multiplier} is not the conjugate of {interior_multiplier}"
            )));
        }

        let roots = poly_roots(&self.fixed_point_polynomial())?;
        let mut circle_points: Vec<(Complex64, Complex64)> = roots
            .roots
            .into_iter()
            .filter(|p| (p.norm() - 1.0).abs() <= CIRCLE_TOL)
            .filter(|p| (p - interior_point).norm() > CIRCLE_TOL)
            .filter(|p| exterior_point.map_or(true, |e| (p - e).norm() > CIRCLE_TOL))
            .map(|mut p| {
                for _ in 0..3 {
                    let r = self.eval_unchecked(p) - p;
                    let d = self.derivative_unchecked(p) - one;
                    if r.norm() == 0.0 || d.norm() == 0.0 {
                        break;
                    }
                    p -= r / d;
                }
                (p, self.derivative_unchecked(p))
            })
            .collect();
        circle_points.sort_by(|a, b| {
            a.0.arg()
                .rem_euclid(TAU)
                .partial_cmp(&b.0.arg().rem_euclid(TAU))
                .unwrap()
        });
        if circle_points.len() != self.degree() - 1 {
            return Err(Error::CircleFixedPointCount {
                expected: self.degree() - 1,
                found: circle_points.len(),
            });
        }

        Ok(FixedPointReport {
            interior_point,
            interior_multiplier,
            exterior_point,
            exterior_multiplier,
            circle_points,
        })
    }

    /// Predicted spectrum, truncated to the `count` largest-modulus entries.
    pub fn closed_form_spectrum(&self, count: usize) -> Result<PredictedSpectrum> {
        if count == 0 {
            return Err(Error::Precondition("count must be at least 1".into()));
        }
        let fp = self.fixed_points()?;
        Ok(PredictedSpectrum::from_multiplier(fp.interior_multiplier, count))
    }

    /// Evaluates a polynomial in the coefficients of this product; used for
    /// residual checks.
    pub fn preimage_residual(&self, w: Complex64, z: Complex64) -> f64 {
        horner(&self.preimage_polynomial(z), w).norm()
    }
}

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn half() -> BlaschkeProduct {
        BlaschkeProduct::mu_family(c(0.5, 0.0)).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(BlaschkeProduct::new(vec![c(0.0, 0.0)], c(1.0, 0.0)).is_err());
        assert!(BlaschkeProduct::new(vec![c(0.0, 0.0), c(1.0, 0.0)], c(1.0, 0.0)).is_err());
        assert!(BlaschkeProduct::new(vec![c(0.0, 0.0), c(0.5, 0.0)], c(2.0, 0.0)).is_err());
        let b = BlaschkeProduct::new(vec![c(0.0, 0.0); 2], c(0.6, 0.8 + 1e-9)).unwrap();
        assert!((b.constant().norm() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn evaluate_examples() {
        let sq = BlaschkeProduct::power(2).unwrap();
        assert!((sq.evaluate(c(0.0, 1.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((half().evaluate(c(1.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        match half().evaluate(c(2.0, 0.0)) {
            Err(Error::NearPole { zero, .. }) => assert_eq!(zero, c(0.5, 0.0)),
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn derivative_examples() {
        let sq = BlaschkeProduct::power(2).unwrap();
        assert!((sq.derivative(c(0.0, 1.0)).unwrap() - c(0.0, 2.0)).norm() < 1e-14);
        assert!((half().derivative(c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        // z = 0 is a zero of z^2: exercises the product-rule branch.
        assert_eq!(sq.derivative(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(half().derivative(c(2.0, 0.0)).is_err());
    }

    #[test]
    fn derivative_branches_agree() {
        let b = BlaschkeProduct::new(vec![c(0.1, 0.2), c(-0.3, 0.05), c(0.0, -0.6)], c(0.0, 1.0))
            .unwrap();
        let z = c(0.1 + 2e-6, 0.2);
        let near = c(0.1 + 5e-7, 0.2);
        // Log-derivative just outside the threshold, product rule just inside.
        let far = b.derivative(z).unwrap();
        let close = b.derivative(near).unwrap();
        assert!((far - close).norm() < 1e-5 * far.norm());
    }

    #[test]
    fn expansivity_examples() {
        let sq = BlaschkeProduct::power(2).unwrap().expansivity_check(256).unwrap();
        assert!((sq.sum_margin - 1.0).abs() < 1e-15);
        assert!((sq.min_derivative_modulus - 2.0).abs() < 1e-12);
        assert!(sq.expanding);

        let b = BlaschkeProduct::new(vec![c(0.0, 0.0), c(0.9, 0.0)], c(1.0, 0.0)).unwrap();
        assert!((b.expansivity_check(256).unwrap().sum_margin - 1.0 / 19.0).abs() < 1e-15);

        assert!(BlaschkeProduct::power(2).unwrap().expansivity_check(100).is_err());
    }

    #[test]
    fn non_expanding_fixture() {
        let b = BlaschkeProduct::new(vec![c(0.99, 0.0), c(0.99, 0.0)], c(1.0, 0.0)).unwrap();
        let report = b.expansivity_check(1024).unwrap();
        assert!(report.sum_margin < 0.0);
        // Dense-sampling oracle of the circle formula.
        let dense = (0..200_000)
            .map(|j| b.circle_derivative_modulus(TAU * j as f64 / 200_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(dense < 1.0);
        assert!((report.min_derivative_modulus - dense).abs() < 1e-9);
        assert!(!report.expanding);
        assert!(matches!(b.fixed_points(), Err(Error::NotExpanding { .. })));
    }

    #[test]
    fn zero_at_origin_is_always_expanding() {
        // |B'| = 1 + sum over the other zeros on the circle.
        let b = BlaschkeProduct::new(vec![c(0.0, 0.0), c(0.99, 0.0), c(0.99, 0.0)], c(1.0, 0.0))
            .unwrap();
        let report = b.expansivity_check(1024).unwrap();
        assert!(report.sum_margin > 0.0);
        assert!(report.expanding);
    }

    #[test]
    fn fixed_points_of_z_squared() {
        let fp = BlaschkeProduct::power(2).unwrap().fixed_points().unwrap();
        assert_eq!(fp.interior_point, c(0.0, 0.0));
        assert_eq!(fp.interior_multiplier, c(0.0, 0.0));
        assert_eq!(fp.exterior_point, None);
        assert_eq!(fp.circle_points.len(), 1);
        let (p, m) = fp.circle_points[0];
        assert!((p - c(1.0, 0.0)).norm() < 1e-14);
        assert!((m - c(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn fixed_points_of_mu_half() {
        let b = half();
        let fp = b.fixed_points().unwrap();
        assert!(fp.interior_point.norm() < 1e-15);
        assert!((fp.interior_multiplier - c(0.5, 0.0)).norm() < 1e-15);
        assert!((fp.exterior_multiplier - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(fp.circle_points.len(), 1);
        let (p, m) = fp.circle_points[0];
        // z(0.5 - z) = z (1 - 0.5 z) reduces to z^2 = 1 minus the origin; z = 1 maps to -1.
        assert!((p - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((m - b.derivative(c(-1.0, 0.0)).unwrap()).norm() < 1e-12);
        assert!(m.norm() > 1.0);
    }

    #[test]
    fn fixed_points_of_cubic_example() {
        let b = BlaschkeProduct::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)], c(1.0, 0.0))
            .unwrap();
        let fp = b.fixed_points().unwrap();
        assert_eq!(fp.interior_point, c(0.0, 0.0));
        assert_eq!(fp.interior_multiplier, c(0.0, 0.0));
        assert_eq!(fp.circle_points.len(), 2);
        assert!(fp.circle_points.iter().all(|(_, m)| m.norm() > 1.0));
    }

    #[test]
    fn fixed_points_off_origin() {
        // No zero at the origin, so z0 != 0 and the exterior point is finite.
        let b = BlaschkeProduct::new(vec![c(0.2, 0.1), c(-0.1, 0.3)], c(0.0, 1.0)).unwrap();
        let fp = b.fixed_points().unwrap();
        assert!(fp.interior_point.norm() > 1e-3);
        let zhat = fp.exterior_point.unwrap();
        assert!((zhat - fp.interior_point.conj().inv()).norm() < 1e-12);
        assert!((b.evaluate(zhat).unwrap() - zhat).norm() < 1e-10);
        assert!((fp.exterior_multiplier - fp.interior_multiplier.conj()).norm() < 1e-9);
        assert_eq!(fp.circle_points.len(), 1);
    }

    #[test]
    fn value_at_infinity() {
        assert_eq!(half().value_at_infinity(), None);
        let b = BlaschkeProduct::new(vec![c(0.3, 0.0), c(-0.3, 0.0)], c(1.0, 0.0)).unwrap();
        let inf = b.value_at_infinity().unwrap();
        // C prod(-1/conj(a)) = 1 / (0.3 * -0.3)... times signs: (-1/0.3)(1/0.3).
        assert!((inf - c(-1.0 / 0.09, 0.0)).norm() < 1e-12);
        let far = b.evaluate(c(1e6, 0.0)).unwrap();
        assert!((far - inf).norm() < 1e-4 * inf.norm());
    }

    #[test]
    fn predicted_spectrum_examples() {
        let sq = BlaschkeProduct::power(2).unwrap().closed_form_spectrum(3).unwrap();
        assert_eq!(sq.entries, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(sq.zero_fill, 2);

        let h = half().closed_form_spectrum(5).unwrap();
        assert_eq!(
            h.entries,
            vec![c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.25, 0.0), c(0.25, 0.0)]
        );
        assert_eq!(h.grouped(), vec![(c(1.0, 0.0), 1), (c(0.5, 0.0), 2), (c(0.25, 0.0), 2)]);

        let mu = c(0.3, 0.2);
        let p = BlaschkeProduct::mu_family(mu).unwrap().closed_form_spectrum(5).unwrap();
        let expected = [c(1.0, 0.0), mu, mu.conj(), mu * mu, (mu * mu).conj()];
        assert_eq!(p.len(), 5);
        for (a, b) in p.entries.iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn predicted_spectrum_keeps_ties() {
        let p = PredictedSpectrum::from_multiplier(c(0.5, 0.0), 4);
        assert_eq!(p.len(), 5);
        assert_eq!(p.zero_fill, 0);
    }

    #[test]
    fn predicted_trace() {
        let p = PredictedSpectrum::from_multiplier(c(0.5, 0.0), 1);
        assert!((p.trace() - c(3.0, 0.0)).norm() < 1e-15);
        // Brute-force: sum the multiset to 200 terms.
        let mu = c(0.3, 0.2);
        let brute: Complex64 = PredictedSpectrum::from_multiplier(mu, 200).entries.iter().sum();
        assert!((PredictedSpectrum::from_multiplier(mu, 1).trace() - brute).norm() < 1e-14);
    }

    #[test]
    fn json_form() {
        let b = half();
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, r#"{"zeros":[[0.0,0.0],[0.5,0.0]],"constant":[-1.0,0.0]}"#);
        let back: BlaschkeProduct = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<BlaschkeProduct>(r#"{"zeros":[[1.5,0]],"constant":[1,0]}"#).is_err());
    }

    fn arb_expanding() -> impl Strategy<Value = BlaschkeProduct> {
        // A zero at the origin plus up to three others guarantees expansion.
        prop::collection::vec((0.0f64..0.8, 0.0f64..TAU), 1..4).prop_flat_map(|zs| {
            (Just(zs), 0.0f64..TAU).prop_map(|(zs, phase)| {
                let mut zeros = vec![c(0.0, 0.0)];
                zeros.extend(zs.iter().map(|&(r, t)| Complex64::from_polar(r, t)));
                BlaschkeProduct::new(zeros, Complex64::from_polar(1.0, phase)).unwrap()
            })
        })
    }

    fn arb_general() -> impl Strategy<Value = BlaschkeProduct> {
        prop::collection::vec((0.0f64..0.7, 0.0f64..TAU), 2..5).prop_map(|zs| {
            BlaschkeProduct::new(
                zs.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect(),
                c(1.0, 0.0),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn circle_maps_to_circle(b in arb_expanding(), seed in 0u64..1000) {
            for j in 0..1024 {
                let theta = TAU * (j as f64 + (seed as f64) / 1000.0) / 1024.0;
                let w = b.evaluate(Complex64::from_polar(1.0, theta)).unwrap();
                prop_assert!((w.norm() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn derivative_matches_finite_difference(
            b in arb_general(),
            pts in prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 100),
        ) {
            let h = 1e-6;
            for (x, y) in pts {
                let z = c(x, y);
                let (Ok(d), Ok(p), Ok(m)) = (
                    b.derivative(z),
                    b.evaluate(z + h),
                    b.evaluate(z - h),
                ) else { continue };
                // Skip points where the central difference itself is unreliable.
                if b.zeros().iter().any(|a| (Complex64::new(1.0, 0.0) - a.conj() * z).norm() < 0.05) {
                    continue;
                }
                let fd = (p - m) / (2.0 * h);
                prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0));
            }
        }

        #[test]
        fn circle_derivative_formula(b in arb_general(), theta in 0.0f64..TAU) {
            let d = b.derivative(Complex64::from_polar(1.0, theta)).unwrap().norm();
            prop_assert!((d - b.circle_derivative_modulus(theta)).abs() <= 1e-12 * d.max(1.0));
        }

        #[test]
        fn fixed_point_invariants(b in arb_expanding()) {
            let fp = b.fixed_points().unwrap();
            prop_assert!((b.evaluate(fp.interior_point).unwrap() - fp.interior_point).norm() <= 1e-12);
            prop_assert!(fp.interior_multiplier.norm() < 1.0);
            prop_assert!((fp.exterior_multiplier - fp.interior_multiplier.conj()).norm() <= 1e-9);
            prop_assert_eq!(fp.circle_points.len(), b.degree() - 1);
            for (p, m) in &fp.circle_points {
                prop_assert!((b.evaluate(*p).unwrap() - p).norm() <= 1e-10);
                prop_assert!(m.norm() > 1.0);
            }
        }

        #[test]
        fn predicted_spectrum_invariants(re in -0.9f64..0.9, im in -0.4f64..0.4, count in 1usize..40) {
            let l = c(re, im);
            prop_assume!(l.norm() < 1.0);
            let p = PredictedSpectrum::from_multiplier(l, count);
            prop_assert!(p.len() >= count);
            prop_assert!(p.entries.iter().all(|e| e.norm() <= 1.0));
            prop_assert_eq!(p.entries.iter().filter(|e| **e == c(1.0, 0.0)).count(), 1);
            for w in p.entries.windows(2) {
                prop_assert!(w[0].norm() >= w[1].norm());
            }
        }
    }
}
