//! Annuli, the orthonormal Laurent basis of the Hardy space on an annulus,
//! boundary splitting and the admissible-annulus search.
//!
//! On `A = {r < |z| < R}` the monomials `z^n` are orthogonal in `H^2(A)` with
//! `||z^n||^2 = r^{2n} + R^{2n}`, so `e_n = z^n / d_n`,
//! `d_n = sqrt(r^{2n} + R^{2n})`, is an orthonormal basis. A vector is stored
//! by its coefficients `c_n` against `e_n`; the raw Laurent coefficient of
//! `z^n` is `c_n / d_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::numerics::dft::{circle_points, dft_forward, signed_mode};

/// Exponent margin of the mapping certificates: the inner circle is accepted
/// when `sup |B| <= r^SAFETY_EXPONENT`, the outer when `inf |B| >= R^SAFETY_EXPONENT`.
pub const SAFETY_EXPONENT: f64 = 1.1;
pub const MAX_BISECTIONS: usize = 60;
pub const DEFAULT_SEARCH_SAMPLES: usize = 4096;

#[derive(Serialize, Deserialize)]
struct RawAnnulus {
    r: f64,
    #[serde(rename = "R")]
    big_r: f64,
}

/// `{z : r < |z| < R}` with `0 < r < 1 < R`. Serializes as `{"r": .., "R": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnulus", into = "RawAnnulus")]
pub struct Annulus {
    r: f64,
    big_r: f64,
}

impl TryFrom<RawAnnulus> for Annulus {
    type Error = Error;
    fn try_from(raw: RawAnnulus) -> Result<Self> {
        Annulus::new(raw.r, raw.big_r)
    }
}

impl From<Annulus> for RawAnnulus {
    fn from(a: Annulus) -> Self {
        RawAnnulus { r: a.r, big_r: a.big_r }
    }
}

impl Annulus {
    pub fn new(r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0 && big_r > 1.0 && big_r.is_finite()) {
            return Err(Error::InvalidAnnulus { r, big_r });
        }
        Ok(Self { r, big_r })
    }

    /// `{r < |z| < 1/r}`.
    pub fn symmetric(r: f64) -> Result<Self> {
        Self::new(r, 1.0 / r)
    }

    pub fn inner(&self) -> f64 {
        self.r
    }

    pub fn outer(&self) -> f64 {
        self.big_r
    }

    /// Intermediate radii `r' = (r+1)/2`, `R' = (R+1)/2` used by the tail bound.
    pub fn tail_radii(&self) -> (f64, f64) {
        ((self.r + 1.0) / 2.0, (self.big_r + 1.0) / 2.0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        self.r < m && m < self.big_r
    }

    /// Checks the two mapping inequalities at `m` sample points.
    pub fn certify(&self, b: &BlaschkeProduct, m: usize) -> Result<()> {
        let inner = inner_certificate(b, self.r, m)?;
        if !inner.passed() {
            return Err(Error::NoAdmissibleAnnulus(inner.describe()));
        }
        let outer = outer_certificate(b, self.big_r, m)?;
        if !outer.passed() {
            return Err(Error::NoAdmissibleAnnulus(outer.describe()));
        }
        Ok(())
    }
}

/// `d_n = sqrt(r^{2n} + R^{2n})`.
pub fn basis_weight(n: i64, a: &Annulus) -> f64 {
    if n.abs() <= 200 {
        let n = n as i32;
        (a.r.powi(2 * n) + a.big_r.powi(2 * n)).sqrt()
    } else {
        // log-sum-exp of 2n log r and 2n log R, halved.
        let x = 2.0 * n as f64 * a.r.ln();
        let y = 2.0 * n as f64 * a.big_r.ln();
        let hi = x.max(y);
        (0.5 * (hi + ((x - hi).exp() + (y - hi).exp()).ln())).exp()
    }
}

/// Element of the span of `e_{-N}, .., e_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentVector {
    annulus: Annulus,
    order: usize,
    coeffs: Vec<Complex64>,
}

impl LaurentVector {
    /// `coeffs[n + N]` is the coefficient of `e_n`.
    pub fn new(annulus: Annulus, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 != 1 {
            return Err(Error::Precondition(format!(
                "a Laurent vector needs 2N+1 coefficients, got {}",
                coeffs.len()
            )));
        }
        let order = coeffs.len() / 2;
        Ok(Self { annulus, order, coeffs })
    }

    pub fn zero(annulus: Annulus, order: usize) -> Self {
        Self {
            annulus,
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * order + 1],
        }
    }

    /// The basis vector `e_n`.
    pub fn basis(annulus: Annulus, order: usize, n: i64) -> Self {
        let mut v = Self::zero(annulus, order);
        v.coeffs[(n + order as i64) as usize] = Complex64::new(1.0, 0.0);
        v
    }

    /// Builds the vector from raw Laurent coefficients `f_n` of `z^n`.
    pub fn from_raw(annulus: Annulus, raw: &[Complex64]) -> Result<Self> {
        let mut v = Self::new(annulus, raw.to_vec())?;
        let order = v.order as i64;
        for (i, c) in v.coeffs.iter_mut().enumerate() {
            *c *= basis_weight(i as i64 - order, &annulus);
        }
        Ok(v)
    }

    /// Reads the coefficients of modes `-N..N` from samples on the unit circle.
    pub fn from_unit_circle_samples(annulus: Annulus, order: usize, samples: &[Complex64]) -> Self {
        let m = samples.len();
        let hat = dft_forward(samples);
        let coeffs = (-(order as i64)..=order as i64)
            .map(|n| hat[n.rem_euclid(m as i64) as usize] * basis_weight(n, &annulus))
            .collect();
        Self { annulus, order, coeffs }
    }

    pub fn annulus(&self) -> Annulus {
        self.annulus
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs[(n + self.order as i64) as usize]
    }

    /// Raw Laurent coefficients `c_n / d_n`, indexed like [`Self::coeffs`].
    pub fn raw(&self) -> Vec<Complex64> {
        let order = self.order as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c / basis_weight(i as i64 - order, &self.annulus))
            .collect()
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let order = self.order as i64;
        self.raw()
            .iter()
            .enumerate()
            .map(|(i, c)| c * z.powi((i as i64 - order) as i32))
            .sum()
    }

    pub fn hardy_norm(&self) -> f64 {
        hardy_norm(self)
    }
}

pub fn hardy_norm(v: &LaurentVector) -> f64 {
    v.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// A function on a circle split into its disk part (`z^n`, `n >= 0`) and
/// its part vanishing at infinity (`z^{-n}`, `n >= 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPair {
    pub radius: f64,
    /// `inner[n]` is the coefficient of `z^n`.
    pub inner: Vec<Complex64>,
    /// `outer[n - 1]` is the coefficient of `z^{-n}`.
    pub outer: Vec<Complex64>,
}

impl BoundaryPair {
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

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.evaluate_inner(z) + self.evaluate_outer(z)
    }
}

/// Splits samples `g(rho * exp(2 pi i j / M))` into non-negative and negative
/// Fourier modes, returned as monomial coefficients.
pub fn project_split(samples: &[Complex64], rho: f64) -> BoundaryPair {
    let m = samples.len();
    let hat = dft_forward(samples);
    let inner_len = if m == 0 { 0 } else { (m - 1) / 2 + 1 };
    let mut inner = Vec::with_capacity(inner_len);
    let mut outer = vec![Complex64::new(0.0, 0.0); m - inner_len];
    for (k, c) in hat.into_iter().enumerate() {
        let mode = signed_mode(k, m);
        let coeff = c * rho.powi(-mode as i32);
        if mode >= 0 {
            inner.push(coeff);
        } else {
            outer[(-mode - 1) as usize] = coeff;
        }
    }
    BoundaryPair { radius: rho, inner, outer }
}

/// Outcome of sampling `|B|` on one circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleCertificate {
    pub radius: f64,
    /// `sup |B|` for the inner circle, `inf |B|` for the outer.
    pub extremum: f64,
    pub bound: f64,
    pub outer: bool,
}

impl CircleCertificate {
    pub fn passed(&self) -> bool {
        if self.outer {
            self.extremum >= self.bound
        } else {
            self.extremum <= self.bound
        }
    }

    fn describe(&self) -> String {
        if self.outer {
            format!(
                "inf |B| on |z| = {} is {} < R^{} = {}",
                self.radius, self.extremum, SAFETY_EXPONENT, self.bound
            )
        } else {
            format!(
                "sup |B| on |z| = {} is {} > r^{} = {}",
                self.radius, self.extremum, SAFETY_EXPONENT, self.bound
            )
        }
    }
}

pub fn inner_certificate(b: &BlaschkeProduct, r: f64, m: usize) -> Result<CircleCertificate> {
    let mut sup = 0.0f64;
    for z in circle_points(m, r) {
        sup = sup.max(b.evaluate(z)?.norm());
    }
    Ok(CircleCertificate {
        radius: r,
        extremum: sup,
        bound: r.powf(SAFETY_EXPONENT),
        outer: false,
    })
}

pub fn outer_certificate(b: &BlaschkeProduct, big_r: f64, m: usize) -> Result<CircleCertificate> {
    let mut inf = f64::INFINITY;
    for z in circle_points(m, big_r) {
        inf = inf.min(b.evaluate(z)?.norm());
    }
    Ok(CircleCertificate {
        radius: big_r,
        extremum: inf,
        bound: big_r.powf(SAFETY_EXPONENT),
        outer: true,
    })
}

/// Finds `r < 1 < R` such that `B` maps the circle `|z| = r` strictly inside
/// itself and `|z| = R` strictly outside itself, certified on `m` samples.
pub fn admissible_annulus(b: &BlaschkeProduct, m: usize) -> Result<Annulus> {
    let report = b.expansivity_check(m.max(256))?;
    if !report.expanding {
        return Err(Error::NotExpanding {
            min_derivative_modulus: report.min_derivative_modulus,
        });
    }
    let max_a = b.max_zero_modulus();
    let min_inv = b
        .zeros()
        .iter()
        .filter(|a| a.norm() > 0.0)
        .map(|a| 1.0 / a.norm())
        .fold(f64::INFINITY, f64::min);

    let mut r = (1.0 + max_a) / 2.0;
    let mut inner = inner_certificate(b, r, m)?;
    for _ in 0..MAX_BISECTIONS {
        if inner.passed() {
            break;
        }
        r = (r + 1.0) / 2.0;
        inner = inner_certificate(b, r, m)?;
    }
    if !inner.passed() || r >= 1.0 {
        return Err(Error::NoAdmissibleAnnulus(inner.describe()));
    }

    let mirrored = outer_certificate(b, 1.0 / r, m)?;
    if mirrored.passed() && 1.0 / r < min_inv {
        return Annulus::new(r, 1.0 / r);
    }

    let mut big_r = if min_inv.is_finite() { (1.0 + min_inv) / 2.0 } else { 2.0 };
    let mut outer = outer_certificate(b, big_r, m)?;
    for _ in 0..MAX_BISECTIONS {
        if outer.passed() {
            break;
        }
        big_r = (big_r + 1.0) / 2.0;
        outer = outer_certificate(b, big_r, m)?;
    }
    if !outer.passed() || big_r <= 1.0 {
        return Err(Error::NoAdmissibleAnnulus(outer.describe()));
    }
    Annulus::new(r, big_r)
}

/// Operator-norm bound on the error of cutting the embedding of `H^2(A)`
/// into `H^2(A')` at order `N`, with `A' = {r' < |z| < R'}`.
pub fn truncation_tail_bound(n: usize, inner: (f64, f64), outer: (f64, f64)) -> Result<f64> {
    let (r, r_prime) = inner;
    let (big_r_prime, big_r) = outer;
    if !(0.0 < r && r < r_prime && r_prime < 1.0 && 1.0 < big_r_prime && big_r_prime < big_r) {
        return Err(Error::RadiusOrdering);
    }
    let q_out = (big_r_prime / big_r).powi(2);
    let q_in = (r / r_prime).powi(2);
    let n = n as i32;
    Ok((q_out.powi(n) / (1.0 - q_out) + q_in.powi(n) / (1.0 - q_in)).sqrt())
}
