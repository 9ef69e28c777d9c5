//! Spectrum extraction and comparison: finite-section eigenvalues against the
//! closed-form prediction, direct against adjoint pipeline, convergence fits
//! and the trace diagnostic.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::adjoint::adjoint_block_matrix;
use crate::blaschke::{BlaschkeProduct, PredictedSpectrum};
use crate::error::{Error, Result};
use crate::hardy::{admissible_annulus, Annulus, DEFAULT_SEARCH_SAMPLES};
use crate::numerics::eig_dense;
use crate::transfer::{linear_fit, transfer_matrix};

/// Computed eigenvalues below this modulus are identified with 0.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;
/// Match errors are clamped to this floor and then left out of rate fits.
pub const ERROR_FLOOR: f64 = 1e-13;
pub const DEFAULT_MATCH_COUNT: usize = 7;
pub const CROSS_VALIDATION_COUNT: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchedPair {
    pub computed: Complex64,
    pub predicted: Complex64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumMatch {
    pub matched_pairs: Vec<MatchedPair>,
    pub max_match_error: f64,
}

/// Sorts by decreasing modulus, ties broken by real then imaginary part so
/// that output order is deterministic.
pub fn sort_by_modulus(values: &mut [Complex64]) {
    values.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(x.re.total_cmp(&y.re))
            .then(x.im.total_cmp(&y.im))
    });
}

fn snap(z: Complex64) -> Complex64 {
    if z.norm() < EIGENVALUE_FLOOR {
        Complex64::new(0.0, 0.0)
    } else {
        z
    }
}

/// Greedy assignment of the `k` leading targets to distinct candidates,
/// processing targets in decreasing modulus.
fn greedy_match(candidates: &[Complex64], targets: &[Complex64]) -> SpectrumMatch {
    let mut targets = targets.to_vec();
    sort_by_modulus(&mut targets);
    let mut used = vec![false; candidates.len()];
    let mut matched_pairs = Vec::with_capacity(targets.len());
    for p in targets {
        let best = candidates
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, &c)| (j, c, (snap(c) - p).norm()))
            .min_by(|a, b| a.2.total_cmp(&b.2));
        if let Some((j, computed, error)) = best {
            used[j] = true;
            matched_pairs.push(MatchedPair { computed, predicted: p, error });
        }
    }
    let max_match_error = matched_pairs.iter().map(|m| m.error).fold(0.0, f64::max);
    SpectrumMatch { matched_pairs, max_match_error }
}

pub fn match_spectrum(
    computed: &[Complex64],
    predicted: &PredictedSpectrum,
    k: usize,
) -> Result<SpectrumMatch> {
    if k > predicted.len() {
        return Err(Error::Precondition(format!(
            "k = {k} exceeds the {} available predictions",
            predicted.len()
        )));
    }
    if computed.len() < k {
        return Err(Error::Precondition(format!(
            "k = {k} exceeds the {} computed eigenvalues",
            computed.len()
        )));
    }
    Ok(greedy_match(computed, &predicted.entries[..k]))
}

/// Everything a spectrum run produces. Contains no timing so that equal
/// inputs serialize to equal bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub blaschke: BlaschkeProduct,
    pub annulus: Annulus,
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "M")]
    pub samples: usize,
    pub k: usize,
    pub seed: u64,
    pub multiplier: Complex64,
    /// Direct transfer-matrix eigenvalues, decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Adjoint block-matrix eigenvalues, decreasing modulus.
    pub adjoint_eigenvalues: Vec<Complex64>,
    pub predicted: Vec<Complex64>,
    pub predicted_zero_fill: usize,
    pub matched_pairs: Vec<MatchedPair>,
    pub max_match_error: f64,
    pub adjoint_max_match_error: f64,
    pub aliased_columns: Vec<i64>,
}

pub fn spectrum_report(
    b: &BlaschkeProduct,
    a: &Annulus,
    order: usize,
    samples: usize,
    k: usize,
    seed: u64,
) -> Result<SpectrumReport> {
    let predicted = b.closed_form_spectrum(k)?;
    let transfer = transfer_matrix(b, a, order, samples)?;
    let adjoint = adjoint_block_matrix(b, a, order, samples)?;
    let mut eigenvalues = eig_dense(&transfer.matrix)?;
    let mut adjoint_eigenvalues = eig_dense(&adjoint.matrix)?;
    sort_by_modulus(&mut eigenvalues);
    sort_by_modulus(&mut adjoint_eigenvalues);
    let direct = match_spectrum(&eigenvalues, &predicted, k)?;
    let dual = match_spectrum(&adjoint_eigenvalues, &predicted, k)?;
    Ok(SpectrumReport {
        blaschke: b.clone(),
        annulus: *a,
        order,
        samples,
        k,
        seed,
        multiplier: predicted.multiplier,
        eigenvalues,
        adjoint_eigenvalues,
        predicted: predicted.entries.clone(),
        predicted_zero_fill: predicted.zero_fill,
        matched_pairs: direct.matched_pairs,
        max_match_error: direct.max_match_error,
        adjoint_max_match_error: dual.max_match_error,
        aliased_columns: transfer.aliased_columns,
    })
}

/// Largest discrepancy between the leading eigenvalues of the direct matrix
/// on `direct` and the adjoint block matrix on `dual`.
pub fn cross_validate_annuli(
    b: &BlaschkeProduct,
    direct: &Annulus,
    dual: &Annulus,
    order: usize,
    samples: usize,
) -> Result<f64> {
    let mut left = eig_dense(&transfer_matrix(b, direct, order, samples)?.matrix)?;
    let mut right = eig_dense(&adjoint_block_matrix(b, dual, order, samples)?.matrix)?;
    sort_by_modulus(&mut left);
    sort_by_modulus(&mut right);
    let count = CROSS_VALIDATION_COUNT.min(left.len());
    let targets: Vec<Complex64> = left[..count].iter().map(|&z| snap(z)).collect();
    Ok(greedy_match(&right, &targets).max_match_error)
}

pub fn cross_validate(b: &BlaschkeProduct, a: &Annulus, order: usize, samples: usize) -> Result<f64> {
    cross_validate_annuli(b, a, a, order, samples)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub order: usize,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub annulus: Annulus,
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `ln(error)` against `N` over the points above the floor.
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    /// Fewer than three points above the floor: the error reached round-off
    /// faster than any useful rate fit can describe.
    pub floor_dominated: bool,
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,error\n");
        for row in &self.rows {
            out.push_str(&format!("{},{:e}\n", row.order, row.error));
        }
        out
    }

    pub fn summary(&self) -> String {
        match (self.floor_dominated, self.slope, self.r_squared) {
            (false, Some(s), Some(r2)) => format!("slope={s:.6} r_squared={r2:.6}"),
            _ => "superexponential/floor".to_string(),
        }
    }
}

/// Match error against the top-5 prediction for each order in `orders`.
pub fn convergence_study(
    b: &BlaschkeProduct,
    orders: &[usize],
    samples_rule: impl Fn(usize) -> usize + Sync,
) -> Result<ConvergenceStudy> {
    if orders.len() < 4 {
        return Err(Error::Precondition(format!(
            "a convergence study needs at least 4 orders, got {}",
            orders.len()
        )));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("orders must be strictly increasing".into()));
    }
    let a = admissible_annulus(b, DEFAULT_SEARCH_SAMPLES)?;
    convergence_study_on(b, &a, orders, samples_rule)
}

pub fn convergence_study_on(
    b: &BlaschkeProduct,
    a: &Annulus,
    orders: &[usize],
    samples_rule: impl Fn(usize) -> usize + Sync,
) -> Result<ConvergenceStudy> {
    let predicted = b.closed_form_spectrum(5)?;
    let rows: Vec<ConvergenceRow> = orders
        .par_iter()
        .map(|&n| {
            let t = transfer_matrix(b, a, n, samples_rule(n))?;
            let ev = eig_dense(&t.matrix)?;
            let m = match_spectrum(&ev, &predicted, 5)?;
            Ok(ConvergenceRow {
                order: n,
                error: m.max_match_error.max(ERROR_FLOOR),
            })
        })
        .collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > ERROR_FLOOR)
        .map(|r| (r.order as f64, r.error.ln()))
        .collect();
    let fit = if points.len() >= 3 { linear_fit(&points) } else { None };
    Ok(ConvergenceStudy {
        annulus: *a,
        rows,
        slope: fit.map(|f| f.0),
        r_squared: fit.map(|f| f.2),
        floor_dominated: fit.is_none(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceDiagnostic {
    pub matrix_trace: Complex64,
    pub predicted_trace: Complex64,
    pub deviation: f64,
}

pub fn trace_diagnostic(
    b: &BlaschkeProduct,
    a: &Annulus,
    order: usize,
    samples: usize,
) -> Result<TraceDiagnostic> {
    let predicted = b.closed_form_spectrum(1)?;
    let matrix_trace = transfer_matrix(b, a, order, samples)?.trace();
    let predicted_trace = predicted.trace();
    Ok(TraceDiagnostic {
        matrix_trace,
        predicted_trace,
        deviation: (matrix_trace - predicted_trace).norm(),
    })
}
