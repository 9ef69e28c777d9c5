use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward DFT normalized so that the output is the vector of Fourier
/// coefficients: `c_k = (1/M) sum_j x_j exp(-2 pi i j k / M)`.
///
/// Equivalently, trapezoid quadrature of `(1/2pi) \oint f(z) z^{-k} dtheta`
/// when `x_j = f(exp(2 pi i j / M))`.
pub fn dft_forward(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    if m == 0 {
        return Vec::new();
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Evaluates `sum_k c_k z_j^k` at the `M`-th roots of unity, the inverse of
/// [`dft_forward`].
pub fn dft_inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = coeffs.len();
    if m == 0 {
        return Vec::new();
    }
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// Maps a signed Fourier mode to its slot in a length-`m` DFT output.
#[inline]
pub fn mode_index(mode: i64, m: usize) -> usize {
    mode.rem_euclid(m as i64) as usize
}

/// Signed mode represented by slot `k` of a length-`m` DFT, using the
/// convention that slots `0..=(m-1)/2` are non-negative.
#[inline]
pub fn signed_mode(k: usize, m: usize) -> i64 {
    if k <= (m - 1) / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// The `m` equispaced points `radius * exp(2 pi i j / m)`.
pub fn circle_points(m: usize, radius: f64) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / m as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Naive O(M^2) transform used as the reference.
    fn naive(samples: &[Complex64]) -> Vec<Complex64> {
        let m = samples.len();
        (0..m)
            .map(|k| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, x)| {
                        x * Complex64::from_polar(
                            1.0,
                            -std::f64::consts::TAU * ((j * k) % m) as f64 / m as f64,
                        )
                    })
                    .sum::<Complex64>()
                    / m as f64
            })
            .collect()
    }

    #[test]
    fn constant_is_mode_zero() {
        let out = dft_forward(&[c(1.0, 0.0); 4]);
        let expected = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_is_mode_one() {
        let out = dft_forward(&circle_points(4, 1.0));
        let expected = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn empty_input() {
        assert!(dft_forward(&[]).is_empty());
    }

    #[test]
    fn mode_bookkeeping() {
        assert_eq!(mode_index(-1, 8), 7);
        assert_eq!(mode_index(3, 8), 3);
        assert_eq!(signed_mode(7, 8), -1);
        assert_eq!(signed_mode(3, 8), 3);
        assert_eq!(signed_mode(4, 8), -4);
        assert_eq!(signed_mode(4, 9), 4);
    }

    proptest! {
        #[test]
        fn parseval(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..200)) {
            let x: Vec<_> = v.iter().map(|&(a, b)| c(a, b)).collect();
            let out = dft_forward(&x);
            let lhs: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>() * x.len() as f64;
            let rhs: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn inverse_round_trip(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..300)) {
            let x: Vec<_> = v.iter().map(|&(a, b)| c(a, b)).collect();
            let back = dft_inverse(&dft_forward(&x));
            let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn matches_naive_sum(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)) {
            let x: Vec<_> = v.iter().map(|&(a, b)| c(a, b)).collect();
            for (a, b) in dft_forward(&x).iter().zip(naive(&x)) {
                prop_assert!((a - b).norm() < 1e-13);
            }
        }
    }
}
