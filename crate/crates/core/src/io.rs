//! Text formats: complex numbers as `re+imi` and matrix CSV dumps.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Parses `"0.5"`, `"-2i"`, `"0.3+0.2i"`, `"1e-3-4.5e-2i"`, `"i"`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Precondition(format!("cannot parse complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that does not belong to an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Inverse of [`parse_complex`]; round-trips exactly.
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{:e}-{:e}i", z.re, -z.im)
    } else {
        format!("{:e}+{:e}i", z.re, z.im)
    }
}

/// Writes a header line `# key=value,...` then one row per matrix row with
/// `re,im` pairs.
pub fn write_matrix_csv<W: Write>(
    mut out: W,
    matrix: &ComplexMatrix,
    header: &[(&str, String)],
) -> std::io::Result<()> {
    let fields: Vec<String> = header.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# {}", fields.join(","))?;
    for i in 0..matrix.rows() {
        let row: Vec<String> = (0..matrix.cols())
            .map(|j| format!("{:e},{:e}", matrix[(i, j)].re, matrix[(i, j)].im))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
