//! Shift vectors and rotation matrices.
//!
//! Text layout: the first non-empty line holds the shift vector (`dim` reals),
//! optionally followed by `dim` lines holding the rows of a rotation matrix.

use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, log, sqrt};
use rand::Rng;
use thiserror::Error;

/// Tolerance used when checking that a rotation matrix is orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct TransformData {
    pub shift: Vec<f64>,
    /// Row-major `dim × dim` matrix.
    pub rotation: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TransformError {
    #[error("line {line}: cannot parse `{token}` as a real number")]
    Parse { line: usize, token: alloc::string::String },
    #[error("line {line}: expected {expected} values, found {found}")]
    RowLength {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: expected a shift row followed by 0 or {dim} rotation rows, found {rows} rotation rows")]
    RowCount { line: usize, dim: usize, rows: usize },
    #[error("transform data is empty")]
    Empty,
    #[error("rotation matrix is not orthogonal (max deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },
}

/// Parses transform text for a `dim`-dimensional function.
///
/// Line numbers in errors are 1-based and refer to the raw text.
pub fn parse_transform(
    text: &str,
    dim: usize,
    check_orthogonal: bool,
) -> Result<TransformData, TransformError> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for token in raw.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| TransformError::Parse {
                line,
                token: token.into(),
            })?;
            row.push(v);
        }
        if row.len() != dim {
            return Err(TransformError::RowLength {
                line,
                expected: dim,
                found: row.len(),
            });
        }
        rows.push((line, row));
    }
    let mut iter = rows.into_iter();
    let (_, shift) = iter.next().ok_or(TransformError::Empty)?;
    let rest: Vec<(usize, Vec<f64>)> = iter.collect();
    let rotation = match rest.len() {
        0 => None,
        n if n == dim => Some(rest.into_iter().flat_map(|(_, r)| r).collect::<Vec<f64>>()),
        n => {
            return Err(TransformError::RowCount {
                line: rest.last().map_or(0, |(l, _)| *l),
                dim,
                rows: n,
            })
        }
    };
    if let (true, Some(m)) = (check_orthogonal, rotation.as_ref()) {
        let deviation = orthogonality_deviation(m, dim);
        if deviation > ORTHOGONALITY_TOLERANCE {
            return Err(TransformError::NotOrthogonal { deviation });
        }
    }
    Ok(TransformData { shift, rotation })
}

/// Largest absolute entry of `MᵀM − I`.
pub fn orthogonality_deviation(m: &[f64], dim: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let dot: f64 = (0..dim).map(|k| m[k * dim + a] * m[k * dim + b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// `out = M · v` for a row-major square matrix.
pub fn rotate(m: &[f64], v: &[f64], out: &mut [f64]) {
    let d = v.len();
    for (r, o) in out.iter_mut().enumerate() {
        *o = m[r * d..(r + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box–Muller; 1 - u keeps the logarithm finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    sqrt(-2.0 * log(u1)) * cos(2.0 * core::f64::consts::PI * u2)
}

/// Random orthogonal matrix: Gaussian entries orthonormalised row by row
/// (modified Gram–Schmidt, applied twice for numerical stability).
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut m: Vec<f64> = (0..dim * dim).map(|_| standard_normal(rng)).collect();
        if orthonormalize_rows(&mut m, dim) {
            return m;
        }
    }
}

fn orthonormalize_rows(m: &mut [f64], dim: usize) -> bool {
    for r in 0..dim {
        for _ in 0..2 {
            for p in 0..r {
                let dot: f64 = (0..dim).map(|k| m[r * dim + k] * m[p * dim + k]).sum();
                for k in 0..dim {
                    m[r * dim + k] -= dot * m[p * dim + k];
                }
            }
        }
        let norm = sqrt((0..dim).map(|k| m[r * dim + k] * m[r * dim + k]).sum::<f64>());
        if norm < 1e-10 {
            return false;
        }
        for k in 0..dim {
            m[r * dim + k] /= norm;
        }
    }
    true
}

pub fn identity(dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;
    use core::fmt::Write;

    fn row(values: &[f64]) -> String {
        let mut s = String::new();
        for v in values {
            write!(s, "{v:e} ").unwrap();
        }
        s.push('\n');
        s
    }

    #[test]
    fn shift_only() {
        let text = row(&[1.0; 10]);
        let t = parse_transform(&text, 10, false).unwrap();
        assert_eq!(t.shift.len(), 10);
        assert!(t.rotation.is_none());
    }

    #[test]
    fn short_shift_row_names_line() {
        let text = format!("\n{}", row(&[0.5; 9]));
        assert_eq!(
            parse_transform(&text, 10, false),
            Err(TransformError::RowLength {
                line: 2,
                expected: 10,
                found: 9
            })
        );
    }

    #[test]
    fn bad_token_names_line() {
        let err = parse_transform("1 2\n3 x\n4 5\n", 2, false).unwrap_err();
        assert!(matches!(err, TransformError::Parse { line: 2, .. }));
    }

    #[test]
    fn partial_rotation_is_rejected() {
        let err = parse_transform("1 2 3\n1 0 0\n0 1 0\n", 3, false).unwrap_err();
        assert!(matches!(err, TransformError::RowCount { rows: 2, .. }));
    }

    #[test]
    fn non_orthogonal_rejected_only_when_checked() {
        let text = "0 0\n1 1\n0 1\n";
        assert!(parse_transform(text, 2, false).is_ok());
        assert!(matches!(
            parse_transform(text, 2, true),
            Err(TransformError::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn generated_rotations_are_orthogonal() {
        let mut rng = crate::rng::seeded(3);
        for dim in [1, 2, 5, 30] {
            let m = random_rotation(dim, &mut rng);
            assert!(orthogonality_deviation(&m, dim) < 1e-12);
        }
    }
}
