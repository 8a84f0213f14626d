//! Small dense matrix helpers, in plain `f64` and in jet arithmetic.
//!
//! Dimensions here are tiny (2–8), so everything is straightforward Gaussian
//! elimination and triple loops. The `f64` routines double as the independent
//! evaluation path used to cross-check the jet-based operator algebra.

use crate::error::{Error, Result};
use crate::jets::Jet;

pub type Mat = Vec<Vec<f64>>;
pub type MatJ = Vec<Vec<Jet>>;

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum()).collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

/// Determinant by LU with partial pivoting.
pub fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Mat = m.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        });
        let p = pivot.unwrap();
        if a[p][col] == 0.0 {
            return 0.0;
        }
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        d *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for j in col..n {
                a[row][j] -= f * a[col][j];
            }
        }
    }
    d
}

/// Inverse by Gauss-Jordan with partial pivoting; `None` when singular.
pub fn inverse(m: &[Vec<f64>]) -> Option<Mat> {
    let n = m.len();
    let mut a: Mat = m.to_vec();
    let mut inv: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[p][col] == 0.0 {
            return None;
        }
        a.swap(p, col);
        inv.swap(p, col);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for row in 0..n {
            if row != col && a[row][col] != 0.0 {
                let f = a[row][col];
                for j in 0..n {
                    a[row][j] -= f * a[col][j];
                    inv[row][j] -= f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

pub fn values_of(m: &[Vec<Jet>]) -> Mat {
    m.iter().map(|row| row.iter().map(|j| j.value).collect()).collect()
}

pub fn matj_vec(m: &[Vec<Jet>], v: &[Jet]) -> Vec<Jet> {
    let n = v.first().map_or(0, Jet::dim);
    m.iter()
        .map(|row| {
            let mut acc = Jet::constant(0.0, n);
            for (a, b) in row.iter().zip(v) {
                acc = acc.add(&a.mul(b));
            }
            acc
        })
        .collect()
}

pub fn matj_mul(a: &[Vec<Jet>], b: &[Vec<Jet>]) -> MatJ {
    let n = a.len();
    let m = b[0].len();
    let dim = a[0][0].dim();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Jet::constant(0.0, dim);
                    for (l, brow) in b.iter().enumerate() {
                        acc = acc.add(&a[i][l].mul(&brow[j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn matj_add(a: &[Vec<Jet>], b: &[Vec<Jet>]) -> MatJ {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y)).collect())
        .collect()
}

pub fn matj_scale(a: &[Vec<Jet>], c: f64) -> MatJ {
    a.iter().map(|row| row.iter().map(|x| x.scale(c)).collect()).collect()
}

pub fn matj_transpose(a: &[Vec<Jet>]) -> MatJ {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

/// Jet-valued inverse of a matrix of jets: invert the values, then use
/// ∂(M⁻¹) = -M⁻¹ (∂M) M⁻¹ for the partials. Errors with the determinant when
/// the value matrix is (numerically) singular.
pub fn matj_inverse(m: &[Vec<Jet>], at: &[f64], det_floor: f64) -> Result<MatJ> {
    let n = m.len();
    let dim = m[0][0].dim();
    let values = values_of(m);
    let d = det(&values);
    if d.abs() <= det_floor {
        return Err(Error::SingularMetric { point: at.to_vec(), det: d });
    }
    let inv = inverse(&values)
        .ok_or(Error::SingularMetric { point: at.to_vec(), det: d })?;
    // For each coordinate direction k: G_k = -inv · (∂_k m) · inv.
    let mut partials = vec![vec![vec![0.0; dim]; n]; n];
    for k in 0..dim {
        let dm: Mat = m
            .iter()
            .map(|row| row.iter().map(|j| j.partials[k]).collect())
            .collect();
        let g = mat_mul(&mat_mul(&inv, &dm), &inv);
        for i in 0..n {
            for j in 0..n {
                partials[i][j][k] = -g[i][j];
            }
        }
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet { value: inv[i][j], partials: partials[i][j].clone() })
                .collect()
        })
        .collect())
}
