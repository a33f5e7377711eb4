//! Small dense square matrices over [`Scalar`].

use crate::error::{Error, Result};
use crate::scalar::{vec_regime, Regime, Scalar, Vector};

#[derive(Debug, Clone)]
pub struct Matrix {
    dim: usize,
    rows: Vec<Vector>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vector>) -> Result<Matrix> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
        }
        Ok(Matrix { dim, rows })
    }

    pub fn identity(dim: usize, regime: Regime) -> Matrix {
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| Scalar::from_int(i64::from(i == j), regime))
                    .collect()
            })
            .collect();
        Matrix { dim, rows }
    }

    pub fn diagonal(entries: Vector) -> Matrix {
        let dim = entries.len();
        let regime = vec_regime(&entries);
        let mut m = Matrix::identity(dim, regime);
        for (i, e) in entries.into_iter().enumerate() {
            m.rows[i][i] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> Vector {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn regime(&self) -> Regime {
        self.rows.iter().fold(Regime::Exact, |r, row| r.join(vec_regime(row)))
    }

    pub fn transpose(&self) -> Matrix {
        let rows = (0..self.dim).map(|j| self.column(j)).collect();
        Matrix { dim: self.dim, rows }
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        let regime = self.regime().join(vec_regime(v));
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Scalar::zero(regime), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let cols: Vec<Vector> = (0..other.dim).map(|j| other.column(j)).collect();
        let regime = self.regime().join(other.regime());
        let rows = self
            .rows
            .iter()
            .map(|row| {
                cols.iter()
                    .map(|col| {
                        row.iter()
                            .zip(col)
                            .fold(Scalar::zero(regime), |acc, (a, b)| acc + a * b)
                    })
                    .collect()
            })
            .collect();
        Matrix { dim: self.dim, rows }
    }

    /// Determinant and inverse by Gauss-Jordan elimination. Pivoting picks the
    /// first nonzero entry in the exact regime and the largest one otherwise.
    pub fn det_and_inverse(&self) -> Result<(Scalar, Matrix)> {
        let n = self.dim;
        let regime = self.regime();
        let mut a: Vec<Vector> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_regime(regime)).collect())
            .collect();
        let mut inv = Matrix::identity(n, regime).rows;
        let mut det = Scalar::one(regime);
        for col in 0..n {
            let pivot = match regime {
                Regime::Exact => (col..n).find(|&r| !a[r][col].is_zero()),
                Regime::Float => (col..n)
                    .max_by(|&x, &y| a[x][col].to_f64().abs().total_cmp(&a[y][col].to_f64().abs()))
                    .filter(|&r| a[r][col].to_f64() != 0.0),
            };
            let p = pivot.ok_or(Error::DegenerateLattice)?;
            if p != col {
                a.swap(p, col);
                inv.swap(p, col);
                det = -det;
            }
            let pv = a[col][col].clone();
            det = det * &pv;
            for j in 0..n {
                a[col][j] = &a[col][j] / &pv;
                inv[col][j] = &inv[col][j] / &pv;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() && regime == Regime::Exact {
                    continue;
                }
                let factor = a[r][col].clone();
                for j in 0..n {
                    let t = &factor * &a[col][j];
                    a[r][j] = &a[r][j] - &t;
                    let u = &factor * &inv[col][j];
                    inv[r][j] = &inv[r][j] - &u;
                }
            }
        }
        if regime == Regime::Float && det.to_f64().abs() < 1e-300 {
            return Err(Error::DegenerateLattice);
        }
        Ok((det, Matrix { dim: n, rows: inv }))
    }

    /// Max absolute row sum, in `f64`.
    pub fn inf_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix) -> bool {
        self.dim == other.dim
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.approx_eq(y)))
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&Matrix::identity(self.dim, Regime::Exact))
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect()
    }
}
