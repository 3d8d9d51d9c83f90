//! Dense matrices over a prime field with exact Gaussian elimination.

use crate::field::{Field, Felt};
use crate::{Error, Result};

/// Row-major matrix of field elements (stored as raw residues).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Mat {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Mat {
        Mat { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: Field, rows: &[Vec<u64>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| v % field.modulus()))
            .collect();
        Mat { field, rows: r, cols: c, data }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Felt {
        self.field.elt(self.data[i * self.cols + j] as i128)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Felt) {
        self.data[i * self.cols + j] = v.value();
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.field, rhs.field, "field mismatch");
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let f = self.field;
        let mut out = Mat::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] =
                        f.add_raw(out.data[idx], f.mul_raw(a, rhs.data[k * rhs.cols + j]));
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// The submatrix keeping the listed columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.field, self.rows, cols.len());
        for i in 0..self.rows {
            for (j2, &j) in cols.iter().enumerate() {
                out.data[i * cols.len() + j2] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// The submatrix keeping the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.field, rows.len(), self.cols);
        for (i2, &i) in rows.iter().enumerate() {
            out.data[i2 * self.cols..(i2 + 1) * self.cols]
                .copy_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        out
    }

    /// Rank by fraction-free forward elimination.
    pub fn rank(&self) -> usize {
        let f = self.field;
        let mut a = self.data.clone();
        let (r, c) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..c {
            if rank == r {
                break;
            }
            let pivot = (rank..r).find(|&i| a[i * c + col] != 0);
            let Some(pivot) = pivot else { continue };
            if pivot != rank {
                for j in 0..c {
                    a.swap(pivot * c + j, rank * c + j);
                }
            }
            let inv = f.inv_raw(a[rank * c + col]).expect("pivot is nonzero");
            for i in rank + 1..r {
                let factor = f.mul_raw(a[i * c + col], inv);
                if factor == 0 {
                    continue;
                }
                for j in col..c {
                    let sub = f.mul_raw(factor, a[rank * c + j]);
                    a[i * c + j] = f.sub_raw(a[i * c + j], sub);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Determinant by elimination; square matrices only.
    pub fn det(&self) -> Felt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let f = self.field;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = f.one();
        for col in 0..n {
            let pivot = (col..n).find(|&i| a[i * n + col] != 0);
            let Some(pivot) = pivot else { return f.zero() };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let pv = a[col * n + col];
            det = det * f.elt(pv as i128);
            let inv = f.inv_raw(pv).expect("pivot is nonzero");
            for i in col + 1..n {
                let factor = f.mul_raw(a[i * n + col], inv);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    let sub = f.mul_raw(factor, a[col * n + j]);
                    a[i * n + j] = f.sub_raw(a[i * n + j], sub);
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan; errors on singular input.
    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let f = self.field;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(f, n);
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a.get(i, col).is_zero());
            let Some(pivot) = pivot else {
                return Err(Error::DivisionByZero);
            };
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (a.get(pivot, j), a.get(col, j));
                    a.set(pivot, j, y);
                    a.set(col, j, x);
                    let (x, y) = (inv.get(pivot, j), inv.get(col, j));
                    inv.set(pivot, j, y);
                    inv.set(col, j, x);
                }
            }
            let scale = a.get(col, col).inv()?;
            for j in 0..n {
                a.set(col, j, a.get(col, j) * scale);
                inv.set(col, j, inv.get(col, j) * scale);
            }
            for i in 0..n {
                if i == col || a.get(i, col).is_zero() {
                    continue;
                }
                let factor = a.get(i, col);
                for j in 0..n {
                    a.set(i, j, a.get(i, j) - factor * a.get(col, j));
                    inv.set(i, j, inv.get(i, j) - factor * inv.get(col, j));
                }
            }
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f7() -> Field {
        Field::new(7).unwrap()
    }

    #[test]
    fn rank_basics() {
        let f = f7();
        assert_eq!(Mat::identity(f, 3).rank(), 3);
        assert_eq!(Mat::zeros(f, 3, 4).rank(), 0);
        let m = Mat::from_rows(f, &[vec![1, 2], vec![2, 4], vec![0, 1]]);
        assert_eq!(m.rank(), 2);
        // row 2 = row 0 + row 1 mod 7
        let m = Mat::from_rows(f, &[vec![1, 2, 3], vec![4, 5, 6], vec![5, 0, 2]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn det_and_inverse() {
        let f = Field::new(101).unwrap();
        let m = Mat::from_rows(f, &[vec![2, 1], vec![1, 1]]);
        assert_eq!(m.det(), f.one());
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(f, 2));
        assert_eq!(inv.mul(&m), Mat::identity(f, 2));

        let singular = Mat::from_rows(f, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(singular.det(), f.zero());
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn det_matches_permanent_style_expansion() {
        // 3x3 cofactor-expansion oracle on random matrices
        let f = Field::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rows: Vec<Vec<u64>> = (0..3)
                .map(|_| (0..3).map(|_| rng.gen_range(0..101)).collect())
                .collect();
            let m = Mat::from_rows(f, &rows);
            let e = |i: usize, j: usize| f.elt(rows[i][j] as i128);
            let oracle = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
            assert_eq!(m.det(), oracle);
        }
    }

    #[test]
    fn rank_invariant_under_row_ops() {
        let f = f7();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let rows: Vec<Vec<u64>> = (0..4)
                .map(|_| (0..3).map(|_| rng.gen_range(0..7)).collect())
                .collect();
            let m = Mat::from_rows(f, &rows);
            let r = m.rank();
            assert_eq!(m.transpose().rank(), r);
            // appending a linear combination of rows leaves the rank fixed
            let combo: Vec<u64> = (0..3)
                .map(|j| (2 * rows[0][j] + 3 * rows[1][j]) % 7)
                .collect();
            let mut rows2 = rows.clone();
            rows2.push(combo);
            assert_eq!(Mat::from_rows(f, &rows2).rank(), r);
        }
    }

    #[test]
    fn select_rows_cols() {
        let f = f7();
        let m = Mat::from_rows(f, &[vec![1, 2, 3], vec![4, 5, 6]]);
        let c = m.select_cols(&[2, 0]);
        assert_eq!(c.get(0, 0), f.elt(3));
        assert_eq!(c.get(1, 1), f.elt(4));
        let r = m.select_rows(&[1]);
        assert_eq!(r.get(0, 2), f.elt(6));
    }

    #[test]
    fn mul_associative() {
        let f = f7();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rand_mat = |rng: &mut ChaCha8Rng, r: usize, c: usize| {
            let rows: Vec<Vec<u64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(0..7)).collect())
                .collect();
            Mat::from_rows(f, &rows)
        };
        for _ in 0..20 {
            let a = rand_mat(&mut rng, 2, 3);
            let b = rand_mat(&mut rng, 3, 3);
            let c = rand_mat(&mut rng, 3, 2);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }
    }
}
