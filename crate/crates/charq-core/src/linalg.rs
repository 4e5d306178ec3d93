//! Dense exact-rational linear algebra. Matrices are small (class counts,
//! so k <= a few hundred), so plain Gaussian elimination over BigRational
//! is both fast enough and free of rounding questions.

use num::{BigInt, BigRational, One, Zero};
use std::fmt;

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn q_ratio(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Format a rational as "n" or "n/d".
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse "n" or "n/d".
pub fn parse_q(text: &str) -> Result<Q, String> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {text:?}"));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = text.parse().map_err(|_| format!("bad integer {text:?}"))?;
        Ok(BigRational::from_integer(n))
    }
}

/// Row-major rows x cols matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<Q>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> QMat {
        QMat {
            rows,
            cols,
            a: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> QMat {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> QMat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        QMat {
            rows: r,
            cols: c,
            a: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Q {
        &self.a[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Q {
        &mut self.a[i * self.cols + j]
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn mul(&self, rhs: &QMat) -> QMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = QMat::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let c = self.at(i, l);
                if c.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = c * rhs.at(l, j);
                    *out.at_mut(i, j) += t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, rhs: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            a: self.a.iter().map(|x| x * c).collect(),
        }
    }

    /// Kronecker product with the first factor most significant: entry at
    /// (i1*rows2 + i2, j1*cols2 + j2) is self[i1,j1] * rhs[i2,j2].
    pub fn kron(&self, rhs: &QMat) -> QMat {
        let mut out = QMat::zero(self.rows * rhs.rows, self.cols * rhs.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let c = self.at(i1, j1);
                if c.is_zero() {
                    continue;
                }
                for i2 in 0..rhs.rows {
                    for j2 in 0..rhs.cols {
                        *out.at_mut(i1 * rhs.rows + i2, j1 * rhs.cols + j2) = c * rhs.at(i2, j2);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> QMat {
        assert_eq!(self.rows, self.cols);
        let mut out = QMat::identity(self.rows);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.at(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    let x = m.at(pr, j).clone();
                    let y = m.at(r, j).clone();
                    *m.at_mut(pr, j) = y;
                    *m.at_mut(r, j) = x;
                }
            }
            let inv = m.at(r, c).recip();
            for j in 0..m.cols {
                let t = m.at(r, j) * &inv;
                *m.at_mut(r, j) = t;
            }
            for i in 0..m.rows {
                if i != r && !m.at(i, c).is_zero() {
                    let factor = m.at(i, c).clone();
                    for j in 0..m.cols {
                        let t = m.at(i, j) - &(m.at(r, j) * &factor);
                        *m.at_mut(i, j) = t;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Solve self * x = b exactly. None if inconsistent; for underdetermined
    /// systems returns the solution with free variables set to zero.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(self.rows, b.len());
        let mut aug = QMat::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, self.cols) = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = r.at(row, self.cols).clone();
        }
        Some(x)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }
}

impl fmt::Display for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| fmt_q(self.at(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Check whether `v` lies in the span of `basis`; if so return coordinates.
pub fn express_in_span(basis: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    if basis.is_empty() {
        return if v.iter().all(|x| x.is_zero()) {
            Some(vec![])
        } else {
            None
        };
    }
    let dim = v.len();
    assert!(basis.iter().all(|b| b.len() == dim));
    let mut m = QMat::zero(dim, basis.len());
    for (j, b) in basis.iter().enumerate() {
        for i in 0..dim {
            *m.at_mut(i, j) = b[i].clone();
        }
    }
    m.solve(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_formatting() {
        assert_eq!(fmt_q(&q_int(5)), "5");
        assert_eq!(fmt_q(&q_ratio(1, 2)), "1/2");
        assert_eq!(fmt_q(&q_ratio(-3, 6)), "-1/2");
        assert_eq!(parse_q("-1/2").unwrap(), q_ratio(-1, 2));
        assert_eq!(parse_q("7").unwrap(), q_int(7));
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn solve_and_rank() {
        let m = QMat::from_rows(vec![
            vec![q_int(2), q_int(1)],
            vec![q_int(1), q_int(3)],
        ]);
        let x = m.solve(&[q_int(5), q_int(10)]).unwrap();
        assert_eq!(x, vec![q_int(1), q_int(3)]);
        assert_eq!(m.rank(), 2);

        let singular = QMat::from_rows(vec![
            vec![q_int(1), q_int(2)],
            vec![q_int(2), q_int(4)],
        ]);
        assert_eq!(singular.rank(), 1);
        assert!(singular.solve(&[q_int(1), q_int(3)]).is_none());
    }

    #[test]
    fn kronecker_ordering() {
        let a = QMat::from_rows(vec![vec![q_int(1), q_int(2)]]);
        let b = QMat::from_rows(vec![vec![q_int(10), q_int(20)]]);
        let k = a.kron(&b);
        // first factor most significant: [10, 20, 20, 40]
        assert_eq!(
            k.a,
            vec![q_int(10), q_int(20), q_int(20), q_int(40)]
        );
    }

    #[test]
    fn span_membership() {
        let basis = vec![
            vec![q_int(1), q_int(1), q_int(0)],
            vec![q_int(0), q_int(1), q_int(1)],
        ];
        let coords = express_in_span(&basis, &[q_int(2), q_int(5), q_int(3)]).unwrap();
        assert_eq!(coords, vec![q_int(2), q_int(3)]);
        assert!(express_in_span(&basis, &[q_int(1), q_int(0), q_int(1)]).is_none());
    }
}
