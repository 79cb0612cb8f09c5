//! Pfaffians of skew-symmetric matrices by skew Gaussian elimination.

use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// Dense square matrix stored as rows.
pub type Matrix<T> = Vec<Vec<T>>;

fn check_skew<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    let n = m.len();
    if n % 2 == 1 {
        return Err(Error::NotSkew(format!("odd dimension {n}")));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSkew(format!("row {i} has length {}", row.len())));
        }
    }
    for i in 0..n {
        for j in i..n {
            let s = m[i][j].clone() + m[j][i].clone();
            let scale = 1.0 + m[i][j].magnitude();
            let bad = if T::EXACT { !s.is_zero_val() } else { s.magnitude() > 1e-9 * scale };
            if bad {
                return Err(Error::NotSkew(format!("entry ({i},{j})")));
            }
        }
    }
    Ok(())
}

fn swap_index<T>(a: &mut Matrix<T>, p: usize, q: usize) {
    a.swap(p, q);
    for row in a.iter_mut() {
        row.swap(p, q);
    }
}

/// Schur update after pivoting on the 2x2 block at `(k, k+1)`.
fn eliminate<T: Scalar>(a: &mut Matrix<T>, k: usize) {
    let n = a.len();
    let piv = a[k][k + 1].clone();
    for i in k + 2..n {
        let aki = a[k][i].clone();
        let ak1i = a[k + 1][i].clone();
        if aki.is_zero_val() && ak1i.is_zero_val() {
            continue;
        }
        for j in i + 1..n {
            let t = (aki.clone() * a[k + 1][j].clone() - a[k][j].clone() * ak1i.clone())
                / piv.clone();
            let v = a[i][j].clone() - t;
            a[j][i] = -v.clone();
            a[i][j] = v;
        }
    }
}

/// Pfaffian with pivoting: first nonzero pivot for exact scalars, largest
/// magnitude otherwise.
pub fn pfaffian<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    check_skew(m)?;
    let n = m.len();
    if n == 0 {
        return Err(Error::NotSkew("empty matrix has no scalar context".into()));
    }
    let mut a = m.clone();
    let mut res = a[0][0].from_i64_like(1);
    let mut k = 0;
    while k < n {
        let mut piv = None;
        let mut best = 0.0;
        for j in k + 1..n {
            if a[k][j].is_zero_val() {
                continue;
            }
            if T::EXACT {
                piv = Some(j);
                break;
            }
            let mag = a[k][j].magnitude();
            if piv.is_none() || mag > best {
                best = mag;
                piv = Some(j);
            }
        }
        let Some(p) = piv else {
            return Ok(a[0][0].zero_like());
        };
        if p != k + 1 {
            swap_index(&mut a, k + 1, p);
            res = -res;
        }
        res = res * a[k][k + 1].clone();
        eliminate(&mut a, k);
        k += 2;
    }
    Ok(res)
}

/// Pfaffians of all leading principal `2s x 2s` blocks, `s = 0..=n/2`,
/// from a single pass without pivoting. Returns `None` if a pivot vanishes.
pub fn leading_pfaffians<T: Scalar>(m: &Matrix<T>) -> Result<Option<Vec<T>>> {
    check_skew(m)?;
    let n = m.len();
    let one = match m.first() {
        Some(r) => r[0].from_i64_like(1),
        None => return Err(Error::NotSkew("empty matrix has no scalar context".into())),
    };
    let mut a = m.clone();
    let mut out = vec![one.clone()];
    let mut acc = one;
    let mut k = 0;
    while k < n {
        if a[k][k + 1].is_zero_val() {
            return Ok(None);
        }
        acc = acc * a[k][k + 1].clone();
        out.push(acc.clone());
        eliminate(&mut a, k);
        k += 2;
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, Rational};

    fn skew(vals: &[(usize, usize, i64)], n: usize) -> Matrix<Rational> {
        let mut m = vec![vec![rat(0, 1); n]; n];
        for &(i, j, v) in vals {
            m[i][j] = rat(v, 1);
            m[j][i] = rat(-v, 1);
        }
        m
    }

    #[test]
    fn two_by_two() {
        let m = skew(&[(0, 1, 5)], 2);
        assert_eq!(pfaffian(&m).unwrap(), rat(5, 1));
    }

    #[test]
    fn block_sum_multiplies() {
        let m = skew(&[(0, 1, 3), (2, 3, -4)], 4);
        assert_eq!(pfaffian(&m).unwrap(), rat(-12, 1));
    }

    #[test]
    fn four_by_four_formula() {
        // Pf = a01 a23 - a02 a13 + a03 a12
        let m = skew(&[(0, 1, 2), (0, 2, 3), (0, 3, 5), (1, 2, 7), (1, 3, 11), (2, 3, 13)], 4);
        assert_eq!(pfaffian(&m).unwrap(), rat(2 * 13 - 3 * 11 + 5 * 7, 1));
    }

    #[test]
    fn zero_leading_pivot_needs_swap() {
        let m = skew(&[(0, 2, 1), (1, 3, 1)], 4);
        assert_eq!(pfaffian(&m).unwrap(), rat(-1, 1));
        assert!(leading_pfaffians(&m).unwrap().is_none());
    }

    #[test]
    fn rejects_odd_and_nonskew() {
        let m = vec![vec![rat(0, 1); 3]; 3];
        assert!(pfaffian(&m).is_err());
        let mut m = skew(&[(0, 1, 1)], 2);
        m[1][0] = rat(1, 1);
        assert!(pfaffian(&m).is_err());
    }

    #[test]
    fn float_pfaffian_agrees() {
        let m: Matrix<f64> = skew(&[(0, 1, 2), (0, 2, 3), (0, 3, 5), (1, 2, 7), (1, 3, 11), (2, 3, 13)], 4)
            .iter()
            .map(|r| r.iter().map(crate::numeric::rational_to_f64).collect())
            .collect();
        assert!((pfaffian(&m).unwrap() - 28.0).abs() < 1e-12);
        let lead = leading_pfaffians(&m).unwrap().unwrap();
        assert!((lead[1] - 2.0).abs() < 1e-12 && (lead[2] - 28.0).abs() < 1e-12);
    }
}
