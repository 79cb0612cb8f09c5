use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::arrays::{gog_cap, gog_rows_compatible, gog_to_asm, GogTrapezoid};
use super::matching::{enumerate_matchings, in_magog_slice};
use super::matrices::{asm_to_pcsm, AsmMatrix, PcsmMatrix};
use super::paths::x_gog;
use crate::error::{Error, Result};

/// Default cap on the order for brute-force enumeration.
pub const DEFAULT_ENUM_CAP: usize = 6;
/// Default cap on `n` for trapezoid counting.
pub const DEFAULT_COUNT_CAP: usize = 9;

/// `prod_{i=0}^{n-1} (3i+1)! / (n+i)!`.
pub fn count_asm(n: usize) -> BigUint {
    let fact = |m: usize| (1..=m as u64).fold(BigUint::one(), |acc, k| acc * k);
    let (mut num, mut den) = (BigUint::one(), BigUint::one());
    for i in 0..n {
        num *= fact(3 * i + 1);
        den *= fact(n + i);
    }
    num / den
}

/// All strictly increasing rows of length `len` with entries in
/// `1..=cap(j)`, `j` the 1-based column.
fn increasing_rows(len: usize, cap: impl Fn(usize) -> u32) -> Vec<Vec<u32>> {
    fn rec(j: usize, len: usize, lo: u32, cap: &dyn Fn(usize) -> u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j > len {
            out.push(cur.clone());
            return;
        }
        for v in lo..=cap(j) {
            cur.push(v);
            rec(j + 1, len, v + 1, cap, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, len, 1, &cap, &mut Vec::new(), &mut out);
    out
}

fn gog_row_candidates(n: usize, k: usize, i: usize) -> Vec<Vec<u32>> {
    increasing_rows(i.min(k), |j| gog_cap(n, i, j))
}

/// Every `(n,k)`-gog trapezoid, rows in lexicographic order.
pub fn enumerate_gog_trapezoids(n: usize, k: usize, cap: usize) -> Result<Vec<GogTrapezoid>> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArray(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    let cands: Vec<Vec<Vec<u32>>> = (1..=n).map(|i| gog_row_candidates(n, k, i)).collect();
    let mut out = Vec::new();
    fn rec(n: usize, k: usize, cands: &[Vec<Vec<u32>>], rows: &mut Vec<Vec<u32>>, out: &mut Vec<GogTrapezoid>) {
        let i = rows.len();
        if i == n {
            out.push(GogTrapezoid::from_rows_unchecked(n, k, rows.clone()));
            return;
        }
        for r in &cands[i] {
            if i == 0 || gog_rows_compatible(&rows[i - 1], r) {
                rows.push(r.clone());
                rec(n, k, cands, rows, out);
                rows.pop();
            }
        }
    }
    rec(n, k, &cands, &mut Vec::new(), &mut out);
    Ok(out)
}

/// All ASMs of order `n`, via monotone triangles of order `n-1`.
pub fn enumerate_asm(n: usize, cap: usize) -> Result<Vec<AsmMatrix>> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    match n {
        0 => Err(Error::InvalidMatrix("order must be positive".into())),
        1 => Ok(vec![AsmMatrix::identity(1)]),
        _ => enumerate_gog_trapezoids(n - 1, n - 1, cap)?.iter().map(gog_to_asm).collect(),
    }
}

/// All PCSMs of size `n`, in the order of [`enumerate_asm`]`(n+1)`.
pub fn enumerate_pcsm(n: usize, cap: usize) -> Result<Vec<PcsmMatrix>> {
    if n + 1 > cap {
        return Err(Error::CapExceeded { n: n + 1, cap });
    }
    enumerate_asm(n + 1, cap)?.iter().map(asm_to_pcsm).collect()
}

fn dp_count<R: Clone + Ord>(
    rows: usize,
    candidates: impl Fn(usize) -> Vec<R>,
    compatible: impl Fn(usize, &R, &R) -> bool,
) -> BigUint {
    let mut layer: BTreeMap<R, BigUint> =
        candidates(1).into_iter().map(|r| (r, BigUint::one())).collect();
    for i in 2..=rows {
        let cands = candidates(i);
        let mut next: BTreeMap<R, BigUint> = BTreeMap::new();
        for (prev, w) in &layer {
            for r in &cands {
                if compatible(i, prev, r) {
                    *next.entry(r.clone()).or_insert_with(BigUint::zero) += w;
                }
            }
        }
        layer = next;
    }
    layer.values().sum()
}

fn check_nk(n: usize, k: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArray(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    Ok(())
}

/// Number of `(n,k)`-gog trapezoids, by dynamic programming over rows.
pub fn count_gog_trapezoids(n: usize, k: usize, cap: usize) -> Result<BigUint> {
    check_nk(n, k, cap)?;
    Ok(dp_count(n, |i| gog_row_candidates(n, k, i), |_, p, r| gog_rows_compatible(p, r)))
}

/// Magog row `i` of an `(n,k)` trapezoid, columns `max(1,i-k+1)..=i`.
fn magog_row_candidates(k: usize, i: usize) -> Vec<Vec<u32>> {
    let first = (i + 1).saturating_sub(k).max(1);
    let mut out = Vec::new();
    fn rec(j: usize, last: usize, lo: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if j > last {
            out.push(cur.clone());
            return;
        }
        for v in lo..=(j as u32 + 1) {
            cur.push(v);
            rec(j + 1, last, v, cur, out);
            cur.pop();
        }
    }
    rec(first, i, 1, &mut Vec::new(), &mut out);
    out
}

fn magog_rows_compatible(k: usize, i: usize, prev: &[u32], row: &[u32]) -> bool {
    // prev is row i-1, row is row i
    let fp = i.saturating_sub(k).max(1);
    let fr = (i + 1).saturating_sub(k).max(1);
    let get = |r: &[u32], f: usize, j: usize, last: usize| -> Option<u32> {
        (j >= f && j <= last).then(|| r[j - f])
    };
    for j in fp..i {
        let m = prev[j - fp];
        if let Some(v) = get(row, fr, j + 1, i) {
            if m > v {
                return false;
            }
        }
        if let Some(v) = get(row, fr, j, i) {
            if m < v {
                return false;
            }
        }
    }
    true
}

/// Number of `(n,k)`-magog trapezoids, by dynamic programming over rows.
pub fn count_magog_trapezoids(n: usize, k: usize, cap: usize) -> Result<BigUint> {
    check_nk(n, k, cap)?;
    Ok(dp_count(n, |i| magog_row_candidates(k, i), |i, p, r| magog_rows_compatible(k, i, p, r)))
}

/// Brute-force sizes of `{Y^g_n = m}` (PCSMs whose `n-m` rightmost
/// antidiagonals are frozen at `n`) and `Y^m_n(m)` (matchings with the
/// first `n-m` diagonal-adjacent vertical edges covered).
pub fn trapezoid_slices(n: usize, m: usize, cap: usize) -> Result<(u64, u64)> {
    if m > n {
        return Err(Error::OutOfRange(format!("m = {m} exceeds n = {n}")));
    }
    if n + 1 > cap {
        return Err(Error::CapExceeded { n: n + 1, cap });
    }
    let g = enumerate_pcsm(n, cap)?.iter().filter(|c| x_gog(c) > n - m).count() as u64;
    let mm = enumerate_matchings(n, cap)?.iter().filter(|x| in_magog_slice(x, m)).count() as u64;
    Ok((g, mm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asm_counts() {
        let v: Vec<BigUint> = (1..=7).map(count_asm).collect();
        let e: Vec<BigUint> = [1u32, 2, 7, 42, 429, 7436, 218348].iter().map(|&x| x.into()).collect();
        assert_eq!(v, e);
        for n in 1..=5 {
            assert_eq!(BigUint::from(enumerate_asm(n, 6).unwrap().len()), count_asm(n));
        }
    }

    #[test]
    fn table_entries() {
        let g = |n, k| count_gog_trapezoids(n, k, 9).unwrap();
        let m = |n, k| count_magog_trapezoids(n, k, 9).unwrap();
        assert_eq!(g(4, 2), 219u32.into());
        assert_eq!(g(6, 1), 429u32.into());
        assert_eq!(g(5, 5), 7436u32.into());
        assert_eq!(m(4, 2), 219u32.into());
        assert_eq!(m(6, 1), 429u32.into());
        assert_eq!(m(5, 5), 7436u32.into());
    }

    #[test]
    fn slices() {
        assert_eq!(trapezoid_slices(2, 1, 6).unwrap(), (5, 5));
        assert_eq!(trapezoid_slices(2, 2, 6).unwrap(), (7, 7));
        assert_eq!(trapezoid_slices(3, 1, 6).unwrap(), (14, 14));
    }

    #[test]
    fn caps() {
        assert!(enumerate_asm(7, 6).is_err());
        assert!(count_gog_trapezoids(10, 1, 9).is_err());
    }
}
