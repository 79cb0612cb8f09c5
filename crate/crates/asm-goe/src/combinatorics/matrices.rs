use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alternating sign matrix of order `n`, entries row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawAsm")]
pub struct AsmMatrix {
    n: usize,
    entries: Vec<i8>,
}

#[derive(Deserialize)]
struct RawAsm {
    n: usize,
    entries: Vec<i8>,
}

impl TryFrom<RawAsm> for AsmMatrix {
    type Error = Error;
    fn try_from(r: RawAsm) -> Result<Self> {
        AsmMatrix::new(r.n, r.entries)
    }
}

fn check_line(vals: impl Iterator<Item = i8>, what: &str) -> Result<()> {
    let mut sum = 0i32;
    let mut last = 0i8;
    for v in vals {
        if !(-1..=1).contains(&v) {
            return Err(Error::InvalidMatrix(format!("{what}: entry {v} not in {{-1,0,1}}")));
        }
        if v != 0 {
            if v == last {
                return Err(Error::InvalidMatrix(format!("{what}: nonzero entries do not alternate")));
            }
            last = v;
        }
        sum += v as i32;
        if sum < 0 || sum > 1 {
            return Err(Error::InvalidMatrix(format!("{what}: partial sum leaves [0,1]")));
        }
    }
    if sum != 1 {
        return Err(Error::InvalidMatrix(format!("{what}: sums to {sum}")));
    }
    Ok(())
}

impl AsmMatrix {
    /// Validates row-major entries of an `n x n` matrix.
    pub fn new(n: usize, entries: Vec<i8>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for order {n}",
                n * n
            )));
        }
        for i in 0..n {
            check_line((0..n).map(|j| entries[i * n + j]), &format!("row {}", i + 1))?;
        }
        for j in 0..n {
            check_line((0..n).map(|i| entries[i * n + j]), &format!("column {}", j + 1))?;
        }
        Ok(AsmMatrix { n, entries })
    }

    pub fn from_rows(rows: &[&[i8]]) -> Result<Self> {
        let n = rows.len();
        Self::new(n, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut e = vec![0; n * n];
        for i in 0..n {
            e[i * n + i] = 1;
        }
        AsmMatrix { n, entries: e }
    }

    pub fn anti_identity(n: usize) -> Self {
        let mut e = vec![0; n * n];
        for i in 0..n {
            e[i * n + n - 1 - i] = 1;
        }
        AsmMatrix { n, entries: e }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Entry `a_{i,j}`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }
}

/// Path corner sum matrix of size `n`, entries row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPcsm")]
pub struct PcsmMatrix {
    n: usize,
    entries: Vec<u32>,
}

#[derive(Deserialize)]
struct RawPcsm {
    n: usize,
    entries: Vec<u32>,
}

impl TryFrom<RawPcsm> for PcsmMatrix {
    type Error = Error;
    fn try_from(r: RawPcsm) -> Result<Self> {
        PcsmMatrix::new(r.n, r.entries)
    }
}

impl PcsmMatrix {
    pub fn new(n: usize, entries: Vec<u32>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!("expected {} entries for size {n}", n * n)));
        }
        let c = |i: usize, j: usize| entries[(i - 1) * n + (j - 1)] as i64;
        let top = n as i64;
        for i in 1..=n {
            for (v, at) in [(c(1, i), (1, i)), (c(i, n), (i, n))] {
                if v != top && v != top - 1 {
                    return Err(Error::InvalidMatrix(format!(
                        "boundary entry c{:?} = {v} not in {{n-1, n}}",
                        at
                    )));
                }
            }
        }
        for i in 1..=n {
            for j in 1..=n {
                if j < n && !(0..=1).contains(&(c(i, j + 1) - c(i, j))) {
                    return Err(Error::InvalidMatrix(format!("row step at ({i},{j})")));
                }
                if i < n && !(0..=1).contains(&(c(i, j) - c(i + 1, j))) {
                    return Err(Error::InvalidMatrix(format!("column step at ({i},{j})")));
                }
            }
        }
        Ok(PcsmMatrix { n, entries })
    }

    pub fn from_rows(rows: &[&[u32]]) -> Result<Self> {
        let n = rows.len();
        Self::new(n, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry `c_{i,j}`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// `c_{i,j}` extended by the boundary padding used by the inverse map,
    /// for `0 <= i, j <= n+1`.
    pub fn padded(&self, i: usize, j: usize) -> i64 {
        let n = self.n;
        if i == 0 || j == n + 1 {
            n as i64
        } else if j == 0 {
            n as i64 - i as i64
        } else if i == n + 1 {
            j as i64 - 1
        } else {
            self.get(i, j) as i64
        }
    }
}

/// `c_{i,j} = n - sum_{r <= i, s <= n+1-j} a_{r,s}` for an ASM of order `n+1`.
pub fn asm_to_pcsm(a: &AsmMatrix) -> Result<PcsmMatrix> {
    let big = a.order();
    if big < 2 {
        return Err(Error::InvalidMatrix("order-1 ASM has no PCSM of positive size".into()));
    }
    let n = big - 1;
    // corner[r][s] = sum over rows <= r, cols <= s
    let mut corner = vec![vec![0i64; big + 1]; big + 1];
    for r in 1..=big {
        for s in 1..=big {
            corner[r][s] =
                a.get(r, s) as i64 + corner[r - 1][s] + corner[r][s - 1] - corner[r - 1][s - 1];
        }
    }
    let mut e = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            e.push((n as i64 - corner[i][n + 1 - j]) as u32);
        }
    }
    PcsmMatrix::new(n, e)
}

/// Inverse of [`asm_to_pcsm`].
pub fn pcsm_to_asm(c: &PcsmMatrix) -> Result<AsmMatrix> {
    let n = c.size();
    let mut e = Vec::with_capacity((n + 1) * (n + 1));
    for i in 1..=n + 1 {
        for j in 1..=n + 1 {
            let v = c.padded(i - 1, n + 1 - j) - c.padded(i, n + 1 - j) - c.padded(i - 1, n + 2 - j)
                + c.padded(i, n + 2 - j);
            e.push(v as i8);
        }
    }
    AsmMatrix::new(n + 1, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_asm() {
        assert!(AsmMatrix::from_rows(&[&[1, 0], &[1, 0]]).is_err());
        assert!(AsmMatrix::from_rows(&[&[1, -1, 1], &[0, 1, 0], &[0, 1, 0]]).is_err());
        assert!(AsmMatrix::from_rows(&[&[0, 1, 0], &[1, -1, 1], &[0, 1, 0]]).is_ok());
    }

    #[test]
    fn order_two_identity() {
        // c_{1,1} = 1 - a_{1,1}
        let c = asm_to_pcsm(&AsmMatrix::identity(2)).unwrap();
        assert_eq!(c.entries(), &[0]);
        let c = asm_to_pcsm(&AsmMatrix::anti_identity(2)).unwrap();
        assert_eq!(c.entries(), &[1]);
    }

    #[test]
    fn order_three_examples() {
        let c = asm_to_pcsm(&AsmMatrix::identity(3)).unwrap();
        assert_eq!(c.entries(), &[1, 1, 0, 1]);
        let c = asm_to_pcsm(&AsmMatrix::anti_identity(3)).unwrap();
        assert_eq!(c.entries(), &[2, 2, 1, 2]);
        let c = PcsmMatrix::from_rows(&[&[1, 2], &[1, 1]]).unwrap();
        let a = pcsm_to_asm(&c).unwrap();
        assert_eq!(a, AsmMatrix::from_rows(&[&[0, 1, 0], &[1, -1, 1], &[0, 1, 0]]).unwrap());
    }

    #[test]
    fn pcsm_validation() {
        assert!(PcsmMatrix::from_rows(&[&[0, 1], &[0, 1]]).is_err());
        assert!(PcsmMatrix::from_rows(&[&[2, 2], &[0, 2]]).is_err());
    }

    #[test]
    fn json_round_trip_validates() {
        let a = AsmMatrix::identity(3);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"n":3,"entries":[1,0,0,0,1,0,0,0,1]}"#);
        let back: AsmMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<AsmMatrix>(r#"{"n":2,"entries":[1,1,0,0]}"#).is_err());
    }
}
