use serde::{Deserialize, Serialize};

use super::matrices::AsmMatrix;
use crate::error::{Error, Result};

/// `(n,k)`-gog trapezoid: rows `i = 1..=n` holding `g_{i,j}` for
/// `1 <= j <= min(i,k)`. With `k = n` this is a monotone triangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTrapezoid")]
pub struct GogTrapezoid {
    n: usize,
    k: usize,
    rows: Vec<Vec<u32>>,
}

/// `(n,k)`-magog trapezoid: row `i` holds `m_{i,j}` for
/// `max(1, i-k+1) <= j <= i`, stored left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTrapezoid")]
pub struct MagogTrapezoid {
    n: usize,
    k: usize,
    rows: Vec<Vec<u32>>,
}

#[derive(Deserialize)]
struct RawTrapezoid {
    n: usize,
    k: usize,
    rows: Vec<Vec<u32>>,
}

impl TryFrom<RawTrapezoid> for GogTrapezoid {
    type Error = Error;
    fn try_from(r: RawTrapezoid) -> Result<Self> {
        GogTrapezoid::new(r.n, r.k, r.rows)
    }
}

impl TryFrom<RawTrapezoid> for MagogTrapezoid {
    type Error = Error;
    fn try_from(r: RawTrapezoid) -> Result<Self> {
        MagogTrapezoid::new(r.n, r.k, r.rows)
    }
}

fn check_shape(n: usize, k: usize, rows: &[Vec<u32>], len: impl Fn(usize) -> usize) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArray(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    if rows.len() != n {
        return Err(Error::InvalidArray(format!("expected {n} rows, got {}", rows.len())));
    }
    for (idx, r) in rows.iter().enumerate() {
        if r.len() != len(idx + 1) {
            return Err(Error::InvalidArray(format!("row {} has length {}", idx + 1, r.len())));
        }
    }
    Ok(())
}

/// Largest value `g_{i,j}` can take inside a gog triangle of order `n`.
pub(crate) fn gog_cap(n: usize, i: usize, j: usize) -> u32 {
    (n + 1 + j - i) as u32
}

/// Checks the gog conditions between consecutive rows (`prev` is row `i-1`).
pub(crate) fn gog_rows_compatible(prev: &[u32], row: &[u32]) -> bool {
    for (j, &p) in prev.iter().enumerate() {
        if let Some(&g) = row.get(j) {
            if g > p {
                return false;
            }
        }
        if let Some(&g) = row.get(j + 1) {
            if p > g {
                return false;
            }
        }
    }
    true
}

impl GogTrapezoid {
    /// Validates the gog conditions. Entries of a trapezoid must also respect
    /// the cap `g_{i,j} <= n+1-i+j` inherited from the full triangle it is cut
    /// from; for `k = n` this cap already follows from strict row increase.
    pub fn new(n: usize, k: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        check_shape(n, k, &rows, |i| i.min(k))?;
        for (idx, r) in rows.iter().enumerate() {
            let i = idx + 1;
            for (jdx, &g) in r.iter().enumerate() {
                let j = jdx + 1;
                if g < 1 || g > gog_cap(n, i, j) {
                    return Err(Error::InvalidArray(format!("g_({i},{j}) = {g} out of range")));
                }
                if jdx > 0 && r[jdx - 1] >= g {
                    return Err(Error::InvalidArray(format!("row {i} not strictly increasing")));
                }
            }
            if idx > 0 && !gog_rows_compatible(&rows[idx - 1], r) {
                return Err(Error::InvalidArray(format!("rows {} and {i} do not interlace", i - 1)));
            }
        }
        Ok(GogTrapezoid { n, k, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// `g_{i,j}`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.rows[i - 1][j - 1]
    }

    pub(crate) fn from_rows_unchecked(n: usize, k: usize, rows: Vec<Vec<u32>>) -> Self {
        GogTrapezoid { n, k, rows }
    }

    /// The minimal monotone triangle: row `i` is `1, 2, ..., i`.
    pub fn minimal_triangle(n: usize) -> Self {
        GogTrapezoid { n, k: n, rows: (1..=n).map(|i| (1..=i as u32).collect()).collect() }
    }

    /// Removes the bottom-right triangle, keeping `j <= min(i, k)`.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k {
            return Err(Error::InvalidArray(format!("cannot truncate width {} to {k}", self.k)));
        }
        let rows = self.rows.iter().map(|r| r[..r.len().min(k)].to_vec()).collect();
        GogTrapezoid::new(self.n, k, rows)
    }
}

impl MagogTrapezoid {
    pub fn new(n: usize, k: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        check_shape(n, k, &rows, |i| i - (i + 1).saturating_sub(k).max(1) + 1)?;
        let t = MagogTrapezoid { n, k, rows };
        for i in 1..=n {
            for j in t.first_col(i)..=i {
                let m = t.get(i, j);
                if m < 1 || m as usize > j + 1 {
                    return Err(Error::InvalidArray(format!("m_({i},{j}) = {m} out of range")));
                }
                if i < n {
                    if t.defined(i + 1, j + 1) && m > t.get(i + 1, j + 1) {
                        return Err(Error::InvalidArray(format!("m_({i},{j}) > m_({},{})", i + 1, j + 1)));
                    }
                    if t.defined(i + 1, j) && m < t.get(i + 1, j) {
                        return Err(Error::InvalidArray(format!("m_({i},{j}) < m_({},{j})", i + 1)));
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// First column index present in row `i`.
    pub fn first_col(&self, i: usize) -> usize {
        (i + 1).saturating_sub(self.k).max(1)
    }

    pub fn defined(&self, i: usize, j: usize) -> bool {
        i >= 1 && i <= self.n && j >= self.first_col(i) && j <= i
    }

    /// `m_{i,j}`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.rows[i - 1][j - self.first_col(i)]
    }
}

/// Row `i` lists the columns `j` whose partial column sum
/// `sum_{i' <= i} a_{i',j}` equals one.
pub fn asm_to_gog(a: &AsmMatrix) -> Result<GogTrapezoid> {
    let big = a.order();
    if big < 2 {
        return Err(Error::InvalidMatrix("order-1 ASM has an empty gog triangle".into()));
    }
    let n = big - 1;
    let mut partial = vec![0i32; big + 1];
    let mut rows = Vec::with_capacity(n);
    for i in 1..=n {
        for (j, p) in partial.iter_mut().enumerate().skip(1) {
            *p += a.get(i, j) as i32;
        }
        rows.push((1..=big).filter(|&j| partial[j] == 1).map(|j| j as u32).collect());
    }
    GogTrapezoid::new(n, n, rows)
}

/// Inverse of [`asm_to_gog`]; trapezoids with `k < n` are rejected.
pub fn gog_to_asm(g: &GogTrapezoid) -> Result<AsmMatrix> {
    if g.k() != g.n() {
        return Err(Error::InvalidArray(format!(
            "({}, {}) trapezoid is not a full triangle",
            g.n(),
            g.k()
        )));
    }
    let n = g.n();
    let big = n + 1;
    let indicator = |i: usize| -> Vec<i8> {
        let mut b = vec![0i8; big];
        if i == big {
            b.iter_mut().for_each(|x| *x = 1);
        } else if i >= 1 {
            for &j in &g.rows()[i - 1] {
                b[j as usize - 1] = 1;
            }
        }
        b
    };
    let mut e = Vec::with_capacity(big * big);
    let mut prev = indicator(0);
    for i in 1..=big {
        let cur = indicator(i);
        e.extend(cur.iter().zip(&prev).map(|(c, p)| c - p));
        prev = cur;
    }
    AsmMatrix::new(big, e)
}
