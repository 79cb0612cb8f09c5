//! The Pfaffian point process of free diagonal-adjacent vertical edges on
//! `L_n = {0, ..., n-1}`, its gap probabilities and the law of `max T_n`.
//!
//! All contour integrals reduce to residues at integer poles. For a fixed
//! `m`, the values `Gbar(m,0,y)` for `0 <= y < n` are the coefficients of
//! `(-1)^m Q_m(r) / D_m` with `Q_m(r) = sum_k N_{m,k} r^{2k} (1+r)^{m-k}`,
//! where `D_m = (3m+2)!/(m+1)!` clears every denominator of `p(m,k,0)`;
//! `Hbar` uses `(1+r) Q_m(r)` instead.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, catalan, factorial, BigFloat, Rational, Scalar};
use crate::pfaffian::{leading_pfaffians, pfaffian, Matrix};

/// `p(n,k,l)`; zero when `k < l`.
pub fn p_coeff(n: usize, k: usize, l: usize) -> Result<Rational> {
    if k > n || l > n {
        return Err(Error::OutOfRange(format!("p({n},{k},{l}) needs k, l <= n")));
    }
    Ok(p_raw(n as u64, k as u64, l as u64))
}

fn p_raw(n: u64, k: u64, l: u64) -> Rational {
    if k < l {
        return Rational::zero();
    }
    let num = factorial(n + k - 2 * l + 1) * factorial(2 * n - k - l + 1);
    let den = factorial(k - l) * factorial(3 * n - k + 2 - 2 * l);
    let sign = if k % 2 == 0 { 1 } else { -1 };
    let extra = BigInt::from(sign * (3 * n as i64 - 3 * k as i64 + 2)) * catalan(n - k);
    Rational::new(num * extra, den)
}

/// `(3m+2)! / (m+1)!`.
fn common_denominator(m: u64) -> BigInt {
    ((m + 2)..=(3 * m + 2)).fold(BigInt::one(), |acc, v| acc * v)
}

fn sign(m: usize) -> i64 {
    if m % 2 == 0 {
        1
    } else {
        -1
    }
}

fn gbar0(m: usize, y: i64) -> Rational {
    if y < 0 {
        return Rational::zero();
    }
    let mut s = Rational::zero();
    for k in 0..=((y / 2) as usize).min(m) {
        s += p_raw(m as u64, k as u64, 0)
            * Rational::from_integer(binomial((m - k) as i64, y - 2 * k as i64));
    }
    s * Rational::from_integer(sign(m).into())
}

fn hbar0(m: usize, y: i64) -> Rational {
    if y < 0 {
        return Rational::zero();
    }
    let mut s = Rational::zero();
    for k in 0..=((y / 2) as usize).min(m) {
        s += p_raw(m as u64, k as u64, 0)
            * Rational::from_integer(binomial((m - k + 1) as i64, y - 2 * k as i64));
    }
    s * Rational::from_integer(sign(m).into())
}

fn check_x(n: usize, x: usize) -> Result<()> {
    if x >= n {
        return Err(Error::OutOfRange(format!("x = {x} outside L_{n} = [0, {}]", n as i64 - 1)));
    }
    Ok(())
}

/// `Gbar(n,l,x) = Gbar(n-l,0,x-2l)` by direct residue summation.
pub fn g_bar(n: usize, l: usize, x: usize) -> Result<Rational> {
    check_x(n, x)?;
    if l > n {
        return Ok(Rational::zero());
    }
    Ok(gbar0(n - l, x as i64 - 2 * l as i64))
}

/// `Hbar(n,l,x) = Hbar(n-l,0,x-2l)` by direct residue summation.
pub fn h_bar(n: usize, l: usize, x: usize) -> Result<Rational> {
    check_x(n, x)?;
    if l > n {
        return Ok(Rational::zero());
    }
    Ok(hbar0(n - l, x as i64 - 2 * l as i64))
}

/// `sum_{m=0}^{x} Hbar(n,l,x-m)`.
pub fn h_bar_cumsum(n: usize, l: usize, x: usize) -> Result<Rational> {
    check_x(n, x)?;
    let mut s = Rational::zero();
    for z in 0..=x {
        s += h_bar(n, l, z)?;
    }
    Ok(s)
}

/// Integer coefficients `q_0..q_{len-1}` of `Q_m(r)` and the denominator `D_m`.
fn q_poly(m: usize, len: usize) -> (Vec<BigInt>, BigInt) {
    let d = common_denominator(m as u64);
    let kmax = m.min(len.saturating_sub(1) / 2);
    let mut s = vec![BigInt::zero(); len];
    let times_one_plus_r = |s: &mut Vec<BigInt>| {
        for y in (1..s.len()).rev() {
            let prev = s[y - 1].clone();
            s[y] += prev;
        }
    };
    for k in 0..=kmax {
        if k > 0 {
            times_one_plus_r(&mut s);
        }
        let nk = p_raw(m as u64, k as u64, 0) * Rational::from_integer(d.clone());
        debug_assert!(nk.is_integer());
        if 2 * k < len {
            s[2 * k] += nk.to_integer();
        }
    }
    for _ in kmax..m {
        times_one_plus_r(&mut s);
    }
    (s, d)
}

/// Which `kappa` truncates the kernel sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KappaRule {
    /// `min(floor(x/2), floor(y/2))`, the last index carrying nonzero terms.
    Minimal,
    /// `n`, the largest admissible value.
    Maximal,
    /// A fixed value, clamped below by the minimal one.
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrecisionMode {
    ExactRational,
    /// Result mantissa bits; guard bits for cancellation are added on top.
    BigFloat { bits: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub mode: PrecisionMode,
    pub kappa: KappaRule,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { mode: PrecisionMode::BigFloat { bits: 256 }, kappa: KappaRule::Minimal }
    }
}

impl PrecisionPolicy {
    pub fn exact() -> Self {
        PrecisionPolicy { mode: PrecisionMode::ExactRational, kappa: KappaRule::Minimal }
    }

    pub fn big_float(bits: usize) -> Self {
        PrecisionPolicy { mode: PrecisionMode::BigFloat { bits }, kappa: KappaRule::Minimal }
    }

    fn kappa(&self, n: usize, x: usize, y: usize) -> usize {
        let lo = (x / 2).min(y / 2);
        match self.kappa {
            KappaRule::Minimal => lo,
            KappaRule::Maximal => n.max(lo),
            KappaRule::Fixed(k) => k.max(lo),
        }
    }
}

/// Largest `n` handled in exact-rational mode by [`law_of_max_t`].
pub const EXACT_BUDGET: usize = 40;

/// The 2x2 kernel block `f(x,y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBlock<T> {
    pub x: usize,
    pub y: usize,
    pub f11: T,
    pub f12: T,
    pub f21: T,
    pub f22: T,
}

impl<T: Scalar> KernelBlock<T> {
    pub fn get(&self, i: usize, j: usize) -> &T {
        match (i, j) {
            (1, 1) => &self.f11,
            (1, 2) => &self.f12,
            (2, 1) => &self.f21,
            _ => &self.f22,
        }
    }
}

/// Frozen tables of `Gbar(n,l,x)` and the cumulative sums of `Hbar(n,l,x)`
/// for `0 <= l <= n`, `x in L_n`.
#[derive(Clone, Debug)]
pub struct KernelTables<T> {
    n: usize,
    // indexed [l][x]
    g: Vec<Vec<T>>,
    hc: Vec<Vec<T>>,
    one: T,
}

fn build_tables<T: Scalar>(
    n: usize,
    convert: impl Fn(&BigInt, &BigInt) -> T + Sync,
    one: T,
) -> KernelTables<T> {
    // rows by m = n - l, each shifted right by 2l
    let rows: Vec<(Vec<T>, Vec<T>)> = (0..=n)
        .into_par_iter()
        .map(|l| {
            let m = n - l;
            let (q, d) = q_poly(m, n);
            let d = if m % 2 == 0 { d } else { -d };
            let zero = one.zero_like();
            let mut g = vec![zero.clone(); n];
            let mut hc = vec![zero.clone(); n];
            let mut acc = BigInt::zero();
            for x in 0..n {
                if x < 2 * l {
                    continue;
                }
                let y = x - 2 * l;
                g[x] = convert(&q[y], &d);
                acc += &q[y];
                if y > 0 {
                    acc += &q[y - 1];
                }
                hc[x] = convert(&acc, &d);
            }
            (g, hc)
        })
        .collect();
    let (g, hc) = rows.into_iter().unzip();
    KernelTables { n, g, hc, one }
}

impl KernelTables<Rational> {
    pub fn exact(n: usize) -> Self {
        build_tables(n, |a, b| Rational::new(a.clone(), b.clone()), Rational::one())
    }
}

impl KernelTables<BigFloat> {
    /// Tables at `bits` plus enough guard bits to absorb the cancellation
    /// between table entries of very different size.
    pub fn big_float(n: usize, bits: usize) -> Self {
        let guard = 2 * table_log2_max(n) + 64;
        let w = bits + guard;
        build_tables(n, |a, b| BigFloat::from_ratio(a, b, w), BigFloat::from_i64(1, w))
    }
}

/// Upper bound on `log2 |entry|` over the tables for `n`.
fn table_log2_max(n: usize) -> usize {
    // |Q_m coefficients| <= 2^m * sum |N_{m,k}|; D_m >= 1
    let m = n as u64;
    let d = common_denominator(m);
    let biggest: BigInt = (0..=m).map(|k| (p_raw(m, k, 0) * Rational::from_integer(d.clone())).to_integer().abs()).sum();
    let bits = biggest.bits() as i64 + m as i64 + 2 - d.bits() as i64 + 1;
    bits.max(0) as usize + 8
}

impl<T: Scalar> KernelTables<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    fn zero(&self) -> T {
        self.one.zero_like()
    }

    /// `Gbar(n,l,x)`; zero for `l > n`.
    pub fn g(&self, l: usize, x: usize) -> T {
        self.g.get(l).map(|r| r[x].clone()).unwrap_or_else(|| self.zero())
    }

    /// `sum_{z <= x} Hbar(n,l,z)`; zero for `l > n`.
    pub fn hc(&self, l: usize, x: usize) -> T {
        self.hc.get(l).map(|r| r[x].clone()).unwrap_or_else(|| self.zero())
    }

    fn sign_n(&self) -> T {
        self.one.from_i64_like(sign(self.n))
    }

    fn f11(&self, x: usize, y: usize, kappa: usize) -> T {
        let mut s = self.zero();
        for l in 0..=kappa {
            s = s + self.g(l + 1, x) * self.g(l, y) - self.g(l, x) * self.g(l + 1, y);
        }
        s
    }

    fn f12(&self, x: usize, y: usize, kappa: usize) -> T {
        let mut s = self.zero();
        for l in 0..=kappa {
            s = s + self.g(l + 1, x) * self.hc(l, y) - self.g(l, x) * self.hc(l + 1, y);
        }
        self.sign_n() * self.g(0, x) - s
    }

    fn f22(&self, x: usize, y: usize, kappa: usize) -> T {
        let mut s = self.one.from_i64_like((x as i64 - y as i64).signum());
        for l in 0..=kappa {
            s = s + self.hc(l + 1, x) * self.hc(l, y) - self.hc(l, x) * self.hc(l + 1, y);
        }
        s - self.sign_n() * self.hc(0, x) + self.sign_n() * self.hc(0, y)
    }

    /// `f(x,y)` with the given `kappa` (must be admissible).
    pub fn block_with_kappa(&self, x: usize, y: usize, kappa: usize) -> KernelBlock<T> {
        KernelBlock {
            x,
            y,
            f11: self.f11(x, y, kappa),
            f12: self.f12(x, y, kappa),
            f21: -self.f12(y, x, kappa),
            f22: self.f22(x, y, kappa),
        }
    }

    pub fn block(&self, x: usize, y: usize, policy: &PrecisionPolicy) -> Result<KernelBlock<T>> {
        check_x(self.n, x)?;
        check_x(self.n, y)?;
        Ok(self.block_with_kappa(x, y, policy.kappa(self.n, x, y)))
    }

    /// `J - f` on the window `{0, ..., s-1}`.
    pub fn gap_matrix(&self, s: usize, policy: &PrecisionPolicy) -> Result<Matrix<T>> {
        if s > self.n {
            return Err(Error::OutOfRange(format!("window {s} exceeds n = {}", self.n)));
        }
        self.point_matrix(&(0..s).collect::<Vec<_>>(), policy, true)
    }

    /// The correlation matrix `f` (or `J - f` if `complement`) on `points`.
    fn point_matrix(&self, pts: &[usize], policy: &PrecisionPolicy, complement: bool) -> Result<Matrix<T>> {
        for &x in pts {
            check_x(self.n, x)?;
        }
        let blocks: Vec<Vec<KernelBlock<T>>> = pts
            .par_iter()
            .map(|&x| pts.iter().map(|&y| self.block_with_kappa(x, y, policy.kappa(self.n, x, y))).collect())
            .collect();
        let d = 2 * pts.len();
        let mut m = vec![vec![self.zero(); d]; d];
        for (a, row) in blocks.iter().enumerate() {
            for (b, blk) in row.iter().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        let v = blk.get(i + 1, j + 1).clone();
                        m[2 * a + i][2 * b + j] = if complement { -v } else { v };
                    }
                }
            }
            if complement {
                m[2 * a][2 * a + 1] = m[2 * a][2 * a + 1].clone() + self.one.clone();
                m[2 * a + 1][2 * a] = m[2 * a + 1][2 * a].clone() - self.one.clone();
            }
        }
        Ok(m)
    }

    /// Probability that every point of `pts` (distinct) carries a particle.
    pub fn correlation(&self, pts: &[usize], policy: &PrecisionPolicy) -> Result<T> {
        if pts.is_empty() {
            return Ok(self.one.clone());
        }
        pfaffian(&self.point_matrix(pts, policy, false)?)
    }

    /// `P[no particle in {0..s-1}]` for `s = 0..=n`, from one elimination.
    pub fn gap_probabilities(&self, policy: &PrecisionPolicy) -> Result<Vec<T>> {
        let m = self.gap_matrix(self.n, policy)?;
        if self.n == 0 {
            return Ok(vec![self.one.clone()]);
        }
        match leading_pfaffians(&m)? {
            Some(v) => Ok(v),
            None => (0..=self.n)
                .map(|s| {
                    if s == 0 {
                        Ok(self.one.clone())
                    } else {
                        pfaffian(&self.gap_matrix(s, policy)?)
                    }
                })
                .collect(),
        }
    }
}

fn exact_tables(n: usize) -> Arc<KernelTables<Rational>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<KernelTables<Rational>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&n) {
        return t.clone();
    }
    let t = Arc::new(KernelTables::exact(n));
    cache.lock().unwrap().entry(n).or_insert(t).clone()
}

/// Exact kernel block with the minimal `kappa`.
pub fn kernel_block(n: usize, x: usize, y: usize) -> Result<KernelBlock<Rational>> {
    exact_tables(n).block(x, y, &PrecisionPolicy::exact())
}

/// Exact `P[no particle in {0..s-1}] = P[X^m_n >= s+1]`.
pub fn gap_probability(n: usize, s: usize) -> Result<Rational> {
    if s > n {
        return Err(Error::OutOfRange(format!("s = {s} exceeds n = {n}")));
    }
    if s == 0 {
        return Ok(Rational::one());
    }
    let t = exact_tables(n);
    pfaffian(&t.gap_matrix(s, &PrecisionPolicy::exact())?)
}

/// Exact probability that all `pts` carry particles.
pub fn correlation(n: usize, pts: &[usize]) -> Result<Rational> {
    exact_tables(n).correlation(pts, &PrecisionPolicy::exact())
}

/// Law of `max T_n = n - X_n`, values `-1..=n-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxLaw {
    pub n: usize,
    pub policy: PrecisionPolicy,
    /// `(value, probability)` in increasing value order.
    pub table: Vec<(i64, f64)>,
    /// Exact probabilities (`"p/q"`) in exact mode.
    pub exact: Option<Vec<String>>,
}

impl MaxLaw {
    /// `P[max T_n <= v]`.
    pub fn cdf(&self, v: f64) -> f64 {
        self.table.iter().filter(|(k, _)| (*k as f64) <= v).map(|(_, p)| p).sum()
    }
}

/// `P[max T_n = n - m] = gap(n, m-1) - gap(n, m)`, `m = 1..=n+1`, with
/// `gap(n, n+1) = 0`.
pub fn law_of_max_t(n: usize, policy: &PrecisionPolicy) -> Result<MaxLaw> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let diffs = |gaps: &[f64]| -> Vec<(i64, f64)> {
        let mut t: Vec<(i64, f64)> = (1..=n + 1)
            .map(|m| {
                let next = if m <= n { gaps[m] } else { 0.0 };
                (n as i64 - m as i64, gaps[m - 1] - next)
            })
            .collect();
        t.reverse();
        t
    };
    match policy.mode {
        PrecisionMode::ExactRational => {
            if n > EXACT_BUDGET {
                return Err(Error::Domain(format!("n = {n} exceeds the exact budget {EXACT_BUDGET}")));
            }
            let gaps = exact_tables(n).gap_probabilities(policy)?;
            let mut exact: Vec<(i64, Rational)> = (1..=n + 1)
                .map(|m| {
                    let next = if m <= n { gaps[m].clone() } else { Rational::zero() };
                    (n as i64 - m as i64, gaps[m - 1].clone() - next)
                })
                .collect();
            exact.reverse();
            Ok(MaxLaw {
                n,
                policy: *policy,
                table: exact.iter().map(|(k, p)| (*k, p.to_f64_val())).collect(),
                exact: Some(exact.iter().map(|(_, p)| crate::numeric::rational_string(p)).collect()),
            })
        }
        PrecisionMode::BigFloat { bits } => {
            let gaps = KernelTables::big_float(n, bits).gap_probabilities(policy)?;
            let gaps: Vec<f64> = gaps.iter().map(|g| g.to_f64()).collect();
            Ok(MaxLaw { n, policy: *policy, table: diffs(&gaps), exact: None })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn p_values() {
        // p(1,0,0) = 2! 3! / (0! 5!) * 5 * C_1
        assert_eq!(p_coeff(1, 0, 0).unwrap(), rat(1, 2));
        assert_eq!(p_coeff(3, 2, 1).unwrap(), -p_coeff(2, 1, 0).unwrap());
        assert_eq!(p_coeff(3, 1, 2).unwrap(), rat(0, 1));
        assert!(p_coeff(2, 3, 0).is_err());
    }

    #[test]
    fn shift_identity() {
        for n in 1..=6 {
            for k in 0..=n {
                for l in 0..=k {
                    let s = if l % 2 == 0 { 1 } else { -1 };
                    assert_eq!(
                        p_coeff(n, k, l).unwrap(),
                        p_coeff(n - l, k - l, 0).unwrap() * rat(s, 1)
                    );
                }
            }
        }
    }

    #[test]
    fn tables_match_direct_sums() {
        let n = 5;
        let t = KernelTables::exact(n);
        for l in 0..=n {
            for x in 0..n {
                assert_eq!(t.g(l, x), g_bar(n, l, x).unwrap());
                assert_eq!(t.hc(l, x), h_bar_cumsum(n, l, x).unwrap());
            }
        }
        assert_eq!(g_bar(5, 3, 4).unwrap(), rat(0, 1));
    }

    #[test]
    fn small_gaps() {
        assert_eq!(gap_probability(2, 1).unwrap(), rat(5, 7));
        assert_eq!(gap_probability(2, 2).unwrap(), rat(1, 7));
        assert_eq!(kernel_block(2, 0, 0).unwrap().f12, rat(2, 7));
    }

    #[test]
    fn law_n2() {
        let law = law_of_max_t(2, &PrecisionPolicy::exact()).unwrap();
        assert_eq!(law.table.iter().map(|p| p.0).collect::<Vec<_>>(), vec![-1, 0, 1]);
        assert_eq!(law.exact.unwrap(), vec!["1/7", "4/7", "2/7"]);
    }

    use crate::combinatorics::{enumerate_matchings, enumerate_pcsm, top_path};
    use crate::numeric::rational_to_f64;
    use num_complex::Complex64;

    fn freq(hits: usize, total: usize) -> Rational {
        rat(hits as i64, total as i64)
    }

    #[test]
    fn gaps_and_correlations_match_enumeration() {
        for n in 1..=5 {
            let ms = enumerate_matchings(n, 6).unwrap();
            for s in 0..=n {
                let hits = ms.iter().filter(|m| (0..s).all(|k| !m.particle_at(k))).count();
                assert_eq!(gap_probability(n, s).unwrap(), freq(hits, ms.len()), "gap n={n} s={s}");
            }
            let mut sets: Vec<Vec<usize>> = vec![];
            for a in 0..n {
                sets.push(vec![a]);
                for b in a + 1..n {
                    sets.push(vec![a, b]);
                    for c in b + 1..n {
                        sets.push(vec![a, b, c]);
                    }
                }
            }
            for pts in sets {
                let hits = ms.iter().filter(|m| pts.iter().all(|&k| m.particle_at(k))).count();
                assert_eq!(correlation(n, &pts).unwrap(), freq(hits, ms.len()), "n={n} {pts:?}");
            }
        }
    }

    #[test]
    fn kappa_independent_and_antisymmetric() {
        for n in 1..=10 {
            let t = KernelTables::exact(n);
            for x in 0..n {
                for y in 0..n {
                    let lo = (x / 2).min(y / 2);
                    let a = t.block_with_kappa(x, y, lo);
                    for k in lo + 1..=n + 1 {
                        assert_eq!(a, t.block_with_kappa(x, y, k), "n={n} x={x} y={y} k={k}");
                    }
                    let b = t.block_with_kappa(y, x, lo);
                    assert_eq!(a.f11, -b.f11.clone());
                    assert_eq!(a.f22, -b.f22.clone());
                    assert_eq!(a.f21, -b.f12.clone());
                }
            }
        }
    }

    #[test]
    fn big_float_agrees_with_exact() {
        for n in [7usize, 20, 50] {
            let e = KernelTables::exact(n);
            let b = KernelTables::big_float(n, 128);
            for x in (0..n).step_by(3) {
                for y in (0..n).step_by(4) {
                    let p = PrecisionPolicy::exact();
                    let be = e.block(x, y, &p).unwrap();
                    let bb = b.block(x, y, &PrecisionPolicy::big_float(128)).unwrap();
                    for i in 1..=2 {
                        for j in 1..=2 {
                            let d = (rational_to_f64(be.get(i, j)) - bb.get(i, j).to_f64()).abs();
                            assert!(d < 1e-20 || d <= 1e-15 * rational_to_f64(be.get(i, j)).abs());
                        }
                    }
                }
            }
        }
        let e = law_of_max_t(20, &PrecisionPolicy::exact()).unwrap();
        let b = law_of_max_t(20, &PrecisionPolicy::big_float(128)).unwrap();
        for (p, q) in e.table.iter().zip(&b.table) {
            assert_eq!(p.0, q.0);
            assert!((p.1 - q.1).abs() < 1e-15);
        }
    }

    #[test]
    fn big_float_gaps_at_high_precision() {
        let n = 12;
        let e = KernelTables::exact(n).gap_probabilities(&PrecisionPolicy::exact()).unwrap();
        let b = KernelTables::big_float(n, 128)
            .gap_probabilities(&PrecisionPolicy::big_float(128))
            .unwrap();
        for (p, q) in e.iter().zip(&b) {
            let d = BigFloat::from_rational(p, 256) - q.clone();
            assert!(d.abs().to_f64() < 1e-20);
        }
    }

    #[test]
    fn law_matches_top_paths() {
        for n in 1..=5 {
            let cs = enumerate_pcsm(n, 6).unwrap();
            let law = law_of_max_t(n, &PrecisionPolicy::exact()).unwrap();
            let ex = law.exact.unwrap();
            for (k, (v, _)) in law.table.iter().enumerate() {
                let hits = cs.iter().filter(|c| top_path(c).max() == *v).count();
                assert_eq!(crate::numeric::parse_rational(&ex[k]).unwrap(), freq(hits, cs.len()));
            }
        }
    }

    // G_{n,0,x}(w) in product form
    fn g_integrand(n: i64, x: i64, w: Complex64) -> Complex64 {
        let mut v = Complex64::new((3 * n + 2) as f64, 0.0) - 3.0 * w;
        v *= if (n - x + 1) % 2 == 0 { 1.0 } else { -1.0 } * 2f64.powi((2 * n - x) as i32);
        for j in -n - 1..=x - n - 1 {
            v *= w - j as f64;
        }
        for j in x + 1..=2 * n {
            v *= w - j as f64 / 2.0;
        }
        for j in (2 * n + 2..=3 * n + 2).chain(0..=n) {
            v /= w - j as f64;
        }
        v / (Complex64::new((n + 1) as f64, 0.0) - w)
    }

    fn contour(n: i64, x: i64, h: bool) -> f64 {
        let top = (x / 2) as f64;
        let (c, r) = (top / 2.0, top / 2.0 + 0.5);
        let m = 2000;
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let e = Complex64::from_polar(1.0, th);
            let w = c + r * e;
            let mut f = g_integrand(n, x, w);
            if h {
                f = f * (Complex64::new((n + 1) as f64, 0.0) - w) / (w + (n - x + 1) as f64);
            }
            s += f * r * e;
        }
        (s / m as f64).re
    }

    #[test]
    fn contour_quadrature_oracle() {
        for n in 1..=8usize {
            for x in 0..n {
                for l in 0..=x / 2 {
                    let (m, y) = ((n - l) as i64, (x - 2 * l) as i64);
                    let g = rational_to_f64(&g_bar(n, l, x).unwrap());
                    let h = rational_to_f64(&h_bar(n, l, x).unwrap());
                    let (qg, qh) = (contour(m, y, false), contour(m, y, true));
                    assert!((g - qg).abs() < 1e-9 * (1.0 + g.abs()), "G n={n} l={l} x={x}: {g} vs {qg}");
                    assert!((h - qh).abs() < 1e-9 * (1.0 + h.abs()), "H n={n} l={l} x={x}: {h} vs {qh}");
                }
            }
        }
    }
}
