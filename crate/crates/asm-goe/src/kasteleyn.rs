//! Kasteleyn matrix of `G_n^m`, its closed-form inverse and local edge
//! statistics.
//!
//! Contour integrals over `Gamma_0` are coefficient extractions:
//! `[r^{i-2k-1}] (1+r)^{n-k}/(1-r)` is a partial binomial sum and
//! `[r^{i-2k}] (1+r)^{n-k}` a single binomial. The inner `s`-integrals
//! collapse to `1[l2 = l1+1] - 1[l2 = l1-1]`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{dimer_graph, DimerGraph, Vertex};
use crate::error::{Error, Result};
use crate::kernel::p_coeff;
use crate::numeric::{binomial, Rational};
use crate::pfaffian::{pfaffian, Matrix};

/// Signed Kasteleyn matrix, rows and columns in the lexicographic vertex
/// order of [`DimerGraph`].
#[derive(Clone, Debug)]
pub struct KasteleynMatrix {
    n: usize,
    graph: Arc<DimerGraph>,
    entries: Vec<Vec<i8>>,
}

fn k_orient(x: Vertex, y: Vertex) -> bool {
    let even = (x.0 + x.1).rem_euclid(2) == 0;
    (even && x.1 == y.1 && x.0 - y.0 == 1)
        || (even && (y.1 - x.1).abs() == 1 && x.0 == y.0)
        || (x.0 == x.1 && y.0 == y.1 && y.0 == x.0 - 1)
}

/// Builds `K_n = k_n - k_n^T` and checks that every bounded face has an odd
/// number of counter-clockwise arrows.
pub fn build_kasteleyn(n: usize) -> Result<KasteleynMatrix> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let graph = dimer_graph(n);
    let v = graph.vertices();
    let nv = v.len();
    let mut entries = vec![vec![0i8; nv]; nv];
    for &(a, b, _) in graph.edges() {
        let val = k_orient(v[a], v[b]) as i8 - k_orient(v[b], v[a]) as i8;
        if val == 0 {
            return Err(Error::FaceParity(format!("edge {:?}-{:?} is unoriented", v[a], v[b])));
        }
        entries[a][b] = val;
        entries[b][a] = -val;
    }
    let k = KasteleynMatrix { n, graph, entries };
    k.check_faces()?;
    Ok(k)
}

impl KasteleynMatrix {
    fn check_faces(&self) -> Result<()> {
        for face in self.graph.faces() {
            let ccw = (0..face.len())
                .filter(|&i| self.entries[face[i]][face[(i + 1) % face.len()]] == 1)
                .count();
            if ccw % 2 == 0 {
                let vs: Vec<Vertex> = face.iter().map(|&i| self.graph.vertices()[i]).collect();
                return Err(Error::FaceParity(format!("{vs:?}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &DimerGraph {
        &self.graph
    }

    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    /// `K_n(x, y)`; zero for non-adjacent or unknown vertices.
    pub fn get(&self, x: Vertex, y: Vertex) -> i8 {
        match (self.graph.vertex_index(x), self.graph.vertex_index(y)) {
            (Some(i), Some(j)) => self.entries[i][j],
            _ => 0,
        }
    }

    pub fn to_rational(&self) -> Matrix<Rational> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
            .collect()
    }

    /// Exact `Pf K_n`; its absolute value is the number of perfect matchings.
    pub fn pfaffian(&self) -> Result<Rational> {
        pfaffian_exact(&self.to_rational())
    }
}

/// Exact Pfaffian of a skew-symmetric rational matrix.
pub fn pfaffian_exact(m: &Matrix<Rational>) -> Result<Rational> {
    pfaffian(m)
}

fn parity(i: i64) -> i64 {
    i.rem_euclid(2)
}

fn ri(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `sum_{m=0}^{i-2k-1} C(n-k, m)`: the residue of `(1+r)^{n-k}/((1-r) r^{i-2k})`.
fn a_coef(n: usize, k: usize, i: i64) -> BigInt {
    let top = i - 2 * k as i64;
    (0..top).map(|m| binomial((n - k) as i64, m)).sum()
}

/// `C(n-k, i-2k)`: the residue of `(1+r)^{n-k}/r^{i-2k+1}`.
fn b_coef(n: usize, k: usize, i: i64) -> BigInt {
    binomial((n - k) as i64, i - 2 * k as i64)
}

fn check_i(n: usize, i: usize) -> Result<()> {
    if i >= 2 * n {
        return Err(Error::OutOfRange(format!("index {i} outside [0, {}]", 2 * n - 1)));
    }
    Ok(())
}

/// Coefficient tables for the closed-form inverse of `K_n`, valid for all
/// indices `0..=2n`.
#[derive(Debug)]
struct InverseTables {
    h0: Vec<Rational>,
    h1: Vec<Rational>,
    t: [Vec<Vec<Rational>>; 4],
}

impl InverseTables {
    fn build(n: usize) -> Self {
        let len = 2 * n + 1;
        let p: Vec<Vec<Rational>> =
            (0..=n).map(|k| (0..=n).map(|l| p_coeff(n, k, l).unwrap()).collect()).collect();
        let coef = |b: usize, k: usize, i: i64| if b == 0 { a_coef(n, k, i) } else { b_coef(n, k, i) };
        // u[b][l][i] = sum_{k >= l} p(n,k,l) * (A or B)(k,i)
        let u: [Vec<Vec<Rational>>; 2] = [0, 1].map(|b| {
            (0..=n + 1)
                .map(|l| {
                    (0..len as i64)
                        .map(|i| {
                            (l..=n).fold(Rational::zero(), |acc, k| {
                                acc + &p[k][l] * Rational::from_integer(coef(b, k, i))
                            })
                        })
                        .collect()
                })
                .collect()
        });
        let h0: Vec<Rational> = (0..len as i64)
            .map(|i| -ri(parity(i + 1)) + u[0][0][i as usize].clone())
            .collect();
        let h1: Vec<Rational> = u[1][0].clone();
        let quad = |a: usize, b: usize, i: usize, j: usize| {
            (0..=n).fold(Rational::zero(), |acc, l| {
                acc + &u[a][l][i] * &u[b][l + 1][j] - &u[a][l + 1][i] * &u[b][l][j]
            })
        };
        let mut t: [Vec<Vec<Rational>>; 4] = Default::default();
        for (idx, (a, b)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            t[idx] = (0..len)
                .map(|i| {
                    (0..len)
                        .map(|j| {
                            let (ii, jj) = (i as i64, j as i64);
                            let q = quad(a, b, i, j);
                            match (a, b) {
                                (0, 0) => {
                                    let mut v = q;
                                    if i < j {
                                        v += ri(parity(ii + 1) * parity(jj));
                                    }
                                    if i > j {
                                        v -= ri(parity(ii) * parity(jj + 1));
                                    }
                                    v + ri(parity(jj + 1)) * &h0[i] - ri(parity(ii + 1)) * &h0[j]
                                }
                                (1, 0) => ri(parity(jj + 1)) * &h1[i] + q,
                                (0, 1) => -ri(parity(ii + 1)) * &h1[j] + q,
                                _ => q,
                            }
                        })
                        .collect()
                })
                .collect();
        }
        InverseTables { h0, h1, t }
    }
}

fn tables(n: usize) -> Arc<InverseTables> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<InverseTables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&n) {
        return t.clone();
    }
    let t = Arc::new(InverseTables::build(n));
    cache.lock().unwrap().entry(n).or_insert(t).clone()
}

/// `h_n^{0,b}(i)`.
pub fn h0b(n: usize, i: usize) -> Result<Rational> {
    check_i(n, i)?;
    Ok(tables(n).h0[i].clone())
}

/// `h_n^{1,b}(i)`.
pub fn h1b(n: usize, i: usize) -> Result<Rational> {
    check_i(n, i)?;
    Ok(tables(n).h1[i].clone())
}

/// The four `t_n` kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TVariant {
    T00,
    T10,
    T01,
    T11,
}

impl TVariant {
    fn idx(self) -> usize {
        match self {
            TVariant::T00 => 0,
            TVariant::T10 => 1,
            TVariant::T01 => 2,
            TVariant::T11 => 3,
        }
    }
}

/// `t_n^{a,b}(i, j)` for `0 <= i, j <= 2n-1`.
pub fn t_matrix(n: usize, variant: TVariant, i: usize, j: usize) -> Result<Rational> {
    check_i(n, i)?;
    check_i(n, j)?;
    Ok(tables(n).t[variant.idx()][i][j].clone())
}

/// Vertex coordinates split as `(x1, x1 + 2 x2' + eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseEntryRequest {
    pub i1: usize,
    pub i2: usize,
    pub eps_i: u8,
    pub j1: usize,
    pub j2: usize,
    pub eps_j: u8,
}

impl InverseEntryRequest {
    pub fn from_vertices(x: Vertex, y: Vertex) -> Result<Self> {
        let split = |v: Vertex| -> Result<(usize, usize, u8)> {
            let d = v.1 - v.0;
            if v.0 < 0 || d < 0 {
                return Err(Error::OutOfRange(format!("{v:?} is not a vertex")));
            }
            Ok((v.0 as usize, (d / 2) as usize, (d % 2) as u8))
        };
        let (i1, i2, eps_i) = split(x)?;
        let (j1, j2, eps_j) = split(y)?;
        Ok(InverseEntryRequest { i1, i2, eps_i, j1, j2, eps_j })
    }

    pub fn x(&self) -> Vertex {
        (self.i1 as i64, (self.i1 + 2 * self.i2 + self.eps_i as usize) as i64)
    }

    pub fn y(&self) -> Vertex {
        (self.j1 as i64, (self.j1 + 2 * self.j2 + self.eps_j as usize) as i64)
    }

    /// Coordinates must name vertices of `G_n^m`. The formulas are applied
    /// for `x1 = 2n` as well, where they remain valid.
    fn validate(&self, n: usize) -> Result<()> {
        let g = dimer_graph(n);
        for (v, (a, b, e)) in [(self.x(), (self.i1, self.i2, self.eps_i)), (self.y(), (self.j1, self.j2, self.eps_j))] {
            if e > 1 || a > 2 * n || b > n - ((a + e as usize) / 2).min(n) || g.vertex_index(v).is_none() {
                return Err(Error::OutOfRange(format!("{v:?} outside the inverse formula's range")));
            }
        }
        Ok(())
    }
}

/// `C(a, b)` extended by `C(-1, 0) = 1`.
fn binom_ext(a: i64, b: i64) -> BigInt {
    if a == -1 {
        return if b == 0 { BigInt::one() } else { BigInt::zero() };
    }
    binomial(a, b)
}

fn sgn_pow(e: usize) -> Rational {
    ri(if e % 2 == 0 { 1 } else { -1 })
}

/// `K_n^{-1}(x, y)` from the closed form.
pub fn kinverse_entry(n: usize, req: &InverseEntryRequest) -> Result<Rational> {
    req.validate(n)?;
    let t = tables(n);
    Ok(kinverse_from(&t, req))
}

fn kinverse_from(t: &InverseTables, r: &InverseEntryRequest) -> Rational {
    let (i1, i2, j1, j2) = (r.i1 as i64, r.i2 as i64, r.j1 as i64, r.j2 as i64);
    let bi = |a: i64, b: i64| Rational::from_integer(binom_ext(a, b));
    match (r.eps_i, r.eps_j) {
        (1, 1) => {
            let mut s = Rational::zero();
            for l1 in 0..=i1 {
                let c1 = bi(i2 - 1 + l1, l1);
                if c1.is_zero() {
                    continue;
                }
                for l2 in 0..=j1 {
                    let c2 = bi(j2 - 1 + l2, l2);
                    if c2.is_zero() {
                        continue;
                    }
                    s += sgn_pow((l1 + l2) as usize) * &c1 * c2 * &t.t[3][(i1 - l1) as usize][(j1 - l2) as usize];
                }
            }
            sgn_pow((i2 + j2) as usize) * s
        }
        (0, 0) => {
            let mut s = Rational::zero();
            for l1 in 0..=i2 {
                for l2 in 0..=j2 {
                    s += bi(i2, l1) * bi(j2, l2) * &t.t[0][(i1 + l1) as usize][(j1 + l2) as usize];
                }
            }
            sgn_pow((i2 + j2) as usize) * s
        }
        (1, 0) => {
            let mut s = Rational::zero();
            for l1 in 0..=i1 {
                let c1 = bi(i2 - 1 + l1, l1);
                if c1.is_zero() {
                    continue;
                }
                for l2 in 0..=j2 {
                    s += sgn_pow(l1 as usize) * &c1 * bi(j2, l2) * &t.t[1][(i1 - l1) as usize][(j1 + l2) as usize];
                }
            }
            let (x, y) = (r.x(), r.y());
            if x.0 >= y.0 && x.0 + x.1 < y.0 + y.1 {
                s -= bi(j2 - i2 - 1, i1 - j1);
            }
            sgn_pow((i2 + j2) as usize) * s
        }
        _ => {
            let swapped = InverseEntryRequest {
                i1: r.j1,
                i2: r.j2,
                eps_i: r.eps_j,
                j1: r.i1,
                j2: r.i2,
                eps_j: r.eps_i,
            };
            -kinverse_from(t, &swapped)
        }
    }
}

/// `K_n^{-1}` assembled entrywise from the closed form, in vertex order.
pub fn kinverse_matrix(n: usize) -> Result<Matrix<Rational>> {
    use rayon::prelude::*;
    let g = dimer_graph(n);
    let t = tables(n);
    let v = g.vertices();
    Ok(v.par_iter()
        .map(|&x| {
            v.iter()
                .map(|&y| kinverse_from(&t, &InverseEntryRequest::from_vertices(x, y).unwrap()))
                .collect()
        })
        .collect())
}

/// `P[e_1, ..., e_m all covered] = prod K_n(v_{2k-1}, v_{2k}) Pf((K^{-1}(v_i, v_j))^T)`.
pub fn local_stat_prob(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Rational> {
    if edges.is_empty() {
        return Ok(Rational::one());
    }
    let k = build_kasteleyn(n)?;
    let mut pts = Vec::with_capacity(2 * edges.len());
    let mut sign = Rational::one();
    for &(a, b) in edges {
        let kv = k.get(a, b);
        if kv == 0 {
            return Err(Error::NotAnEdge(format!("{a:?}-{b:?}")));
        }
        sign *= ri(kv as i64);
        pts.push(a);
        pts.push(b);
    }
    for (i, p) in pts.iter().enumerate() {
        if pts[..i].contains(p) {
            return Err(Error::NotAnEdge(format!("vertex {p:?} used twice")));
        }
    }
    let t = tables(n);
    let m: Matrix<Rational> = pts
        .iter()
        .map(|&x| {
            pts.iter()
                .map(|&y| {
                    // transpose: entry (i,j) holds K^{-1}(v_j, v_i)
                    let r = InverseEntryRequest::from_vertices(y, x)?;
                    r.validate(n)?;
                    Ok(kinverse_from(&t, &r))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(sign * pfaffian_exact(&m)?)
}

/// `(2 pi i)^{-2} ∮∮ (s1-s2) / ((s1 s2 - 1) s1^{l1+1} s2^{l2+1}) ds1 ds2`
/// over small circles about 0, in closed form.
pub fn s_integral(l1: usize, l2: usize) -> i64 {
    (l2 == l1 + 1) as i64 - (l1 == l2 + 1) as i64
}

/// The same double integral by the trapezoid rule on `|s1| = |s2| = 1/2`
/// with `nodes` points per circle.
pub fn s_integral_quadrature(l1: usize, l2: usize, nodes: usize) -> f64 {
    use num_complex::Complex64;
    let ring: Vec<Complex64> = (0..nodes)
        .map(|k| Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * k as f64 / nodes as f64))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for &s1 in &ring {
        for &s2 in &ring {
            // ds / (2 pi i) = s dtheta / (2 pi)
            let f = (s1 - s2) / ((s1 * s2 - 1.0) * s1.powi(l1 as i32 + 1) * s2.powi(l2 as i32 + 1));
            acc += f * s1 * s2;
        }
    }
    (acc / (nodes * nodes) as f64).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use num_traits::Signed;

    #[test]
    fn small_pfaffians() {
        assert_eq!(build_kasteleyn(1).unwrap().pfaffian().unwrap().abs(), rat(2, 1));
        assert_eq!(build_kasteleyn(2).unwrap().pfaffian().unwrap().abs(), rat(7, 1));
    }

    #[test]
    fn skew() {
        let k = build_kasteleyn(3).unwrap();
        let e = k.entries();
        for i in 0..e.len() {
            for j in 0..e.len() {
                assert_eq!(e[i][j], -e[j][i]);
            }
        }
    }

    #[test]
    fn edge_probability_n2() {
        assert_eq!(local_stat_prob(2, &[((0, 1), (0, 2))]).unwrap(), rat(5, 7));
        assert_eq!(local_stat_prob(2, &[]).unwrap(), rat(1, 1));
        assert!(local_stat_prob(2, &[((0, 0), (0, 2))]).is_err());
    }

    #[test]
    fn inverse_times_k_is_identity() {
        for n in 1..=4 {
            let k = build_kasteleyn(n).unwrap().to_rational();
            let inv = kinverse_matrix(n).unwrap();
            let nv = k.len();
            for i in 0..nv {
                for j in 0..nv {
                    let s = (0..nv)
                        .filter(|&l| !k[i][l].is_zero())
                        .fold(Rational::zero(), |a, l| a + &k[i][l] * &inv[l][j]);
                    assert_eq!(s, rat((i == j) as i64, 1), "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn range_checks() {
        assert!(h0b(2, 4).is_err());
        assert!(t_matrix(2, TVariant::T11, 0, 4).is_err());
    }

    #[test]
    fn pfaffian_counts_asms() {
        for n in 1..=6 {
            let pf = build_kasteleyn(n).unwrap().pfaffian().unwrap();
            assert_eq!(pf.abs().to_integer(), crate::combinatorics::count_asm(n + 1).into());
        }
    }

    #[test]
    fn s_integral_by_quadrature() {
        for l1 in 0..=10 {
            for l2 in 0..=10 {
                let q = s_integral_quadrature(l1, l2, 96);
                assert!((q - s_integral(l1, l2) as f64).abs() < 1e-10, "{l1} {l2} {q}");
            }
        }
    }

    use num_complex::Complex64;

    // (2 pi i)^{-1} ∮ f(r) dr on |r| = 1/2
    fn r_contour(f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        let m = 256;
        (0..m)
            .map(|k| {
                let r = Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
                f(r) * r
            })
            .sum::<Complex64>()
            / m as f64
    }

    fn r_part(n: usize, k: usize, i: usize, b: usize) -> f64 {
        let e = i as i32 - 2 * k as i32;
        r_contour(|r| {
            let v = (r + 1.0).powi((n - k) as i32);
            if b == 0 {
                v / ((1.0 - r) * r.powi(e))
            } else {
                v / r.powi(e + 1)
            }
        })
        .re
    }

    fn pf(n: usize, k: usize, l: usize) -> f64 {
        crate::numeric::rational_to_f64(&p_coeff(n, k, l).unwrap())
    }

    #[test]
    fn h_and_t_by_quadrature() {
        use crate::numeric::rational_to_f64 as f;
        for n in 1..=4 {
            for i in 0..2 * n {
                let par = ((i + 1) % 2) as f64;
                let q0: f64 = (0..=n).map(|k| pf(n, k, 0) * r_part(n, k, i, 0)).sum::<f64>() - par;
                let q1: f64 = (0..=n).map(|k| pf(n, k, 0) * r_part(n, k, i, 1)).sum();
                assert!((q0 - f(&h0b(n, i).unwrap())).abs() < 1e-9);
                assert!((q1 - f(&h1b(n, i).unwrap())).abs() < 1e-9);
            }
            for (v, a, b) in [(TVariant::T00, 0, 0), (TVariant::T10, 1, 0), (TVariant::T01, 0, 1), (TVariant::T11, 1, 1)] {
                for i in 0..2 * n {
                    for j in 0..2 * n {
                        let mut q = 0.0;
                        for k1 in 0..=n {
                            for l1 in 0..=k1 {
                                for k2 in 0..=n {
                                    for l2 in 0..=k2 {
                                        let s = s_integral_quadrature(l1, l2, 16);
                                        if s.abs() < 1e-12 {
                                            continue;
                                        }
                                        q += pf(n, k1, l1) * pf(n, k2, l2) * r_part(n, k1, i, a) * r_part(n, k2, j, b) * s;
                                    }
                                }
                            }
                        }
                        let (ii, jj) = (i as i64, j as i64);
                        let pi = |x: i64| x.rem_euclid(2) as f64;
                        q += match v {
                            TVariant::T00 => {
                                (if i < j { pi(ii + 1) * pi(jj) } else { 0.0 })
                                    - (if i > j { pi(ii) * pi(jj + 1) } else { 0.0 })
                                    + pi(jj + 1) * f(&h0b(n, i).unwrap())
                                    - pi(ii + 1) * f(&h0b(n, j).unwrap())
                            }
                            TVariant::T10 => pi(jj + 1) * f(&h1b(n, i).unwrap()),
                            TVariant::T01 => -pi(ii + 1) * f(&h1b(n, j).unwrap()),
                            TVariant::T11 => 0.0,
                        };
                        let e = f(&t_matrix(n, v, i, j).unwrap());
                        assert!((q - e).abs() < 1e-8 * (1.0 + e.abs()), "n={n} {v:?} ({i},{j}): {q} vs {e}");
                    }
                }
            }
        }
    }
}
