//! The Airy function, the 2x2 GOE block kernel and the GOE Tracy-Widom
//! distribution `F_1` as a discretized Fredholm Pfaffian.
//!
//! `Ai` is evaluated from Taylor expansions of `y'' = x y` about the points
//! of a fixed grid. The grid is seeded at the origin with the Maclaurin data
//! (`Ai(0)`, `Ai'(0)`) on the negative axis and, on the positive axis, with
//! the asymptotic expansion at the switch point and stepped backwards,
//! which is the numerically stable direction there. Beyond the switch point
//! the asymptotic expansion is used directly.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pfaffian::pfaffian;

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;

/// `Ai`, `Ai'` and the tail integral `int_x^inf Ai`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AiryValues {
    pub ai: f64,
    pub ai_prime: f64,
    pub tail: f64,
}

/// Piecewise Airy evaluator.
#[derive(Clone, Debug)]
pub struct AiryEvaluator {
    /// Half-width of the Taylor cells; `|x| <= cutoff` is the Maclaurin series.
    pub cutoff: f64,
    /// Above this point the asymptotic expansion is used.
    pub switch: f64,
    /// Smallest supported argument.
    pub lower: f64,
    /// Relative truncation tolerance of the series.
    pub tolerance: f64,
    grid: Vec<AiryValues>,
    defect: f64,
}

fn nz(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(1)).unwrap()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(nz(m)).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Taylor step of `y'' = x y` from `x0` by `h`: `(y, y', int_{x0}^{x0+h} y)`.
fn taylor(x0: f64, y0: f64, yp0: f64, h: f64, tol: f64) -> (f64, f64, f64) {
    // c_{k+2} = (x0 c_k + c_{k-1}) / ((k+2)(k+1))
    let (mut cm1, mut c0, mut c1) = (0.0, y0, yp0);
    let (mut y, mut yp, mut iy) = (y0, 0.0, y0 * h);
    let mut hk = 1.0; // h^k for c0 = c_k
    let mut small = 0;
    for k in 0..400usize {
        // add the contribution of c_{k+1}
        let hk1 = hk * h;
        let term = c1 * hk1;
        y += term;
        yp += (k + 1) as f64 * c1 * hk;
        iy += term * h / (k + 2) as f64;
        let scale = y.abs().max(yp.abs()).max(f64::MIN_POSITIVE);
        if term.abs() <= tol * scale && (c1 * hk).abs() <= tol * scale {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        let c2 = (x0 * c0 + cm1) / ((k + 2) as f64 * (k + 1) as f64);
        (cm1, c0, c1) = (c0, c1, c2);
        hk = hk1;
    }
    (y, yp, iy)
}

fn asymptotic_ai(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    let (mut su, mut sv, mut u, mut last) = (1.0, 1.0, 1.0, f64::INFINITY);
    for k in 1..40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let t = u / zeta.powi(k);
        if t.abs() > last {
            break;
        }
        last = t.abs();
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += s * t;
        sv += s * v / zeta.powi(k);
    }
    (pre / x.powf(0.25) * su, -pre * x.powf(0.25) * sv)
}

fn asymptotic_tail(x: f64) -> f64 {
    // Ai decays like exp(-sqrt(x) t) past x; 4 panels of width 3 suffice
    let (t, w) = gauss_legendre(20);
    let mut s = 0.0;
    for p in 0..4 {
        let a = x + 3.0 * p as f64;
        for (ti, wi) in t.iter().zip(&w) {
            s += 1.5 * wi * asymptotic_ai(a + 1.5 * (ti + 1.0)).0;
        }
    }
    s
}

impl Default for AiryEvaluator {
    fn default() -> Self {
        Self::new(-40.0, 30.0, 1e-17)
    }
}

impl AiryEvaluator {
    const STEP: f64 = 0.5;

    /// Builds the grid on `[lower, switch]` with spacing 1/2.
    pub fn new(lower: f64, switch: f64, tolerance: f64) -> Self {
        let lower = (lower / Self::STEP).floor() * Self::STEP;
        let switch = (switch / Self::STEP).ceil() * Self::STEP;
        let neg = (-lower / Self::STEP).round() as usize;
        let pos = (switch / Self::STEP).round() as usize;
        let mut grid = vec![AiryValues { ai: 0.0, ai_prime: 0.0, tail: 0.0 }; neg + pos + 1];
        let origin = AiryValues { ai: AI0, ai_prime: AIP0, tail: 1.0 / 3.0 };
        grid[neg] = origin;
        for k in (0..neg).rev() {
            let p = grid[k + 1];
            let x0 = lower + (k + 1) as f64 * Self::STEP;
            let (y, yp, iy) = taylor(x0, p.ai, p.ai_prime, -Self::STEP, tolerance);
            grid[k] = AiryValues { ai: y, ai_prime: yp, tail: p.tail - iy };
        }
        let (a, ap) = asymptotic_ai(switch);
        grid[neg + pos] = AiryValues { ai: a, ai_prime: ap, tail: asymptotic_tail(switch) };
        let mut at_origin = origin;
        for k in (neg..neg + pos).rev() {
            let p = grid[k + 1];
            let x0 = lower + (k + 1) as f64 * Self::STEP;
            let (y, yp, iy) = taylor(x0, p.ai, p.ai_prime, -Self::STEP, tolerance);
            let v = AiryValues { ai: y, ai_prime: yp, tail: p.tail - iy };
            if k == neg {
                at_origin = v;
            } else {
                grid[k] = v;
            }
        }
        let defect = (at_origin.ai - AI0)
            .abs()
            .max((at_origin.ai_prime - AIP0).abs())
            .max((at_origin.tail - 1.0 / 3.0).abs());
        AiryEvaluator { cutoff: Self::STEP / 2.0, switch, lower, tolerance, grid, defect }
    }

    /// Shared default evaluator.
    pub fn global() -> &'static AiryEvaluator {
        static E: OnceLock<AiryEvaluator> = OnceLock::new();
        E.get_or_init(AiryEvaluator::default)
    }

    /// Mismatch at the origin between the Maclaurin data and the values
    /// stepped back from the asymptotic region.
    pub fn switch_defect(&self) -> f64 {
        self.defect
    }

    pub fn eval(&self, x: f64) -> Result<AiryValues> {
        if !x.is_finite() || x < self.lower - self.cutoff {
            return Err(Error::Domain(format!("Airy argument {x} outside [{}, inf)", self.lower)));
        }
        if x > self.switch {
            // Ai < 1e-48 here; the tail integral uses its leading term Ai(x)/sqrt(x)
            let (ai, ai_prime) = asymptotic_ai(x);
            return Ok(AiryValues { ai, ai_prime, tail: ai / x.sqrt() });
        }
        let k = ((x - self.lower) / Self::STEP).round() as usize;
        let k = k.min(self.grid.len() - 1);
        let x0 = self.lower + k as f64 * Self::STEP;
        let g = self.grid[k];
        let (ai, ai_prime, iy) = taylor(x0, g.ai, g.ai_prime, x - x0, self.tolerance);
        Ok(AiryValues { ai, ai_prime, tail: g.tail - iy })
    }
}

pub fn airy(x: f64) -> Result<f64> {
    Ok(AiryEvaluator::global().eval(x)?.ai)
}

pub fn airy_prime(x: f64) -> Result<f64> {
    Ok(AiryEvaluator::global().eval(x)?.ai_prime)
}

/// `int_x^inf Ai`.
pub fn airy_tail(x: f64) -> Result<f64> {
    Ok(AiryEvaluator::global().eval(x)?.tail)
}

/// `Ai(x)` by direct quadrature of the contour integral over the two rays
/// `arg z = +-pi/3`.
pub fn airy_contour(x: f64) -> f64 {
    // z = t e^{i pi/3}: z^3 = -t^3, so the integrand is e^{-t^3/3 - x z}
    let (t, w) = gauss_legendre(60);
    let (c, s) = ((PI / 3.0).cos(), (PI / 3.0).sin());
    let mut acc = 0.0;
    for p in 0..8 {
        let a = p as f64;
        for (ti, wi) in t.iter().zip(&w) {
            let r = a + 0.5 * (ti + 1.0);
            let mag = (-r * r * r / 3.0 - x * r * c).exp();
            // Im(e^{i pi/3} e^{-i x r s}) summed over both rays, / pi
            acc += 0.5 * wi * mag * (PI / 3.0 - x * r * s).sin();
        }
    }
    acc / PI
}

/// A Gauss-Legendre grid on `[0, len]` with unit panels.
#[derive(Clone, Debug)]
struct LambdaGrid {
    pts: Vec<f64>,
    wts: Vec<f64>,
}

impl LambdaGrid {
    fn new(len: f64) -> Self {
        let (t, w) = gauss_legendre(16);
        let panels = len.ceil().max(1.0) as usize;
        let mut pts = Vec::with_capacity(16 * panels);
        let mut wts = Vec::with_capacity(16 * panels);
        for p in 0..panels {
            for (ti, wi) in t.iter().zip(&w) {
                pts.push(p as f64 + 0.5 * (ti + 1.0));
                wts.push(0.5 * wi);
            }
        }
        LambdaGrid { pts, wts }
    }

    /// Length so that every argument `x + lambda`, `x >= lo`, reaches the
    /// region where Ai is below machine precision.
    fn for_lower(lo: f64) -> Self {
        Self::new((24.0 - lo).max(8.0))
    }
}

/// Airy data along `x + lambda` for one point.
#[derive(Clone, Debug)]
struct Profile {
    x: f64,
    at: AiryValues,
    a: Vec<f64>,
    ap: Vec<f64>,
    tail: Vec<f64>,
}

impl Profile {
    fn new(x: f64, grid: &LambdaGrid) -> Result<Self> {
        let ev = AiryEvaluator::global();
        let at = ev.eval(x)?;
        let mut a = Vec::with_capacity(grid.pts.len());
        let mut ap = Vec::with_capacity(grid.pts.len());
        let mut tail = Vec::with_capacity(grid.pts.len());
        for &l in &grid.pts {
            let v = ev.eval(x + l)?;
            a.push(v.ai);
            ap.push(v.ai_prime);
            tail.push(v.tail);
        }
        Ok(Profile { x, at, a, ap, tail })
    }
}

/// `[K11, K12, K21, K22 + sgn(x-y)]`: the GOE block with the jump of
/// `K22` removed.
fn smooth_block(p: &Profile, q: &Profile, grid: &LambdaGrid) -> [f64; 4] {
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    for k in 0..grid.pts.len() {
        let w = grid.wts[k];
        s11 += w * (p.a[k] * q.ap[k] - p.ap[k] * q.a[k]);
        s12 += w * p.a[k] * q.a[k];
        s22 += w * (p.a[k] * q.tail[k] - q.a[k] * p.tail[k]);
    }
    let k12 = s12 + 0.5 * p.at.ai * (1.0 - q.at.tail);
    // K21(x, y) = -K12(y, x); the overlap integral is symmetric
    let k21 = -(s12 + 0.5 * q.at.ai * (1.0 - p.at.tail));
    [0.25 * s11, k12, k21, s22 - p.at.tail + q.at.tail]
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The 2x2 block `K_GOE(x, y)`.
pub fn kgoe_block(x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    let grid = LambdaGrid::for_lower(x.min(y));
    let (p, q) = (Profile::new(x, &grid)?, Profile::new(y, &grid)?);
    let b = smooth_block(&p, &q, &grid);
    Ok([[b[0], b[1]], [b[2], b[3] - sgn(x - y)]])
}

/// `K_GOE^{ij}(x, y)`, `i, j` in `{1, 2}`.
pub fn kgoe(i: usize, j: usize, x: f64, y: f64) -> Result<f64> {
    if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
        return Err(Error::OutOfRange(format!("block index ({i},{j})")));
    }
    Ok(kgoe_block(x, y)?[i - 1][j - 1])
}

/// Change of variables from the reference interval `[-1, 1]` onto
/// `(s, s + truncation)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeMap {
    /// `x = s - log(1 - u)`, `u` uniform image of `[-1, 1]` in `(0, 1 - e^{-L})`.
    Log,
    /// `x = s + L (t + 1) / 2`.
    Linear,
}

/// Gauss-Legendre rule carried to `(s, s + truncation)` by a [`NodeMap`],
/// with the spectral integration matrix used to discretize `sgn`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: usize,
    pub truncation: f64,
    pub map: NodeMap,
    t: Vec<f64>,
    w: Vec<f64>,
    /// `e[a][b] = (2 S[a][b] - w_b) / w_b`, `S[a][b]` the weight of `t_b`
    /// in `int_{-1}^{t_a}`; invariant under monotone maps.
    e: Vec<Vec<f64>>,
}

/// Default node count.
pub const DEFAULT_NODES: usize = 40;
/// Default truncation length above `s`.
pub const DEFAULT_TRUNCATION: f64 = 16.0;

fn legendre_table(t: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    let mut p = vec![vec![1.0; t.len()], t.to_vec()];
    for k in 1..kmax {
        let row: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(i, &x)| ((2 * k + 1) as f64 * x * p[k][i] - k as f64 * p[k - 1][i]) / (k + 1) as f64)
            .collect();
        p.push(row);
    }
    p
}

impl QuadratureRule {
    pub fn new(nodes: usize, truncation: f64) -> Result<Self> {
        Self::with_map(nodes, truncation, NodeMap::Linear)
    }

    pub fn with_map(nodes: usize, truncation: f64, map: NodeMap) -> Result<Self> {
        if nodes < 2 || !(truncation > 0.0) {
            return Err(Error::Domain(format!("invalid rule: {nodes} nodes, truncation {truncation}")));
        }
        let (t, w) = gauss_legendre(nodes);
        let m = nodes;
        let p = legendre_table(&t, m + 1);
        // ip[k][a] = int_{-1}^{t_a} P_k
        let ip: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                if k == 0 {
                    t.iter().map(|x| x + 1.0).collect()
                } else {
                    (0..m).map(|a| (p[k + 1][a] - p[k - 1][a]) / (2 * k + 1) as f64).collect()
                }
            })
            .collect();
        let e: Vec<Vec<f64>> = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        let c: f64 = (0..m).map(|k| p[k][b] * (2 * k + 1) as f64 / 2.0 * ip[k][a]).sum();
                        2.0 * c - 1.0
                    })
                    .collect()
            })
            .collect();
        Ok(QuadratureRule { nodes, truncation, map, t, w, e })
    }

    pub fn default_rule() -> Self {
        Self::new(DEFAULT_NODES, DEFAULT_TRUNCATION).unwrap()
    }

    /// Nodes (increasing) and positive weights on `(s, s + truncation)`.
    pub fn points(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let l = self.truncation;
        self.t
            .iter()
            .zip(&self.w)
            .map(|(&t, &w)| match self.map {
                NodeMap::Log => {
                    let half = (1.0 - (-l).exp()) / 2.0;
                    let u = (t + 1.0) * half;
                    (s - (1.0 - u).ln(), w * half / (1.0 - u))
                }
                NodeMap::Linear => (s + l * (t + 1.0) / 2.0, w * l / 2.0),
            })
            .unzip()
    }

    /// `E[a][b]`, with `sum_b E[a][b] w_b f(x_b) ~ int sgn(x_a - y) f(y) dy`.
    fn discrete_sgn(&self) -> &[Vec<f64>] {
        &self.e
    }
}

/// `F_1(s)` with its refinement error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Result {
    pub s: f64,
    /// Value from the doubled rule.
    pub value: f64,
    /// `|F_1 at m nodes - F_1 at 2m nodes|`.
    pub error: f64,
    pub nodes: usize,
}

/// `Pf(J - K_GOE)` on `L^2(s, inf)` for one rule.
pub fn f1_single(s: f64, rule: &QuadratureRule) -> Result<f64> {
    let m = rule.nodes;
    let (x, w) = rule.points(s);
    let grid = LambdaGrid::for_lower(s);
    let profiles: Vec<Profile> = x.par_iter().map(|&xi| Profile::new(xi, &grid)).collect::<Result<_>>()?;
    let e = rule.discrete_sgn();
    let rows: Vec<Vec<[f64; 4]>> = (0..m)
        .into_par_iter()
        .map(|a| (0..m).map(|b| smooth_block(&profiles[a], &profiles[b], &grid)).collect())
        .collect();
    let mut mat = vec![vec![0.0; 2 * m]; 2 * m];
    for a in 0..m {
        for b in 0..m {
            let k = rows[a][b];
            let sw = (w[a] * w[b]).sqrt();
            mat[2 * a][2 * b] = -k[0] * sw;
            mat[2 * a][2 * b + 1] = -k[1] * sw;
            mat[2 * a + 1][2 * b] = -k[2] * sw;
            mat[2 * a + 1][2 * b + 1] = -(k[3] - e[a][b]) * sw;
        }
        mat[2 * a][2 * a + 1] += 1.0;
        mat[2 * a + 1][2 * a] -= 1.0;
    }
    let mut asym: f64 = 0.0;
    for i in 0..2 * m {
        for j in 0..i {
            asym = asym.max((mat[i][j] + mat[j][i]).abs());
            let v = 0.5 * (mat[i][j] - mat[j][i]);
            mat[i][j] = v;
            mat[j][i] = -v;
        }
    }
    if asym > 1e-8 {
        return Err(Error::Numerical(format!("discretized kernel not skew-symmetric: {asym:e}")));
    }
    pfaffian(&mat)
}

/// `F_1(s)` at `rule` and at twice its nodes.
pub fn f1(s: f64, rule: &QuadratureRule) -> Result<F1Result> {
    let coarse = f1_single(s, rule)?;
    let fine_rule = QuadratureRule::with_map(2 * rule.nodes, rule.truncation, rule.map)?;
    let fine = f1_single(s, &fine_rule)?;
    Ok(F1Result { s, value: fine, error: (fine - coarse).abs(), nodes: rule.nodes })
}

/// Partial sum `k <= kmax` of the Fredholm series, each term by nested
/// Gauss-Legendre cubature over the ordered simplex `s < x_1 < ... < x_k`
/// (the summand is symmetric, which absorbs the `1/k!`).
pub fn f1_series(s: f64, kmax: usize) -> Result<f64> {
    f1_series_with(s, kmax, 24)
}

pub fn f1_series_with(s: f64, kmax: usize, m: usize) -> Result<f64> {
    if kmax > 3 {
        return Err(Error::Domain(format!("kmax = {kmax} exceeds 3")));
    }
    let rule = QuadratureRule::new(m, DEFAULT_TRUNCATION)?;
    let grid = LambdaGrid::for_lower(s);
    let mut total = 1.0;
    for k in 1..=kmax {
        // enumerate ordered tuples by nested log maps
        let mut tuples: Vec<(Vec<f64>, f64)> = vec![(vec![], 1.0)];
        for _ in 0..k {
            let mut next = Vec::with_capacity(tuples.len() * m);
            for (pts, wt) in &tuples {
                let lo = pts.last().copied().unwrap_or(s);
                let (x, w) = rule.points(lo);
                for (xi, wi) in x.iter().zip(&w) {
                    let mut p = pts.clone();
                    p.push(*xi);
                    next.push((p, wt * wi));
                }
            }
            tuples = next;
        }
        let term: f64 = tuples
            .par_iter()
            .map(|(pts, wt)| -> Result<f64> {
                let prof: Vec<Profile> = pts.iter().map(|&x| Profile::new(x, &grid)).collect::<Result<_>>()?;
                let mut mat = vec![vec![0.0; 2 * k]; 2 * k];
                for a in 0..k {
                    for b in 0..k {
                        let bl = smooth_block(&prof[a], &prof[b], &grid);
                        mat[2 * a][2 * b] = bl[0];
                        mat[2 * a][2 * b + 1] = bl[1];
                        mat[2 * a + 1][2 * b] = bl[2];
                        mat[2 * a + 1][2 * b + 1] = bl[3] - sgn(prof[a].x - prof[b].x);
                    }
                }
                Ok(wt * pfaffian(&mat)?)
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum();
        total += if k % 2 == 0 { term } else { -term };
    }
    Ok(total)
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        d *= a[k][k];
        if a[k][k] == 0.0 {
            return 0.0;
        }
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    d
}

/// Independent evaluation `F_1(s) = det(I - B_s)` on `L^2(0, inf)` with the
/// scalar kernel `B_s(x, y) = Ai((x + y)/2 + s) / 2`, by Gauss-Legendre on
/// `[0, 24]`.
pub fn f1_determinant(s: f64, nodes: usize) -> Result<f64> {
    let (t, w) = gauss_legendre(nodes);
    let len = 24.0;
    let x: Vec<f64> = t.iter().map(|t| len * (t + 1.0) / 2.0).collect();
    let w: Vec<f64> = w.iter().map(|w| w * len / 2.0).collect();
    let ev = AiryEvaluator::global();
    let mut a = vec![vec![0.0; nodes]; nodes];
    for i in 0..nodes {
        for j in 0..nodes {
            let b = 0.5 * ev.eval((x[i] + x[j]) / 2.0 + s)?.ai * (w[i] * w[j]).sqrt();
            a[i][j] = (i == j) as u8 as f64 - b;
        }
    }
    Ok(determinant(a))
}
