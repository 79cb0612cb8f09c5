//! Saddle-point functions of the contour integrals for `Gbar`/`Hbar`,
//! their critical points, steepest-descent contours and decay exponents,
//! and the rescaled kernel compared against `K_GOE`.
//!
//! All logarithms are principal. On the real axis an argument with zero
//! imaginary part is given the imaginary part `+0`, so a negative argument
//! contributes `+i pi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goetw::{gauss_legendre, kgoe_block};
use crate::kernel::{KernelTables, PrecisionPolicy};
use crate::numeric::BigFloat;

/// `alpha = 2 - sqrt 3`.
pub const ALPHA: f64 = 0.267_949_192_431_122_7;
/// `2 + sqrt 3`, the other root of `1 - 4a + a^2`.
const BETA: f64 = 3.732_050_807_568_877;

/// The constants of the edge scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scalings {
    pub alpha: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Default for Scalings {
    fn default() -> Self {
        let c1 = 2.0 / 3f64.powf(4.0 / 3.0);
        Scalings { alpha: ALPHA, c1, c0: 1.0 / (2.0 * 3f64.powf(1.0 / 6.0)) }
    }
}

impl Scalings {
    /// Lattice point `[alpha n - c0 n^{1/3} xi]`, if it lies in `0..n`.
    pub fn lattice_point(&self, n: usize, xi: f64) -> Result<usize> {
        let nf = n as f64;
        let x = (self.alpha * nf - self.c0 * nf.cbrt() * xi).floor();
        if x < 0.0 || x >= nf {
            return Err(Error::OutOfRange(format!("xi = {xi} maps to {x}, outside 0..{n}")));
        }
        Ok(x as usize)
    }
}

fn cx(re: f64, im: f64) -> Complex64 {
    // -0.0 + 0.0 == +0.0
    Complex64::new(re, im + 0.0)
}

/// `z log z` with the convention `0 log 0 = 0`.
fn xlogx(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        z
    } else {
        z * z.ln()
    }
}

/// Arguments `c + d w` of the logarithms in `S_1`, with their signs in the
/// sum `sum sign * z log z`.
const S1_TERMS: [(f64, f64, f64); 8] = [
    // (constant, coefficient of w, sign); the a-dependence is added below
    (1.0, 1.0, 1.0),
    (2.0, -1.0, 1.0),
    (2.0, -2.0, 1.0),
    (0.0, -1.0, 1.0),
    (1.0, -1.0, -1.0),
    (1.0, 1.0, -1.0),
    (3.0, -1.0, -1.0),
    (0.0, -2.0, -1.0),
];

fn s1_args(w: Complex64, a: f64) -> [Complex64; 8] {
    let mut out = [Complex64::new(0.0, 0.0); 8];
    for (k, &(c, d, _)) in S1_TERMS.iter().enumerate() {
        let shift = match k {
            5 => -a,
            7 => a,
            _ => 0.0,
        };
        out[k] = cx(c + shift + d * w.re, d * w.im);
    }
    out
}

/// Distance from `w` to the nearest branch cut of the logarithms in `S_1`
/// (the real half-lines where one of the arguments is `<= 0`).
pub fn branch_cut_distance(w: Complex64, a: f64) -> f64 {
    s1_args(w, a)
        .iter()
        .zip(S1_TERMS.iter())
        .map(|(z, &(_, d, _))| {
            let dist = if z.re <= 0.0 { z.im.abs() } else { z.norm() };
            dist / d.abs()
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_cut(w: Complex64, a: f64, eps: f64) -> Result<()> {
    let d = branch_cut_distance(w, a);
    if d < eps {
        return Err(Error::Domain(format!("w = {w} is within {d:e} of a branch cut")));
    }
    Ok(())
}

/// `S_1(w, a)`.
pub fn s1(w: Complex64, a: f64) -> Complex64 {
    s1_args(w, a).iter().zip(S1_TERMS.iter()).map(|(&z, &(_, _, s))| s * xlogx(z)).sum()
}

/// `S_1(w, a)`, refusing points within `eps` of a branch cut.
pub fn s1_checked(w: Complex64, a: f64, eps: f64) -> Result<Complex64> {
    check_cut(w, a, eps)?;
    Ok(s1(w, a))
}

/// `S_2(w; a, lambda, X)`.
pub fn s2(w: Complex64, a: f64, lambda: f64, x: f64, eps: f64) -> Result<Complex64> {
    check_cut(w, a, eps)?;
    let l = |re: f64, im: f64| cx(re, im).ln();
    let (u, v) = (w.re, w.im);
    Ok(-x * l(1.0 + u - a, v) + x * l(a - 2.0 * u, -2.0 * v) - 2.0 * lambda * l(1.0 + u, v)
        + 2.0 * lambda * l(3.0 - u, -v)
        - lambda * l(2.0 - u, -v)
        + lambda * l(-u, -v))
}

/// `S_3(w; a, r)`.
pub fn s3(w: Complex64, a: f64, r: f64, eps: f64) -> Result<Complex64> {
    check_cut(w, a, eps)?;
    let l = |re: f64, im: f64| cx(re, im).ln();
    let (u, v) = (w.re, w.im);
    Ok(2.0 * l(1.0 + u, v) + 2.0 * l(2.0 - u, -v) + l(2.0 - 2.0 * u, -2.0 * v)
        - l(1.0 + u - a, v)
        - 3.0 * l(3.0 - u, -v)
        - l(a - 2.0 * u, -2.0 * v)
        - l(1.0 - u, -v)
        - 1.0
        - 2.0 * r * l(1.0 + u, v)
        + 2.0 * r * l(3.0 - u, -v)
        - r * l(2.0 - u, -v)
        + r * l(-u, -v))
}

/// `d^k S_1 / dw^k` for `k = 1, 2, 3`, from the closed forms.
pub fn s1_derivative(w: Complex64, a: f64, order: usize) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let p = one + w;
    let m = one - w;
    let t = 3.0 - w;
    let q = a - 2.0 * w;
    let h = 2.0 - w;
    let r = one + w - a;
    match order {
        1 => Ok(p.ln() + m.ln() + t.ln() + 2.0 * q.ln() - h.ln() - 2.0 * (2.0 * m).ln() - (-w).ln() - r.ln()),
        2 => Ok(1.0 / p + 1.0 / m - 1.0 / t - 4.0 / q + 1.0 / h - 1.0 / w - 1.0 / r),
        3 => Ok(-1.0 / (p * p) + 1.0 / (m * m) - 1.0 / (t * t) - 8.0 / (q * q) + 1.0 / (h * h)
            + 1.0 / (w * w)
            + 1.0 / (r * r)),
        _ => Err(Error::OutOfRange(format!("derivative order {order}"))),
    }
}

fn disc(a: f64) -> f64 {
    // 1 - 4a + a^2, factored so that it vanishes exactly at alpha
    (a - ALPHA) * (a - BETA)
}

/// The critical points `(w_+(a), w_-(a))` of `S_1(., a)`.
pub fn saddle_points(a: f64) -> Result<(Complex64, Complex64)> {
    if !(a > 0.0 && a < BETA) {
        return Err(Error::Domain(format!("a = {a} outside (0, 2 + sqrt 3)")));
    }
    let root = Complex64::new(disc(a), 0.0).sqrt();
    let num = 4.0 - 10.0 * a + a * a;
    let den = -8.0 - 4.0 * a + a * a;
    let plus = (num + 2.0 * (a - 2.0) * root) / den;
    let minus = (num - 2.0 * (a - 2.0) * root) / den;
    Ok((plus, minus))
}

/// `d w_+ / d a` for `0 < a < alpha`.
pub fn saddle_velocity(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < ALPHA) {
        return Err(Error::Domain(format!("a = {a} outside (0, alpha)")));
    }
    let r = disc(a).sqrt();
    let den = -8.0 - 4.0 * a + a * a;
    Ok((6.0 * (16.0 - 4.0 * a + a * a) * r - 6.0 * (16.0 - 28.0 * a + 7.0 * a * a)) / (den * den * r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// `S_1''(w_{+-}(a), a)` from its closed form in `a`.
pub fn s1_second_derivative_at_saddle(a: f64, branch: Branch) -> Result<f64> {
    if !(a > 0.0 && a < ALPHA) {
        return Err(Error::Domain(format!("a = {a} outside (0, alpha)")));
    }
    let a2 = a * a;
    let a3 = a2 * a;
    let a4 = a3 * a;
    let even = -256.0 + 1296.0 * a - 1428.0 * a2 + 616.0 * a3 - 117.0 * a4 + 12.0 * a4 * a - a4 * a2;
    let odd = (-256.0 + 752.0 * a - 396.0 * a2 + 104.0 * a3 - 13.0 * a4) * disc(a).sqrt();
    let sign = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    };
    Ok(-(even + sign * odd) / (6.0 * (4.0 - a).powi(2) * (2.0 - a) * a2))
}

/// `S_1'''(w_+(alpha), alpha)`.
pub fn s1_third_derivative_at_alpha() -> f64 {
    81.0 / 4.0
}

/// Saddle data at one value of `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleReport {
    pub a: f64,
    pub w_plus: Complex64,
    pub w_minus: Complex64,
    pub s1_dd_plus: f64,
    pub s1_dd_minus: f64,
    /// `g(a) = S_1(w_+(a), a)`.
    pub exponent: f64,
}

/// Saddle points, second derivatives and decay exponent for `0 < a <= alpha`.
/// At `a = alpha` the second derivatives vanish.
pub fn saddle_report(a: f64) -> Result<SaddleReport> {
    if !(a > 0.0 && a <= ALPHA) {
        return Err(Error::Domain(format!("a = {a} outside (0, alpha]")));
    }
    let (w_plus, w_minus) = saddle_points(a)?;
    let (dp, dm) = if a < ALPHA {
        (s1_second_derivative_at_saddle(a, Branch::Plus)?, s1_second_derivative_at_saddle(a, Branch::Minus)?)
    } else {
        (0.0, 0.0)
    };
    Ok(SaddleReport { a, w_plus, w_minus, s1_dd_plus: dp, s1_dd_minus: dm, exponent: s1(w_plus, a).re })
}

/// `(g(a), g'(a))` with `g(a) = S_1(w_+(a), a)`, for `0 < a <= alpha`.
pub fn decay_exponent(a: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && a <= ALPHA) {
        return Err(Error::Domain(format!("a = {a} outside (0, alpha]")));
    }
    let (w, _) = saddle_points(a)?;
    let g = s1(w, a).re;
    let gp = (-1.0 - 2.0 / (disc(a).sqrt() - 1.0)).ln();
    Ok((g, gp))
}

/// Level line `Im S_1 = 0` followed from `w_+(a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourTrace {
    pub a: f64,
    pub points: Vec<Complex64>,
}

impl ContourTrace {
    pub fn endpoint(&self) -> Complex64 {
        *self.points.last().unwrap()
    }

    /// Angle of the first segment.
    pub fn launch_angle(&self) -> f64 {
        (self.points[1] - self.points[0]).arg()
    }

    /// `max |Im S_1|` over the trace.
    pub fn max_imaginary(&self) -> f64 {
        self.points.iter().map(|&w| s1_upper(w, self.a).im.abs()).fold(0.0, f64::max)
    }

    /// `Re S_1` at each point.
    pub fn real_parts(&self) -> Vec<f64> {
        self.points.iter().map(|&w| s1_upper(w, self.a).re).collect()
    }
}

/// `S_1` continued from the upper half plane (real points are limits from
/// above).
fn s1_upper(w: Complex64, a: f64) -> Complex64 {
    if w.im > 0.0 {
        return s1(w, a);
    }
    s1_args(Complex64::new(w.re, 0.0), a)
        .iter()
        .zip(S1_TERMS.iter())
        .map(|(&z, &(_, d, s))| s * xlogx(Complex64::new(z.re, if d > 0.0 { 0.0 } else { -0.0 })))
        .sum()
}

fn s1_prime_upper(w: Complex64, a: f64) -> Complex64 {
    let l = |c: f64, d: f64| {
        let z = Complex64::new(c + d * w.re, d * w.im);
        if w.im > 0.0 {
            z.ln()
        } else {
            Complex64::new(z.re, if d > 0.0 { 0.0 } else { -0.0 }).ln()
        }
    };
    l(1.0, 1.0) + l(1.0, -1.0) + l(3.0, -1.0) + 2.0 * l(a, -2.0) - l(2.0, -1.0) - 2.0 * l(2.0, -2.0) - l(0.0, -1.0)
        - l(1.0 - a, 1.0)
}

const MAX_TRACE_POINTS: usize = 10_000_000;

/// Follows the steepest-descent path of `S_1(., a)` from `w_+(a)` into the
/// upper half plane until it reaches the real axis.
///
/// The path leaves at angle `pi/2` for `a < alpha` and `pi/3` at the
/// double saddle `a = alpha`. Each step is a tangent predictor followed by
/// Newton corrections on `Im S_1` along the normal; steps are halved when
/// the corrector fails to reach `tol`.
pub fn steepest_descent_trace(a: f64, step: f64, tol: f64) -> Result<ContourTrace> {
    if !(a > 0.0 && a <= ALPHA) {
        return Err(Error::Domain(format!("a = {a} outside (0, alpha]")));
    }
    if !(step > 0.0 && tol > 0.0) {
        return Err(Error::Domain("step and tolerance must be positive".into()));
    }
    let (w0, _) = saddle_points(a)?;
    let w0 = Complex64::new(w0.re, 0.0);
    let level = s1_upper(w0, a).im;
    let theta = if a < ALPHA { PI / 2.0 } else { PI / 3.0 };
    let mut points = vec![w0];
    let mut dir = Complex64::from_polar(1.0, theta);
    let mut w = w0;
    // a short first step keeps the measured launch direction sharp
    let mut h = step * 1e-2;
    let min_step = step * 1e-9;

    let correct = |mut z: Complex64| -> Option<Complex64> {
        for _ in 0..20 {
            let f = s1_upper(z, a).im - level;
            if f.abs() <= tol * 1e-3 {
                return Some(z);
            }
            let d = s1_prime_upper(z, a);
            if d.norm() == 0.0 {
                return None;
            }
            z -= Complex64::i() * f / d;
        }
        let f = s1_upper(z, a).im - level;
        (f.abs() <= tol).then_some(z)
    };

    loop {
        if points.len() > MAX_TRACE_POINTS {
            return Err(Error::Numerical("trace did not reach the real axis".into()));
        }
        let mut hh = h;
        if w.im + hh * dir.im < 0.0 {
            // land on the axis: solve Im w = 0 along the current direction
            hh = -w.im / dir.im;
        }
        let next = correct(w + hh * dir);
        match next {
            Some(z) if z.im < -tol || (z - w).norm() > 2.0 * hh + tol => {
                h *= 0.5;
                if h < min_step {
                    return Err(Error::Numerical(format!("trace diverged at w = {w}")));
                }
                continue;
            }
            Some(z) => {
                points.push(z);
                let last = z.im.abs() <= tol;
                w = z;
                if last {
                    points.pop();
                    points.push(Complex64::new(z.re, 0.0));
                    return Ok(ContourTrace { a, points });
                }
                let d = s1_prime_upper(w, a);
                let t = -d.conj() / d.norm();
                // keep orientation along the path
                let t = if (t * dir.conj()).re < 0.0 { -t } else { t };
                dir = t;
                h = (h * 1.5).min(step);
            }
            None => {
                h *= 0.5;
                if h < min_step {
                    return Err(Error::Numerical(format!("corrector failed at w = {w}")));
                }
            }
        }
    }
}

/// `(c0 n^{1/3})^{4-i-j} f^{ij}` at the lattice points of `xi`, `eta`.
pub struct RescaledKernel {
    pub n: usize,
    pub scalings: Scalings,
    tables: KernelTables<BigFloat>,
    policy: PrecisionPolicy,
}

impl RescaledKernel {
    pub fn new(n: usize, bits: usize) -> Self {
        RescaledKernel {
            n,
            scalings: Scalings::default(),
            tables: KernelTables::big_float(n, bits),
            policy: PrecisionPolicy::big_float(bits),
        }
    }

    pub fn eval(&self, i: usize, j: usize, xi: f64, eta: f64) -> Result<f64> {
        if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
            return Err(Error::OutOfRange(format!("block index ({i},{j})")));
        }
        Ok(self.eval_block(xi, eta)?[i - 1][j - 1])
    }

    /// All four rescaled entries at once.
    pub fn eval_block(&self, xi: f64, eta: f64) -> Result<[[f64; 2]; 2]> {
        let x = self.scalings.lattice_point(self.n, xi)?;
        let y = self.scalings.lattice_point(self.n, eta)?;
        let b = self.tables.block(x, y, &self.policy)?;
        let scale = self.scalings.c0 * (self.n as f64).cbrt();
        Ok([[scale * scale * b.f11.to_f64(), scale * b.f12.to_f64()], [scale * b.f21.to_f64(), b.f22.to_f64()]])
    }
}

/// Precision used for the big-float kernel tables in this module.
pub const KERNEL_BITS: usize = 128;

/// One-off evaluation of the rescaled kernel; see [`RescaledKernel`] for
/// repeated use.
pub fn rescaled_kernel(n: usize, i: usize, j: usize, xi: f64, eta: f64) -> Result<f64> {
    RescaledKernel::new(n, KERNEL_BITS).eval(i, j, xi, eta)
}

/// One cell of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub xi: f64,
    pub eta: f64,
    pub rescaled: f64,
    pub goe: f64,
    pub abs_err: f64,
}

/// `lo, lo + step, ..., hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let m = ((hi - lo) / step).round() as usize;
    (0..=m).map(|k| lo + k as f64 * step).collect()
}

/// Default grid for the convergence study: `[-3, 3]` in steps of `1/2`.
pub fn default_grid() -> Vec<f64> {
    grid(-3.0, 3.0, 0.5)
}

/// Default sizes for the convergence study.
pub const DEFAULT_SIZES: [usize; 4] = [50, 100, 200, 400];

/// Rescaled kernel vs `K_GOE^{ij}` for each block in `blocks`, each `n` and
/// each cell of `points x points`. Rows are ordered by `n`, block, `xi`, `eta`.
pub fn convergence_study(blocks: &[(usize, usize)], ns: &[usize], points: &[f64]) -> Result<Vec<ConvergenceRow>> {
    for &(i, j) in blocks {
        if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
            return Err(Error::OutOfRange(format!("block index ({i},{j})")));
        }
    }
    let cells: Vec<(f64, f64)> = points.iter().flat_map(|&x| points.iter().map(move |&y| (x, y))).collect();
    let goe: Vec<[[f64; 2]; 2]> = cells.par_iter().map(|&(x, y)| kgoe_block(x, y)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &n in ns {
        let k = RescaledKernel::new(n, KERNEL_BITS);
        let vals: Vec<[[f64; 2]; 2]> = cells.par_iter().map(|&(x, y)| k.eval_block(x, y)).collect::<Result<_>>()?;
        for &(i, j) in blocks {
            for ((&(xi, eta), v), g) in cells.iter().zip(&vals).zip(&goe) {
                let (v, g) = (v[i - 1][j - 1], g[i - 1][j - 1]);
                rows.push(ConvergenceRow { n, i, j, xi, eta, rescaled: v, goe: g, abs_err: (v - g).abs() });
            }
        }
    }
    Ok(rows)
}

/// `sup |rescaled - K_GOE|` per `(n, i, j)`, in the order of first appearance.
pub fn sup_errors(rows: &[ConvergenceRow]) -> Vec<(usize, usize, usize, f64)> {
    let mut out: Vec<(usize, usize, usize, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|e| (e.0, e.1, e.2) == (r.n, r.i, r.j)) {
            Some(e) => e.3 = e.3.max(r.abs_err),
            None => out.push((r.n, r.i, r.j, r.abs_err)),
        }
    }
    out
}

/// Least-squares decay fit of the rescaled kernel away from the edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub n: usize,
    pub m: f64,
    /// `c` in `|f^{11}| ~ C exp(-c (xi + eta))`.
    pub rate11: f64,
    /// `c` in `|f^{12}| ~ C exp(-c xi)`, one fit per `eta` column.
    pub rate12: Vec<(f64, f64)>,
    /// `max |f^{22}|` over the probe grid.
    pub bound22: f64,
    pub points: usize,
}

fn slope(data: &[(f64, f64)]) -> f64 {
    let k = data.len() as f64;
    let mx = data.iter().map(|p| p.0).sum::<f64>() / k;
    let my = data.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = data.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = data.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits the decay of the rescaled kernel over `xi, eta` in `[M, M + 3]`
/// (step `1/2`), the side of the edge away from the particles.
pub fn tail_bound_probe(n: usize, m: f64) -> Result<TailReport> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("M = {m} must be positive")));
    }
    let pts = grid(m, m + 3.0, 0.5);
    let s = Scalings::default();
    let pts: Vec<f64> = pts.into_iter().filter(|&p| s.lattice_point(n, p).is_ok()).collect();
    if pts.len() < 3 {
        return Err(Error::Domain(format!("probe grid for n = {n}, M = {m} has fewer than 3 points")));
    }
    let k = RescaledKernel::new(n, KERNEL_BITS);
    let mut d11 = Vec::new();
    let mut bound22: f64 = 0.0;
    let mut cols: Vec<(f64, Vec<(f64, f64)>)> = pts.iter().map(|&e| (e, Vec::new())).collect();
    for &xi in &pts {
        for (c, &eta) in pts.iter().enumerate() {
            let f11 = k.eval(1, 1, xi, eta)?.abs();
            if f11 > 0.0 && xi != eta {
                d11.push((xi + eta, f11.ln()));
            }
            let f12 = k.eval(1, 2, xi, eta)?.abs();
            if f12 > 0.0 {
                cols[c].1.push((xi, f12.ln()));
            }
            bound22 = bound22.max(k.eval(2, 2, xi, eta)?.abs());
        }
    }
    if d11.len() < 3 {
        return Err(Error::Domain("insufficient nonzero f11 samples".into()));
    }
    let rate12 = cols.into_iter().filter(|(_, d)| d.len() >= 3).map(|(e, d)| (e, -slope(&d))).collect();
    Ok(TailReport { n, m, rate11: -slope(&d11), rate12, bound22, points: pts.len() * pts.len() })
}

/// `points` samples of the limiting top-path curve
/// `x(2-x) + y(2-y) + (2-x)(2-y) = 1`, `x, y in [1, 2]`.
pub fn limit_shape(points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(Error::Domain("need at least two points".into()));
    }
    Ok((0..points)
        .map(|k| {
            let x = 1.0 + k as f64 / (points - 1) as f64;
            let y = (x + (12.0 - 3.0 * x * x).max(0.0).sqrt()) / 2.0;
            (x, y)
        })
        .collect())
}

/// The limit curve in the top-path coordinates: `T_n(tau n) / n` for
/// `|tau| <= 1/2`, the part of the path in the quadrant `[1, 2]^2`.
pub fn limit_top_path(tau: f64) -> Result<f64> {
    if tau.abs() > 0.5 {
        return Err(Error::Domain(format!("tau = {tau} outside [-1/2, 1/2]")));
    }
    Ok((3.0 * (1.0 - tau * tau)).sqrt() - 1.0)
}

/// Left side of the limit-shape equation.
pub fn limit_shape_residual(x: f64, y: f64) -> f64 {
    x * (2.0 - x) + y * (2.0 - y) + (2.0 - x) * (2.0 - y) - 1.0
}

/// Composite Gauss-Legendre integral of `g'` from `alpha` down to `a`,
/// with `s = u^2` to absorb the square-root behaviour at `alpha`.
pub fn integrated_exponent(a: f64, nodes: usize) -> Result<f64> {
    if !(a > 0.0 && a <= ALPHA) {
        return Err(Error::Domain(format!("a = {a} outside (0, alpha]")));
    }
    let (t, wt) = gauss_legendre(nodes);
    let top = (ALPHA - a).sqrt();
    let mut acc = 0.0;
    for (&ti, &wi) in t.iter().zip(&wt) {
        let u = 0.5 * top * (ti + 1.0);
        let s = u * u;
        if s <= 0.0 || s >= ALPHA {
            continue;
        }
        let (_, gp) = decay_exponent(ALPHA - s)?;
        acc += wi * 0.5 * top * gp * 2.0 * u;
    }
    Ok(-acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn a_grid() -> Vec<f64> {
        (1..=25).map(|k| k as f64 * 0.01).chain([0.26, 0.265, 0.2679]).collect()
    }

    #[test]
    fn scalings() {
        let s = Scalings::default();
        assert!((s.alpha - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((s.c0 * s.c1 - 1.0 / (3.0 * 3f64.sqrt())).abs() < 1e-15);
        assert_eq!(s.lattice_point(100, 0.0).unwrap(), 26);
        assert!(s.lattice_point(100, 100.0).is_err());
    }

    #[test]
    fn imaginary_part_on_the_real_line() {
        let table = |t: f64, a: f64| -> f64 {
            PI * if t <= -1.0 {
                a
            } else if t <= a - 1.0 {
                -(1.0 + t - a)
            } else if t <= 0.0 {
                0.0
            } else if t <= a / 2.0 {
                -t
            } else if t <= 1.0 {
                t - a
            } else if t <= 2.0 {
                1.0 - a
            } else if t <= 3.0 {
                3.0 - a - t
            } else {
                -a
            }
        };
        for a in [0.05, 0.15, ALPHA] {
            for k in 0..=90 {
                let t = -1.5 + k as f64 * 0.0537;
                let v = s1(c(t, 0.0), a).im;
                assert!((v - table(t, a)).abs() < 1e-12, "a={a} t={t}: {v} vs {}", table(t, a));
            }
        }
    }

    #[test]
    fn value_at_the_double_saddle() {
        let (w, _) = saddle_points(ALPHA).unwrap();
        assert!(s1(w, ALPHA).norm() < 1e-14);
        assert_eq!(decay_exponent(ALPHA).unwrap().1, 0.0);
    }

    #[test]
    fn saddle_points_are_critical_and_ordered() {
        let (wa, wb) = saddle_points(ALPHA).unwrap();
        assert!((wa - wb).norm() < 1e-15);
        assert!((wa.re - (1.0 - 2.0 / 3f64.sqrt())).abs() < 1e-14 || wa.re < 0.0);
        for a in a_grid() {
            let (p, m) = saddle_points(a).unwrap();
            assert!(p.im == 0.0 && m.im == 0.0);
            assert!(s1_derivative(p, a, 1).unwrap().norm() < 1e-10, "a={a}");
            assert!(s1_derivative(m, a, 1).unwrap().norm() < 1e-10, "a={a}");
            assert!(m.re <= wa.re && wa.re <= p.re && p.re <= 0.0, "a={a}");
        }
        let (p, m) = saddle_points(1.0).unwrap();
        assert!(p.im != 0.0 && (p - m.conj()).norm() < 1e-14);
        assert!(saddle_points(0.0).is_err());
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pts = [c(-0.3, 0.4), c(0.5, 0.7), c(-0.05, 0.2), c(1.5, -0.3), c(-0.6, -0.1)];
        for a in [0.1, 0.2, ALPHA] {
            for &w in &pts {
                let h = 1e-5;
                let fd1 = (s1(w + h, a) - s1(w - h, a)) / (2.0 * h);
                let d1 = s1_derivative(w, a, 1).unwrap();
                assert!((fd1 - d1).norm() < 1e-6 * d1.norm().max(1.0), "{w} {fd1} {d1}");
                let fd2 = (s1_derivative(w + h, a, 1).unwrap() - s1_derivative(w - h, a, 1).unwrap()) / (2.0 * h);
                let d2 = s1_derivative(w, a, 2).unwrap();
                assert!((fd2 - d2).norm() < 1e-6 * d2.norm());
                let fd3 = (s1_derivative(w + h, a, 2).unwrap() - s1_derivative(w - h, a, 2).unwrap()) / (2.0 * h);
                let d3 = s1_derivative(w, a, 3).unwrap();
                assert!((fd3 - d3).norm() < 1e-6 * d3.norm());
            }
        }
        assert!(s1_derivative(c(0.1, 0.1), 0.1, 4).is_err());
    }

    #[test]
    fn second_derivative_closed_form() {
        let mut prev = f64::INFINITY;
        for a in a_grid() {
            let (p, m) = saddle_points(a).unwrap();
            let dp = s1_second_derivative_at_saddle(a, Branch::Plus).unwrap();
            let dm = s1_second_derivative_at_saddle(a, Branch::Minus).unwrap();
            assert!(dp > 0.0 && dm < 0.0, "a={a}");
            assert!(dp < prev);
            prev = dp;
            assert!(rel(dp, s1_derivative(p, a, 2).unwrap().re) < 1e-9, "a={a}");
            assert!(rel(dm, s1_derivative(m, a, 2).unwrap().re) < 1e-9, "a={a}");
            // second difference of S_1 itself
            // five-point stencil; w_+ approaches the log singularity at 0 as a -> 0
            let h = (2e-2 * p.re.abs()).min(1e-3);
            let f = |k: f64| s1(p + k * h, a).re;
            let fd = (-f(2.0) + 16.0 * f(1.0) - 30.0 * f(0.0) + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * h * h);
            assert!(rel(fd, dp) < 1e-6, "a={a}: {fd} {dp}");
        }
        let near = s1_second_derivative_at_saddle(ALPHA - 1e-10, Branch::Plus).unwrap();
        assert!(near.abs() < 1e-3);
        assert!(s1_second_derivative_at_saddle(ALPHA, Branch::Plus).is_err());
    }

    #[test]
    fn third_derivative_at_alpha() {
        let (w, _) = saddle_points(ALPHA).unwrap();
        let d3 = s1_derivative(w, ALPHA, 3).unwrap();
        assert!((d3.re - s1_third_derivative_at_alpha()).abs() < 1e-12 && d3.im == 0.0);
        let h = 1e-4;
        let f = |k: f64| s1_derivative(w + k * h, ALPHA, 1).unwrap().re;
        let fd = (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h);
        assert!(rel(fd, 81.0 / 4.0) < 1e-5, "{fd}");
        // cubic model near the double saddle
        for z in [c(0.01, 0.0), c(0.0, 0.01), c(-0.007, 0.007)] {
            let model = 81.0 / 24.0 * z * z * z;
            assert!((s1(w + z, ALPHA) - model).norm() < 0.05 * model.norm());
        }
    }

    #[test]
    fn saddle_velocity_matches_finite_differences() {
        for a in a_grid().into_iter().filter(|&a| a < 0.26) {
            let h = 1e-6;
            let fd = (saddle_points(a + h).unwrap().0.re - saddle_points(a - h).unwrap().0.re) / (2.0 * h);
            assert!(rel(fd, saddle_velocity(a).unwrap()) < 1e-6, "a={a}");
        }
    }

    #[test]
    fn decay_exponent_properties() {
        for a in a_grid() {
            let (g, gp) = decay_exponent(a).unwrap();
            assert!(g < 0.0 && gp > 0.0, "a={a}");
            let (w, _) = saddle_points(a).unwrap();
            assert!((gp - ((1.0 - a + w.re) / (a - 2.0 * w.re)).ln()).abs() < 1e-10);
            let h = 1e-6;
            if a <= 0.265 {
                let fd = (decay_exponent(a + h).unwrap().0 - decay_exponent(a - h).unwrap().0) / (2.0 * h);
                assert!(rel(fd, gp) < 1e-6, "a={a}");
            }
            assert!((integrated_exponent(a, 64).unwrap() - g).abs() < 1e-8, "a={a}");
        }
        assert!(decay_exponent(0.3).is_err());
    }

    #[test]
    fn steepest_descent_traces() {
        for (a, angle) in [(0.1, PI / 2.0), (0.2, PI / 2.0), (ALPHA, PI / 3.0)] {
            let t = steepest_descent_trace(a, 1e-3, 1e-9).unwrap();
            assert!((t.endpoint() - a).norm() < 1e-6, "a={a}: {}", t.endpoint());
            assert!((t.launch_angle() - angle).abs() < 1e-3, "a={a}: {}", t.launch_angle());
            assert!(t.max_imaginary() <= 1e-9);
            let re = t.real_parts();
            assert!(re.windows(2).all(|p| p[1] < p[0]), "a={a}");
            assert!(t.points[1..t.points.len() - 1].iter().all(|w| w.im > 0.0));
        }
        assert!(steepest_descent_trace(0.3, 1e-3, 1e-9).is_err());
    }

    #[test]
    fn branch_guard_and_companions() {
        assert!(s1_checked(c(0.5, 1e-12), 0.1, 1e-9).is_err());
        assert!(s1_checked(c(-0.5, 0.0), 0.1, 1e-9).is_ok());
        assert!(s1_checked(c(-0.5, 0.0), 0.1, 1e-9).unwrap().im.abs() < 1e-15);
        let w = c(-0.3, 0.2);
        assert!(s2(w, 0.2, 0.0, 0.0, 1e-9).unwrap().norm() == 0.0);
        let x = s2(w, 0.2, 0.7, -1.3, 1e-9).unwrap();
        assert!((s2(w.conj(), 0.2, 0.7, -1.3, 1e-9).unwrap() - x.conj()).norm() < 1e-14);
        let y = s3(w, 0.2, 1.0, 1e-9).unwrap();
        assert!((s3(w.conj(), 0.2, 1.0, 1e-9).unwrap() - y.conj()).norm() < 1e-14);
        // S_3 at r = 0 at a real point left of every cut
        let t = -0.1;
        let a = 0.2;
        let direct = 2.0 * (1.0f64 + t).ln() + 2.0 * (2.0f64 - t).ln() + (2.0 - 2.0 * t).ln()
            - (1.0 + t - a).ln()
            - 3.0 * (3.0f64 - t).ln()
            - (a - 2.0 * t).ln()
            - (1.0f64 - t).ln()
            - 1.0;
        assert!((s3(c(t, 0.0), a, 0.0, 1e-9).unwrap().re - direct).abs() < 1e-14);
    }

    #[test]
    fn rescaled_kernel_checks() {
        let k = RescaledKernel::new(200, KERNEL_BITS);
        for xi in [-2.0, 0.0, 1.5] {
            assert_eq!(k.eval(1, 1, xi, xi).unwrap(), 0.0);
        }
        let v = k.eval(1, 2, 0.0, 0.0).unwrap();
        let g = crate::goetw::kgoe(1, 2, 0.0, 0.0).unwrap();
        assert!((v - g).abs() < 0.1, "{v} vs {g}");
        let b = k.eval_block(0.5, -1.0).unwrap();
        assert_eq!(b[0][1], -k.eval_block(-1.0, 0.5).unwrap()[1][0]);
        assert!(k.eval(3, 1, 0.0, 0.0).is_err());
        assert!(k.eval(1, 1, 1e3, 0.0).is_err());
    }

    #[test]
    fn tail_probe() {
        let r = tail_bound_probe(100, 2.0).unwrap();
        assert!(r.rate11 > 0.0);
        assert!(r.bound22 <= 1.0 + 1e-9);
        let rates: Vec<f64> = r.rate12.iter().map(|p| p.1).collect();
        assert!(rates.len() >= 3 && rates.iter().all(|&c| c > 0.0));
        let (lo, hi) = rates.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
        assert!(hi - lo < 0.05 * hi, "{rates:?}");
        assert!(tail_bound_probe(100, 1e4).is_err());
    }

    #[test]
    fn limit_shape_curve() {
        let pts = limit_shape(101).unwrap();
        assert_eq!(pts[0], (1.0, 2.0));
        assert!((pts[100].0 - 2.0).abs() < 1e-15 && (pts[100].1 - 1.0).abs() < 1e-12);
        for &(x, y) in &pts {
            assert!(limit_shape_residual(x, y).abs() < 1e-12);
            assert!((1.0..=2.0).contains(&y));
        }
        assert!(limit_shape(1).is_err());
        // (x, y) = (1 + tau + h, 1 - tau + h) with h = T/n lies on the curve
        for k in 0..=20 {
            let tau = -0.5 + k as f64 * 0.05;
            let h = limit_top_path(tau).unwrap();
            assert!(limit_shape_residual(1.0 + tau + h, 1.0 - tau + h).abs() < 1e-12);
        }
        assert!((limit_top_path(0.0).unwrap() - (1.0 - ALPHA)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(re in -4.0f64..4.0, im in 0.01f64..3.0, a in 0.01f64..0.2679) {
            let w = c(re, im);
            prop_assert!((s1(w.conj(), a) - s1(w, a).conj()).norm() < 1e-12);
        }

        #[test]
        fn derivative_is_conjugate_symmetric(re in -2.0f64..2.0, im in 0.05f64..2.0, a in 0.01f64..0.2679) {
            let w = c(re, im);
            for k in 1..=3 {
                let d = s1_derivative(w, a, k).unwrap();
                prop_assert!((s1_derivative(w.conj(), a, k).unwrap() - d.conj()).norm() < 1e-10 * d.norm().max(1.0));
            }
        }
    }
}
