//! The acceptance checks, shared by the `acceptance` integration test and
//! the `verify-all` command. Each check returns a report with the measured
//! quantities; none of them panic on failure.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{self as asy, Branch, ALPHA};
use crate::combinatorics::{
    count_asm, count_gog_trapezoids, count_magog_trapezoids, enumerate_asm, enumerate_matchings,
    enumerate_pcsm, x_gog, x_magog, DEFAULT_COUNT_CAP, DEFAULT_ENUM_CAP,
};
use crate::error::Result;
use crate::goetw::{f1, f1_series, QuadratureRule, DEFAULT_NODES, DEFAULT_TRUNCATION};
use crate::kasteleyn::{build_kasteleyn, kinverse_matrix, s_integral, s_integral_quadrature};
use crate::kernel::{correlation, gap_probability, law_of_max_t, PrecisionPolicy};
use crate::numeric::{rat, Rational};
use crate::sampler::{empirical_max_law_chains, ChainPlan};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub const CRITERIA: [(usize, &str); 10] = [
    (1, "ASM enumeration"),
    (2, "gog/magog trapezoid table"),
    (3, "X^g and X^m equal in law"),
    (4, "kernel gaps and correlations"),
    (5, "Kasteleyn Pfaffian and inverse"),
    (6, "saddle-point checks"),
    (7, "kernel convergence to K_GOE"),
    (8, "F1 numerics"),
    (9, "max T_n against F1"),
    (10, "determinism"),
];

/// Runs criterion `id` (1 to 10).
pub fn run(id: usize) -> CriterionReport {
    let start = Instant::now();
    let outcome = match id {
        1 => enumeration(),
        2 => trapezoid_table(),
        3 => law_equality(),
        4 => kernel_exact(),
        5 => kasteleyn_checks(),
        6 => saddle_checks(),
        7 => kernel_convergence(),
        8 => f1_numerics(),
        9 => max_law(),
        10 => determinism(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown").to_string();
    CriterionReport { id, name, passed, detail, seconds }
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&(id, _)| run(id)).collect()
}

type Outcome = Result<(bool, String)>;

fn enumeration() -> Outcome {
    let start = Instant::now();
    let expected = [1u32, 2, 7, 42, 429, 7436];
    let mut ok = true;
    for (n, &e) in (1..=6).zip(&expected) {
        let brute = enumerate_asm(n, DEFAULT_ENUM_CAP)?.len();
        ok &= brute == e as usize && count_asm(n) == BigUint::from(e);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 60.0, format!("|A_n| n=1..6 brute force and product formula, {secs:.1} s (limit 60)")))
}

/// Rows `n = 1..=6`, entries `k = 1..=n`.
const TRAPEZOID_TABLE: [&[u32]; 6] = [
    &[2],
    &[5, 7],
    &[14, 35, 42],
    &[42, 219, 387, 429],
    &[132, 1594, 4862, 7007, 7436],
    &[429, 12935, 76505, 166296, 210912, 218348],
];

fn trapezoid_table() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (row, n) in TRAPEZOID_TABLE.iter().zip(1..) {
        for (k, &e) in (1..).zip(row.iter()) {
            let g = count_gog_trapezoids(n, k, DEFAULT_COUNT_CAP)?;
            let m = count_magog_trapezoids(n, k, DEFAULT_COUNT_CAP)?;
            if g != BigUint::from(e) || m != BigUint::from(e) {
                bad.push(format!("({n},{k}): gog {g}, magog {m}, table {e}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((bad.is_empty() && secs < 300.0, format!("21 entries, mismatches {bad:?}, {secs:.1} s (limit 300)")))
}

fn law_equality() -> Outcome {
    let mut ok = true;
    let mut n2 = BTreeMap::new();
    for n in 1..=5 {
        let mut g: BTreeMap<usize, usize> = BTreeMap::new();
        for c in enumerate_pcsm(n, DEFAULT_ENUM_CAP)? {
            *g.entry(x_gog(&c)).or_default() += 1;
        }
        let mut m: BTreeMap<usize, usize> = BTreeMap::new();
        for x in enumerate_matchings(n, DEFAULT_ENUM_CAP)? {
            *m.entry(x_magog(&x)).or_default() += 1;
        }
        ok &= g == m;
        if n == 2 {
            n2 = g;
        }
    }
    let hist: BTreeMap<usize, usize> = [(1, 2), (2, 4), (3, 1)].into_iter().collect();
    ok &= n2 == hist;
    Ok((ok, format!("laws equal for n<=5; n=2 histogram {n2:?}")))
}

fn freq(hits: usize, total: usize) -> Rational {
    rat(hits as i64, total as i64)
}

fn kernel_exact() -> Outcome {
    let start = Instant::now();
    let mut ok = gap_probability(2, 1)? == rat(5, 7) && gap_probability(2, 2)? == rat(1, 7);
    let mut checked = 0;
    for n in 1..=5 {
        let ms = enumerate_matchings(n, DEFAULT_ENUM_CAP)?;
        for s in 0..=n {
            let hits = ms.iter().filter(|m| (0..s).all(|k| !m.particle_at(k))).count();
            ok &= gap_probability(n, s)? == freq(hits, ms.len());
            checked += 1;
        }
        for a in 0..n {
            let mut sets = vec![vec![a]];
            for b in a + 1..n {
                sets.push(vec![a, b]);
                sets.extend((b + 1..n).map(|c| vec![a, b, c]));
            }
            for pts in sets {
                let hits = ms.iter().filter(|m| pts.iter().all(|&k| m.particle_at(k))).count();
                ok &= correlation(n, &pts)? == freq(hits, ms.len());
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 120.0, format!("gap(2,1)=5/7, gap(2,2)=1/7, {checked} exact comparisons, {secs:.1} s (limit 120)")))
}

fn kasteleyn_checks() -> Outcome {
    let mut ok = true;
    for n in 1..=6 {
        let pf = build_kasteleyn(n)?.pfaffian()?;
        ok &= pf.abs() == Rational::from_integer(BigInt::from(count_asm(n + 1)));
    }
    for n in 1..=4 {
        let k = build_kasteleyn(n)?.to_rational();
        let inv = kinverse_matrix(n)?;
        let nv = k.len();
        for i in 0..nv {
            for j in 0..nv {
                let s = (0..nv).filter(|&l| !k[i][l].is_zero()).fold(Rational::zero(), |a, l| a + &k[i][l] * &inv[l][j]);
                ok &= s == rat((i == j) as i64, 1);
            }
        }
    }
    let mut worst: f64 = 0.0;
    for l1 in 0..=10 {
        for l2 in 0..=10 {
            worst = worst.max((s_integral_quadrature(l1, l2, 96) - s_integral(l1, l2) as f64).abs());
        }
    }
    ok &= worst < 1e-10;
    Ok((ok, format!("|Pf K_n| = |A_(n+1)| n<=6, K K^-1 = I n<=4, s-integral max error {worst:.1e}")))
}

fn saddle_checks() -> Outcome {
    let (wp, wm) = asy::saddle_points(ALPHA)?;
    let coalesce = (wp - wm).norm();
    let grid: Vec<f64> = (1..=26).map(|k| k as f64 * 0.01).chain([0.265, 0.2679]).collect();
    let mut crit: f64 = 0.0;
    for &a in &grid {
        let (p, m) = asy::saddle_points(a)?;
        crit = crit.max(asy::s1_derivative(p, a, 1)?.norm()).max(asy::s1_derivative(m, a, 1)?.norm());
    }
    let third = (asy::s1_derivative(wp, ALPHA, 3)?.re - 81.0 / 4.0).abs();
    let mut landing: f64 = 0.0;
    for a in [0.1, 0.2, ALPHA] {
        landing = landing.max((asy::steepest_descent_trace(a, 1e-3, 1e-9)?.endpoint() - a).norm());
    }
    let fd = derivative_fd_error()?;
    let ok = coalesce < 1e-12 && crit < 1e-10 && third < 1e-12 && landing < 1e-6 && fd < 1e-6;
    Ok((
        ok,
        format!(
            "|w+ - w-| at alpha {coalesce:.1e}, max |S1'| {crit:.1e}, |S1''' - 81/4| {third:.1e}, trace landing {landing:.1e}, finite-difference rel. error {fd:.1e}"
        ),
    ))
}

/// Largest relative error of the closed-form derivatives against central
/// differences.
fn derivative_fd_error() -> Result<f64> {
    use num_complex::Complex64;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for a in [0.1, 0.2, ALPHA] {
        for w in [Complex64::new(-0.3, 0.4), Complex64::new(0.5, 0.7), Complex64::new(-0.6, -0.1)] {
            let fd1 = (asy::s1(w + h, a) - asy::s1(w - h, a)) / (2.0 * h);
            let d1 = asy::s1_derivative(w, a, 1)?;
            worst = worst.max((fd1 - d1).norm() / d1.norm().max(1.0));
            for k in 2..=3 {
                let fd = (asy::s1_derivative(w + h, a, k - 1)? - asy::s1_derivative(w - h, a, k - 1)?) / (2.0 * h);
                let d = asy::s1_derivative(w, a, k)?;
                worst = worst.max((fd - d).norm() / d.norm());
            }
        }
    }
    for a in [0.05, 0.1, 0.15, 0.2, 0.25] {
        let (p, _) = asy::saddle_points(a)?;
        let s = (2e-2 * p.re.abs()).min(1e-3);
        let f = |k: f64| asy::s1(p + k * s, a).re;
        let fd2 = (-f(2.0) + 16.0 * f(1.0) - 30.0 * f(0.0) + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * s * s);
        worst = worst.max(rel(fd2, asy::s1_second_derivative_at_saddle(a, Branch::Plus)?));
        let e = 1e-6;
        let v = (asy::saddle_points(a + e)?.0.re - asy::saddle_points(a - e)?.0.re) / (2.0 * e);
        worst = worst.max(rel(v, asy::saddle_velocity(a)?));
        let g = (asy::decay_exponent(a + e)?.0 - asy::decay_exponent(a - e)?.0) / (2.0 * e);
        worst = worst.max(rel(g, asy::decay_exponent(a)?.1));
    }
    Ok(worst)
}

fn kernel_convergence() -> Outcome {
    let blocks = [(1, 1), (1, 2), (2, 1), (2, 2)];
    let rows = asy::convergence_study(&blocks, &asy::DEFAULT_SIZES, &asy::default_grid())?;
    let sups = asy::sup_errors(&rows);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, j) in blocks {
        let seq: Vec<f64> = sups.iter().filter(|e| (e.1, e.2) == (i, j)).map(|e| e.3).collect();
        let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
        let last = *seq.last().unwrap();
        ok &= decreasing && last <= 0.05;
        parts.push(format!("f{i}{j} {}", seq.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>().join(", ")));
    }
    Ok((ok, format!("sup errors over n = 50, 100, 200, 400: {}", parts.join("; "))))
}

fn f1_numerics() -> Outcome {
    let rule = QuadratureRule::default_rule();
    let double = QuadratureRule::new(2 * DEFAULT_NODES, DEFAULT_TRUNCATION)?;
    let grid: Vec<f64> = (0..=40).map(|k| -6.0 + 0.25 * k as f64).collect();
    let mut vals = Vec::with_capacity(grid.len());
    let mut doubling: f64 = 0.0;
    for &s in &grid {
        let v = f1(s, &rule)?.value;
        doubling = doubling.max((v - f1(s, &double)?.value).abs());
        vals.push(v);
    }
    let monotone = vals.windows(2).all(|w| w[1] >= w[0]);
    let (lo, hi) = (vals[0], *vals.last().unwrap());
    let mut series: f64 = 0.0;
    for s in [2.0, 2.5, 3.0, 3.5, 4.0] {
        series = series.max((f1(s, &rule)?.value - f1_series(s, 3)?).abs());
    }
    let ok = monotone && lo < 0.01 && hi > 0.999 && doubling < 1e-6 && series < 1e-6;
    Ok((
        ok,
        format!(
            "monotone {monotone}, F1(-6) = {lo:.3e}, F1(4) = {hi:.7}, doubling {doubling:.1e}, series {series:.1e}"
        ),
    ))
}

/// `sup_s |P[(max T_n - (1-alpha) n)/(c0 n^{1/3}) <= s] - F1(s)|` over
/// `[lo, hi]`, checked at both sides of every jump and at the ends.
pub fn law_distance_to_f1(law: &crate::kernel::MaxLaw, lo: f64, hi: f64, rule: &QuadratureRule) -> Result<f64> {
    let s = asy::Scalings::default();
    let n = law.n as f64;
    let (center, scale) = ((1.0 - s.alpha) * n, s.c0 * n.cbrt());
    let cdf = |x: f64| law.cdf(center + scale * x);
    let mut d: f64 = 0.0;
    for x in [lo, hi] {
        d = d.max((cdf(x) - f1(x, rule)?.value).abs());
    }
    for (v, _) in &law.table {
        let x = (*v as f64 - center) / scale;
        if x < lo || x > hi {
            continue;
        }
        let f = f1(x, rule)?.value;
        let before = law.cdf(*v as f64 - 0.5);
        d = d.max((cdf(x) - f).abs()).max((before - f).abs());
    }
    Ok(d)
}

fn max_law() -> Outcome {
    let rule = QuadratureRule::default_rule();
    let start = Instant::now();
    let law = law_of_max_t(100, &PrecisionPolicy::big_float(128))?;
    let sup = law_distance_to_f1(&law, -4.0, 3.0, &rule)?;
    let exact_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let mut ks = Vec::new();
    for (n, samples) in [(50, 5000), (100, 5000), (200, 3000)] {
        let e = empirical_max_law_chains(n, samples, ChainPlan::for_size(n), 2024)?;
        ks.push((n, samples, e.ks_to_f1(&rule)?));
    }
    let mc_secs = start.elapsed().as_secs_f64();
    let ks100 = ks[1].2;
    let decreasing = ks.windows(2).all(|w| w[1].2 < w[0].2);
    let ok_a = sup <= 0.05 && exact_secs <= 3600.0;
    let ok_b = ks100 <= 0.1 && decreasing && mc_secs <= 1800.0;
    Ok((
        ok_a && ok_b,
        format!(
            "(a) {}: exact sup distance at n=100 {sup:.4} (limit 0.05, {exact_secs:.0} s); (b) {}: KS {} (limit 0.1 at n=100, decreasing; {mc_secs:.0} s)",
            if ok_a { "pass" } else { "fail" },
            if ok_b { "pass" } else { "fail" },
            ks.iter().map(|(n, m, d)| format!("n={n} ({m} samples) {d:.4}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

/// Serialized outputs of one representative call per command family.
fn fingerprint() -> Result<String> {
    let rule = QuadratureRule::default_rule();
    let mut out = Vec::new();
    out.push(count_asm(7).to_string());
    out.push(format!("{:?}", law_of_max_t(6, &PrecisionPolicy::exact())?));
    out.push(format!("{:?}", law_of_max_t(30, &PrecisionPolicy::big_float(128))?));
    out.push(crate::numeric::rational_string(&gap_probability(4, 2)?));
    out.push(format!("{:?}", build_kasteleyn(3)?.pfaffian()?.to_string()));
    out.push(format!("{:?}", f1(-1.5, &rule)?));
    let rows = asy::convergence_study(&[(1, 2), (2, 2)], &[50], &asy::grid(-1.0, 1.0, 0.5))?;
    out.push(format!("{:?}", rows));
    out.push(format!("{:?}", asy::saddle_report(0.2)?));
    out.push(format!("{:?}", asy::limit_shape(11)?));
    out.push(format!("{:?}", crate::sampler::sample_many(12, 8, 50, 7)?));
    out.push(format!("{:?}", crate::sampler::empirical_max_law(12, 16, 40, 7)?));
    out.push(format!("{:?}", empirical_max_law_chains(12, 16, ChainPlan::for_size(12), 7)?));
    Ok(out.join("\n"))
}

fn determinism() -> Outcome {
    let pool = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| crate::Error::Numerical(e.to_string()));
    let a = pool(1)?.install(fingerprint)?;
    let b = pool(1)?.install(fingerprint)?;
    let c = pool(4)?.install(fingerprint)?;
    let ok = a == b && a == c;
    Ok((ok, format!("{} bytes of output identical across two runs and 1 vs 4 threads: {ok}", a.len())))
}
