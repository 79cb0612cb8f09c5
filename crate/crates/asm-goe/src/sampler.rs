//! Heat-bath Glauber dynamics on monotone triangles, used to sample
//! approximately uniform ASMs.
//!
//! A step picks an entry uniformly and resamples it uniformly among the
//! values allowed by its neighbours. The allowed set does not depend on the
//! current value, so the chain is symmetric and uniform-stationary.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::Scalings;
use crate::combinatorics::{asm_to_pcsm, gog_to_asm, top_path, GogTrapezoid, PcsmMatrix};
use crate::error::{Error, Result};
use crate::goetw::{f1, QuadratureRule};

/// Single-site heat-bath chain on monotone triangles with `n` rows
/// (ASMs of order `n + 1`).
#[derive(Clone, Debug)]
pub struct GlauberChain {
    n: usize,
    // row-major: entry (i, j) at i(i-1)/2 + j - 1, then two sentinels
    g: Vec<u32>,
    // per entry: slots bounding it below, slots bounding it above, cap
    nbrs: Vec<Neighbours>,
    steps: u64,
    rng: Xoshiro256PlusPlus,
}

#[derive(Clone, Copy, Debug)]
struct Neighbours {
    left: u32,
    low: [u32; 2],
    right: u32,
    high: [u32; 2],
    cap: u32,
}

const SENTINEL_HIGH: u32 = u32::MAX / 2;

/// `floor(r m / 2^64)`: uniform on `0..m` up to a relative bias below
/// `m / 2^64`.
fn below(r: u64, m: u64) -> u64 {
    ((r as u128 * m as u128) >> 64) as u64
}

fn idx(i: usize, j: usize) -> usize {
    i * (i - 1) / 2 + j - 1
}

impl GlauberChain {
    /// Chain started at the minimal triangle (row `i` is `1, ..., i`), with
    /// its own stream `stream` of the generator seeded by `seed`.
    pub fn new(n: usize, seed: u64, stream: u64) -> Result<Self> {
        if n == 0 || n > u16::MAX as usize {
            return Err(Error::OutOfRange(format!("n = {n}")));
        }
        let size = n * (n + 1) / 2;
        let (zero, big) = (size as u32, size as u32 + 1);
        let mut g = Vec::with_capacity(size + 2);
        let mut nbrs = Vec::with_capacity(size);
        for i in 1..=n {
            for j in 1..=i {
                g.push(j as u32);
                let at = |i: usize, j: usize| idx(i, j) as u32;
                nbrs.push(Neighbours {
                    left: if j > 1 { at(i, j - 1) } else { zero },
                    low: [if j > 1 { at(i - 1, j - 1) } else { zero }, if i < n { at(i + 1, j) } else { zero }],
                    right: if j < i { at(i, j + 1) } else { big },
                    high: [if j < i { at(i - 1, j) } else { big }, if i < n { at(i + 1, j + 1) } else { big }],
                    cap: (n + 1 + j - i) as u32,
                });
            }
        }
        g.push(0);
        g.push(SENTINEL_HIGH);
        // ChaCha8 stream `stream` seeds the fast per-chain generator
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        master.set_stream(stream);
        let rng = Xoshiro256PlusPlus::from_rng(&mut master).map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(GlauberChain { n, g, nbrs, steps: 0, rng })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Steps per sweep, the number of entries.
    pub fn sweep_len(&self) -> usize {
        self.nbrs.len()
    }

    fn allowed_at(&self, k: usize) -> (u32, u32) {
        let g = &self.g;
        let b = &self.nbrs[k];
        let lo = (g[b.left as usize] + 1).max(g[b.low[0] as usize]).max(g[b.low[1] as usize]);
        let hi = (g[b.right as usize] - 1).min(g[b.high[0] as usize]).min(g[b.high[1] as usize]).min(b.cap);
        (lo, hi)
    }

    /// Values `g_{i,j}` may take given the rest of the triangle.
    pub fn allowed(&self, i: usize, j: usize) -> (u32, u32) {
        self.allowed_at(idx(i, j))
    }

    /// One heat-bath update at a uniformly chosen entry.
    pub fn step(&mut self) {
        let k = below(self.rng.next_u64(), self.nbrs.len() as u64) as usize;
        let (lo, hi) = self.allowed_at(k);
        if lo != hi {
            self.g[k] = lo + below(self.rng.next_u64(), (hi - lo + 1) as u64) as u32;
        }
        self.steps += 1;
        debug_assert!(self.g[k] >= lo && self.g[k] <= hi);
    }

    pub fn sweeps(&mut self, count: usize) {
        for _ in 0..count * self.nbrs.len() {
            self.step();
        }
    }

    /// Current state as a validated monotone triangle.
    pub fn triangle(&self) -> Result<GogTrapezoid> {
        let rows = (1..=self.n).map(|i| self.g[idx(i, 1)..=idx(i, i)].to_vec()).collect();
        GogTrapezoid::new(self.n, self.n, rows)
    }

    pub fn pcsm(&self) -> Result<PcsmMatrix> {
        asm_to_pcsm(&gog_to_asm(&self.triangle()?)?)
    }
}

/// Default burn-in, `10 n` sweeps.
pub fn default_sweeps(n: usize) -> usize {
    10 * n
}

/// Runs a fresh chain for `sweeps` sweeps and returns the final state as a
/// PCSM of size `n`.
pub fn sample_uniform(n: usize, sweeps: usize, seed: u64) -> Result<PcsmMatrix> {
    sample_stream(n, sweeps, seed, 0)
}

fn sample_stream(n: usize, sweeps: usize, seed: u64, stream: u64) -> Result<PcsmMatrix> {
    if sweeps == 0 {
        return Err(Error::Domain("sweeps must be at least 1".into()));
    }
    let mut c = GlauberChain::new(n, seed, stream)?;
    c.sweeps(sweeps);
    c.pcsm()
}

/// `count` independent samples, chain `k` on stream `k`; the result does
/// not depend on the number of worker threads.
pub fn sample_many(n: usize, count: usize, sweeps: usize, seed: u64) -> Result<Vec<PcsmMatrix>> {
    (0..count as u64).into_par_iter().map(|k| sample_stream(n, sweeps, seed, k)).collect()
}

/// Empirical law of `(max T_n - (1-alpha) n) / (c0 n^{1/3})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub n: usize,
    pub samples: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub center: f64,
    pub scale: f64,
    /// Raw `max T_n`, sorted.
    pub raw: Vec<i64>,
    /// Rescaled values, sorted.
    pub values: Vec<f64>,
    /// `T_n(0)` of each sample, rescaled the same way, in sample order.
    pub t0: Vec<f64>,
}

impl EmpiricalCdf {
    fn from_samples(n: usize, sweeps: usize, seed: u64, maxes: Vec<i64>, t0: Vec<i64>) -> Self {
        let s = Scalings::default();
        let center = (1.0 - s.alpha) * n as f64;
        let scale = s.c0 * (n as f64).cbrt();
        let mut raw = maxes;
        raw.sort_unstable();
        let values = raw.iter().map(|&m| (m as f64 - center) / scale).collect();
        let t0 = t0.iter().map(|&m| (m as f64 - center) / scale).collect();
        EmpiricalCdf { n, samples: raw.len(), sweeps, seed, center, scale, raw, values, t0 }
    }

    /// Fraction of rescaled values `<= s`.
    pub fn cdf(&self, s: f64) -> f64 {
        self.values.partition_point(|&v| v <= s) as f64 / self.samples as f64
    }

    /// Distinct rescaled values with the ECDF just after each.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            let c = (k + 1) as f64 / self.samples as f64;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = c,
                _ => out.push((v, c)),
            }
        }
        out
    }

    /// `sup_s |ECDF(s) - F_1(s)|`, attained at a jump of the ECDF.
    pub fn ks_to_f1(&self, rule: &QuadratureRule) -> Result<f64> {
        let mut before = 0.0;
        let mut d: f64 = 0.0;
        for (v, after) in self.steps() {
            let f = f1(v, rule)?.value;
            d = d.max((f - before).abs()).max((after - f).abs());
            before = after;
        }
        Ok(d)
    }
}

/// Samples `max T_n` from `samples` independent chains, each run for
/// `sweeps` sweeps from the minimal triangle.
pub fn empirical_max_law(n: usize, samples: usize, sweeps: usize, seed: u64) -> Result<EmpiricalCdf> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let pairs: Vec<(i64, i64)> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let p = top_path(&sample_stream(n, sweeps, seed, k)?);
            Ok((p.max(), p.at(0)))
        })
        .collect::<Result<_>>()?;
    let (maxes, t0) = pairs.into_iter().unzip();
    Ok(EmpiricalCdf::from_samples(n, sweeps, seed, maxes, t0))
}

/// Several long chains, each burnt in and then sampled every `thin` sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainPlan {
    pub chains: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl ChainPlan {
    /// 8 chains, burn-in `2 n^2` sweeps, thinning `4 n` sweeps.
    pub fn for_size(n: usize) -> Self {
        ChainPlan { chains: 8, burn_in: 2 * n * n, thin: 4 * n }
    }
}

/// Samples `max T_n` from the chains of `plan`; chain `c` runs on stream `c`
/// and contributes `samples / chains` values (the first `samples % chains`
/// chains one more).
pub fn empirical_max_law_chains(n: usize, samples: usize, plan: ChainPlan, seed: u64) -> Result<EmpiricalCdf> {
    if samples == 0 || plan.chains == 0 || plan.thin == 0 {
        return Err(Error::Domain("samples, chains and thinning must be positive".into()));
    }
    let per: Vec<(i64, i64)> = (0..plan.chains)
        .into_par_iter()
        .map(|c| {
            let count = samples / plan.chains + usize::from(c < samples % plan.chains);
            let mut chain = GlauberChain::new(n, seed, c as u64)?;
            chain.sweeps(plan.burn_in);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                chain.sweeps(plan.thin);
                let p = top_path(&chain.pcsm()?);
                out.push((p.max(), p.at(0)));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let (maxes, t0) = per.into_iter().unzip();
    Ok(EmpiricalCdf::from_samples(n, plan.thin, seed, maxes, t0))
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::asymptotics::limit_top_path;
    use crate::combinatorics::{enumerate_gog_trapezoids, x_gog, DEFAULT_ENUM_CAP};

    #[test]
    fn moves_preserve_the_triangle() {
        for n in 1..=6 {
            let mut c = GlauberChain::new(n, 11, n as u64).unwrap();
            for _ in 0..5000 {
                c.step();
                c.triangle().unwrap();
            }
            assert_eq!(c.steps(), 5000);
        }
    }

    #[test]
    fn heat_bath_sets_are_symmetric() {
        // from every state, resampling one site leads to states whose
        // resampling set at that site is the same set
        let states = enumerate_gog_trapezoids(3, 3, DEFAULT_ENUM_CAP).unwrap();
        for s in &states {
            let mut c = GlauberChain::new(3, 0, 0).unwrap();
            c.g[..6].copy_from_slice(&s.rows().concat());
            for k in 0..6 {
                let (lo, hi) = c.allowed_at(k);
                assert!(lo <= c.g[k] && c.g[k] <= hi);
                for v in lo..=hi {
                    let mut d = c.clone();
                    d.g[k] = v;
                    d.triangle().unwrap();
                    assert_eq!(d.allowed_at(k), (lo, hi));
                }
            }
        }
    }

    #[test]
    fn uniform_on_the_42_triangles() {
        let states = enumerate_gog_trapezoids(3, 3, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(states.len(), 42);
        let mut c = GlauberChain::new(3, 5, 0).unwrap();
        c.sweeps(100);
        let records = 100_000;
        let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
        for _ in 0..records {
            c.sweeps(10);
            *counts.entry(c.g[..6].to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 42);
        let e = records as f64 / 42.0;
        let chi2: f64 = counts.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
        // 99% quantile of chi^2 with 41 degrees of freedom
        assert!(chi2 < 64.95, "chi2 = {chi2}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        assert_eq!(sample_uniform(8, 20, 42).unwrap(), sample_uniform(8, 20, 42).unwrap());
        assert_ne!(sample_uniform(8, 20, 42).unwrap(), sample_uniform(8, 20, 43).unwrap());
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                (
                    sample_many(6, 16, 10, 9).unwrap(),
                    empirical_max_law(10, 20, 30, 9).unwrap(),
                    empirical_max_law_chains(10, 21, ChainPlan { chains: 4, burn_in: 50, thin: 5 }, 9).unwrap(),
                )
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn small_laws_match_enumeration() {
        // x_gog for n = 2: {1: 2/7, 2: 4/7, 3: 1/7}
        let samples = sample_many(2, 20_000, 20, 1).unwrap();
        let mut hist = [0usize; 4];
        for p in &samples {
            hist[x_gog(p)] += 1;
        }
        for (x, p) in [(1, 2.0 / 7.0), (2, 4.0 / 7.0), (3, 1.0 / 7.0)] {
            let m = samples.len() as f64;
            let sd = (m * p * (1.0 - p)).sqrt();
            assert!((hist[x] as f64 - m * p).abs() < 3.0 * sd, "x = {x}: {hist:?}");
        }
        // max T_3 against the exact law
        let law = crate::kernel::law_of_max_t(3, &crate::kernel::PrecisionPolicy::exact()).unwrap();
        let e = empirical_max_law(3, 20_000, 30, 2).unwrap();
        for (v, p) in &law.table {
            let m = e.samples as f64;
            let got = e.raw.iter().filter(|&&r| r == *v).count() as f64;
            assert!((got - m * p).abs() < 3.0 * (m * p * (1.0 - p)).sqrt() + 1.0, "v = {v}");
        }
    }

    #[test]
    fn empirical_cdf_and_ks() {
        let e = EmpiricalCdf::from_samples(8, 1, 0, vec![5, 3, 5, 4], vec![0; 4]);
        assert_eq!(e.raw, vec![3, 4, 5, 5]);
        assert_eq!(e.steps().len(), 3);
        assert_eq!(e.steps()[2].1, 1.0);
        assert_eq!(e.cdf(e.values[1]), 0.5);
        assert_eq!(e.cdf(-1e9), 0.0);
        let ks = e.ks_to_f1(&QuadratureRule::default_rule()).unwrap();
        assert!((0.0..=1.0).contains(&ks));
        assert!(empirical_max_law(5, 0, 1, 0).is_err());
        assert!(sample_uniform(5, 0, 0).is_err());
    }

    #[test]
    fn top_path_follows_the_limit_shape() {
        let n = 100;
        let mut c = GlauberChain::new(n, 2024, 0).unwrap();
        c.sweeps(2 * n * n);
        let p = top_path(&c.pcsm().unwrap());
        let half = n as i64 / 2;
        let dev: f64 = (-half..=half)
            .map(|t| (p.at(t) as f64 / n as f64 - limit_top_path(t as f64 / n as f64).unwrap()).powi(2))
            .sum::<f64>()
            / (2 * half + 1) as f64;
        assert!(dev < 0.02, "mean squared deviation {dev}");
    }
}
