//! Binomial tails, the Chernoff bound and an audit of edge counts into large
//! vertex sets of `G(n, p)`.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{generate_er, GraphError};

#[derive(Debug, Error)]
pub enum ConcentrationError {
    #[error("audit needs p ≥ ε, got p = {p}, ε = {eps}")]
    Hypothesis { p: f64, eps: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `2·exp(−min(dev², dev)·np/4)`.
pub fn chernoff_bound(n: u64, p: f64, dev: f64) -> f64 {
    2.0 * (-(dev * dev).min(dev) * n as f64 * p / 4.0).exp()
}

/// Whether `x` deviates from `np` by more than `dev·np`. A tiny absolute slack
/// keeps boundary points like `|x − np| = dev·np` out of the event.
pub fn deviates(x: u64, n: u64, p: f64, dev: f64) -> bool {
    let mean = n as f64 * p;
    (x as f64 - mean).abs() > dev * mean + 1e-9
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailMode {
    AtLeast(u64),
    AtMost(u64),
    Exactly(u64),
    /// `|X − np| > dev·np`.
    TwoSidedDeviation(f64),
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln n! − ln(√(2πn)(n/e)^n)`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        let ln_fact: f64 = (2..=n as u64).map(|k| (k as f64).ln()).sum();
        return ln_fact - 0.5 * (LN_2PI + n.ln()) - n * n.ln() + n;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x·ln(x/m) + m − x`, by series when `x ≈ m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `P(Bin(n, p) = x)` by the saddle-point expansion, accurate to a few ulps
/// relative even far in the tails.
pub fn binomial_pmf(n: u64, p: f64, x: u64) -> f64 {
    if x > n {
        return 0.0;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if x == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
        return lc.exp();
    }
    let xf = x as f64;
    let yf = nf - xf;
    let lc = stirlerr(nf) - stirlerr(xf) - stirlerr(yf) - bd0(xf, nf * p) - bd0(yf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Compensated (Neumaier) sum.
fn stable_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Exact binomial probabilities by summing the mass function. `p` outside
/// `[0, 1]` gives NaN.
pub fn exact_binomial_tail(n: u64, p: f64, mode: TailMode) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    let pmf = |x| binomial_pmf(n, p, x);
    match mode {
        TailMode::AtLeast(k) => stable_sum((k..=n).map(pmf)),
        TailMode::AtMost(k) => stable_sum((0..=k.min(n)).map(pmf)),
        TailMode::Exactly(k) => pmf(k),
        TailMode::TwoSidedDeviation(dev) => {
            stable_sum((0..=n).filter(|&x| deviates(x, n, p, dev)).map(pmf))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernoffCheck {
    pub n: u64,
    pub p: f64,
    pub dev: f64,
    pub trials: u64,
    /// Fraction of sampled values in the deviation event.
    pub frequency: f64,
    pub bound: f64,
    /// Exact probability of the deviation event.
    pub exact: f64,
    pub pass: bool,
}

/// Samples `Bin(n, p)` `trials` times and compares the deviation frequency
/// against the Chernoff bound with `4·√(bound/trials)` sampling slack.
pub fn chernoff_empirical_check(
    n: u64,
    p: f64,
    dev: f64,
    trials: u64,
    seed: u64,
) -> Result<ChernoffCheck, ConcentrationError> {
    if trials == 0 {
        return Err(ConcentrationError::InvalidArgument("trials must be ≥ 1".into()));
    }
    let dist = Binomial::new(n, p)
        .map_err(|e| ConcentrationError::InvalidArgument(format!("Bin({n}, {p}): {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..trials)
        .filter(|_| deviates(dist.sample(&mut rng), n, p, dev))
        .count();
    let frequency = hits as f64 / trials as f64;
    let bound = chernoff_bound(n, p, dev);
    Ok(ChernoffCheck {
        n,
        p,
        dev,
        trials,
        frequency,
        bound,
        exact: exact_binomial_tail(n, p, TailMode::TwoSidedDeviation(dev)),
        pass: frequency <= bound + 4.0 * (bound / trials as f64).sqrt(),
    })
}

/// `4ε⁻³(ln ε⁻¹ + 2)`, the allowed size of an exception set.
pub fn exception_bound(eps: f64) -> f64 {
    4.0 / (eps * eps * eps) * ((1.0 / eps).ln() + 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetRecord {
    pub set_size: usize,
    /// Vertices outside the set whose edge count into it is off by more than `εp|S|`.
    pub exceptions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    pub bound: f64,
    pub sets: Vec<SetRecord>,
    /// Sets whose exception count exceeds `bound`.
    pub violations: usize,
}

impl AuditReport {
    pub fn max_exceptions(&self) -> usize {
        self.sets.iter().map(|s| s.exceptions).max().unwrap_or(0)
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "G({}, {}), eps = {}, bound = {:.2}\n{:>6} {:>8} {:>10}\n",
            self.n, self.p, self.eps, self.bound, "set", "|S|", "|X_S|"
        );
        for (k, r) in self.sets.iter().enumerate() {
            let _ = writeln!(s, "{:>6} {:>8} {:>10}", k, r.set_size, r.exceptions);
        }
        let _ = writeln!(s, "violations: {}", self.violations);
        s
    }
}

/// Draws one `G(n, p)` and `num_sets` uniform sets with `|S| ≥ εn`, counting
/// each set's exception vertices exactly.
pub fn edge_distribution_audit(
    n: usize,
    p: f64,
    eps: f64,
    num_sets: usize,
    seed: u64,
) -> Result<AuditReport, ConcentrationError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(ConcentrationError::InvalidArgument(format!("ε = {eps} outside (0, 1]")));
    }
    if p < eps {
        return Err(ConcentrationError::Hypothesis { p, eps });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = generate_er(n, p, rng.next_u64())?;
    let words = n.div_ceil(64);
    let mut rows = vec![0u64; n * words];
    for v in 0..n {
        for u in graph.neighbors(v) {
            rows[v * words + u / 64] |= 1 << (u % 64);
        }
    }
    let min_size = ((eps * n as f64).ceil() as usize).clamp(1, n.max(1));
    let sets: Vec<Vec<usize>> = (0..num_sets)
        .map(|_| {
            let size = rng.random_range(min_size..=n);
            index::sample(&mut rng, n, size).into_vec()
        })
        .collect();
    let bound = exception_bound(eps);
    let records: Vec<SetRecord> = sets
        .par_iter()
        .map(|set| {
            let mut mask = vec![0u64; words];
            for &v in set {
                mask[v / 64] |= 1 << (v % 64);
            }
            let mean = p * set.len() as f64;
            let exceptions = (0..n)
                .filter(|&v| mask[v / 64] >> (v % 64) & 1 == 0)
                .filter(|&v| {
                    let row = &rows[v * words..(v + 1) * words];
                    let hits: u32 = row.iter().zip(&mask).map(|(a, b)| (a & b).count_ones()).sum();
                    (hits as f64 - mean).abs() > eps * mean
                })
                .count();
            SetRecord {
                set_size: set.len(),
                exceptions,
            }
        })
        .collect();
    let violations = records.iter().filter(|r| r.exceptions as f64 > bound).count();
    Ok(AuditReport {
        n,
        p,
        eps,
        bound,
        sets: records,
        violations,
    })
}
