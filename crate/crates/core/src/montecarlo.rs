//! Logical failure estimation: direct Monte Carlo, subset (importance)
//! sampling stratified by fault count, pseudothreshold search and round
//! crossovers.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decoder::Experiment;
use crate::noise::{Fault, FaultLocation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("k_max = {k_max} exceeds the {locations} fault locations with non-zero probability")]
    KMaxTooLarge { k_max: usize, locations: usize },
    #[error("no sign change of p_L - comparator in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("no significant crossover up to {0} rounds")]
    NoCrossing(usize),
    #[error("invalid bracket [{0}, {1}]")]
    BadBracket(f64, f64),
}

/// Runs independent work items, possibly in parallel. Results come back in
/// index order so reductions are deterministic.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stratum index used for direct sampling.
pub const DIRECT_STRATUM: u64 = u64::MAX;

/// The generator for one trial, a function of `(seed, stratum, trial)` only.
pub fn trial_rng(seed: u64, stratum: u64, trial: u64) -> ChaCha8Rng {
    let s = splitmix64(splitmix64(splitmix64(seed) ^ stratum) ^ trial);
    ChaCha8Rng::seed_from_u64(s)
}

const CHUNK: usize = 64;

/// One fault-count stratum.
#[derive(Clone, Debug, PartialEq)]
pub struct Stratum {
    pub k: usize,
    /// Probability of exactly `k` faults (set when combined).
    pub weight: f64,
    pub trials: u64,
    pub failures: u64,
    /// Conditional failure probability given `k` faults.
    pub a_k: f64,
    /// Variance of `a_k` (zero when enumerated).
    pub variance: f64,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub trials: u64,
    pub failures: u64,
    pub p_logical: f64,
    pub stderr: f64,
    pub seed: u64,
    /// Empty for direct sampling.
    pub strata: Vec<Stratum>,
    /// Probability of more faults than the largest stratum.
    pub tail: f64,
}

impl SimResult {
    /// `p_logical ± z·stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.p_logical - z * self.stderr, self.p_logical + z * self.stderr)
    }
}

fn active(locations: &[FaultLocation]) -> Vec<FaultLocation> {
    locations.iter().copied().filter(|l| l.probability > 0.0).collect()
}

/// Plain Monte Carlo: every location fires independently in every trial.
pub fn run_direct<E: Executor>(
    exp: &Experiment,
    locations: &[FaultLocation],
    trials: u64,
    seed: u64,
    exec: &E,
) -> Result<SimResult, McError> {
    if trials == 0 {
        return Err(McError::NoTrials);
    }
    let locs = active(locations);
    let chunks = trials.div_ceil(CHUNK as u64) as usize;
    let counts = exec.map(chunks, |c| {
        let mut faults = Vec::new();
        let start = (c * CHUNK) as u64;
        let end = (start + CHUNK as u64).min(trials);
        (start..end)
            .filter(|&t| {
                let mut rng = trial_rng(seed, DIRECT_STRATUM, t);
                crate::noise::sample_faults(&locs, &mut rng, &mut faults);
                !exp.run(&faults, &mut rng).pass
            })
            .count() as u64
    });
    let failures: u64 = counts.iter().sum();
    let p = failures as f64 / trials as f64;
    Ok(SimResult {
        trials,
        failures,
        p_logical: p,
        stderr: libm::sqrt(p * (1.0 - p) / trials as f64),
        seed,
        strata: Vec::new(),
        tail: 0.0,
    })
}

/// `P(exactly k faults)` for `k ≤ k_max` among independent locations with
/// the given probabilities, plus the remaining tail mass.
pub fn poisson_binomial(probs: &[f64], k_max: usize) -> (Vec<f64>, f64) {
    let mut w = vec![0.0; k_max + 1];
    w[0] = 1.0;
    for &p in probs {
        for k in (1..=k_max).rev() {
            w[k] = w[k] * (1.0 - p) + w[k - 1] * p;
        }
        w[0] *= 1.0 - p;
    }
    let tail = (1.0 - w.iter().sum::<f64>()).max(0.0);
    (w, tail)
}

/// Draws `k`-subsets of locations with probability proportional to the
/// product of their odds `p/(1-p)`, i.e. the law of the faulting set given
/// that exactly `k` locations fault.
#[derive(Clone, Debug)]
pub struct SubsetSampler {
    n: usize,
    k_max: usize,
    odds: Vec<f64>,
    /// `suffix[i * (k_max + 1) + j]` = e_j(odds[i..]).
    suffix: Vec<f64>,
    uniform: bool,
}

impl SubsetSampler {
    pub fn new(probs: &[f64], k_max: usize) -> Self {
        let n = probs.len();
        let uniform = probs.windows(2).all(|w| w[0] == w[1]);
        let raw: Vec<f64> = probs.iter().map(|&p| p / (1.0 - p)).collect();
        let mean = raw.iter().sum::<f64>() / n.max(1) as f64;
        let odds: Vec<f64> = raw.iter().map(|o| o / mean).collect();
        let width = k_max + 1;
        let mut suffix = vec![0.0; (n + 1) * width];
        suffix[n * width] = 1.0;
        if !uniform {
            for i in (0..n).rev() {
                suffix[i * width] = 1.0;
                for j in 1..=k_max {
                    suffix[i * width + j] = suffix[(i + 1) * width + j] + odds[i] * suffix[(i + 1) * width + j - 1];
                }
            }
        }
        Self {
            n,
            k_max,
            odds,
            suffix,
            uniform,
        }
    }

    /// Relative weight of one subset (odds normalised by their mean).
    pub fn subset_weight(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&i| self.odds[i]).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R, out: &mut Vec<usize>) {
        assert!(k <= self.k_max && k <= self.n);
        out.clear();
        if self.uniform {
            out.extend(rand::seq::index::sample(rng, self.n, k).iter());
            out.sort_unstable();
            return;
        }
        let w = self.k_max + 1;
        let mut j = k;
        let mut i = 0;
        while j > 0 {
            let total = self.suffix[i * w + j];
            let take = self.odds[i] * self.suffix[(i + 1) * w + j - 1];
            if take >= total || rng.random::<f64>() * total < take {
                out.push(i);
                j -= 1;
            }
            i += 1;
        }
    }
}

/// Settings for [`run_importance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImportanceParams {
    pub trials_per_stratum: u64,
    pub k_max: usize,
    /// Strata with at most this many fault patterns are enumerated instead of
    /// sampled; `k ≤ 1` is always enumerated.
    pub exhaustive_budget: u64,
    /// Add strata while the tail exceeds 10% of the estimate.
    pub auto_raise: bool,
}

impl Default for ImportanceParams {
    fn default() -> Self {
        Self {
            trials_per_stratum: 10_000,
            k_max: 4,
            exhaustive_budget: 20_000,
            auto_raise: true,
        }
    }
}

fn elementary_symmetric(values: impl Iterator<Item = f64>, k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for v in values {
        for j in (1..=k).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

/// Number of distinct fault patterns (subset and Pauli outcomes) with exactly
/// `k` faulting locations.
pub fn pattern_count(locations: &[FaultLocation], k: usize) -> f64 {
    elementary_symmetric(locations.iter().map(|l| l.n_outcomes() as f64), k)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

struct Pattern {
    weight: f64,
    faults: Vec<Fault>,
}

fn enumerate_patterns(locs: &[FaultLocation], sampler: &SubsetSampler, k: usize) -> Vec<Pattern> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(Pattern {
            weight: 1.0,
            faults: Vec::new(),
        });
        return out;
    }
    let n = locs.len();
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        let outcomes: Vec<usize> = comb.iter().map(|&i| locs[i].n_outcomes()).collect();
        let combos: usize = outcomes.iter().product();
        let w = sampler.subset_weight(&comb) / combos as f64;
        let mut digits = vec![0usize; k];
        for _ in 0..combos {
            let mut faults: Vec<Fault> = comb.iter().zip(&digits).map(|(&i, &d)| locs[i].outcome(d)).collect();
            faults.sort_by_key(Fault::slot);
            out.push(Pattern { weight: w, faults });
            for (d, &m) in digits.iter_mut().zip(&outcomes) {
                *d += 1;
                if *d < m {
                    break;
                }
                *d = 0;
            }
        }
        if !next_combination(&mut comb, n) {
            break;
        }
    }
    out
}

/// Estimates the conditional failure probability `A_k` for each `k` in `ks`,
/// enumerating small strata and sampling the rest.
pub fn estimate_strata<E: Executor>(
    exp: &Experiment,
    locations: &[FaultLocation],
    ks: core::ops::RangeInclusive<usize>,
    params: &ImportanceParams,
    seed: u64,
    exec: &E,
) -> Result<Vec<Stratum>, McError> {
    let locs = active(locations);
    let k_hi = *ks.end();
    if k_hi > locs.len() {
        return Err(McError::KMaxTooLarge {
            k_max: k_hi,
            locations: locs.len(),
        });
    }
    let probs: Vec<f64> = locs.iter().map(|l| l.probability).collect();
    let sampler = SubsetSampler::new(&probs, k_hi);
    let mut out = Vec::new();
    for k in ks {
        let count = pattern_count(&locs, k);
        let stratum = if k <= 1 || count <= params.exhaustive_budget as f64 {
            let patterns = enumerate_patterns(&locs, &sampler, k);
            let fails = exec.map(patterns.len(), |i| {
                let mut rng = trial_rng(seed, k as u64, i as u64);
                !exp.run(&patterns[i].faults, &mut rng).pass
            });
            let total: f64 = patterns.iter().map(|p| p.weight).sum();
            let failed: f64 = patterns
                .iter()
                .zip(&fails)
                .filter(|(_, &f)| f)
                .fold(0.0, |acc, (p, _)| acc + p.weight);
            Stratum {
                k,
                weight: 0.0,
                trials: patterns.len() as u64,
                failures: fails.iter().filter(|&&f| f).count() as u64,
                a_k: if total > 0.0 { failed / total } else { 0.0 },
                variance: 0.0,
                exhaustive: true,
            }
        } else {
            let trials = params.trials_per_stratum.max(1);
            let chunks = trials.div_ceil(CHUNK as u64) as usize;
            let counts = exec.map(chunks, |c| {
                let mut subset = Vec::with_capacity(k);
                let mut faults = Vec::with_capacity(k);
                let start = (c * CHUNK) as u64;
                let end = (start + CHUNK as u64).min(trials);
                (start..end)
                    .filter(|&t| {
                        let mut rng = trial_rng(seed, k as u64, t);
                        sampler.sample(k, &mut rng, &mut subset);
                        faults.clear();
                        faults.extend(subset.iter().map(|&i| locs[i].sample_fault(&mut rng)));
                        faults.sort_by_key(Fault::slot);
                        !exp.run(&faults, &mut rng).pass
                    })
                    .count() as u64
            });
            let failures: u64 = counts.iter().sum();
            let a = failures as f64 / trials as f64;
            Stratum {
                k,
                weight: 0.0,
                trials,
                failures,
                a_k: a,
                variance: a * (1.0 - a) / trials as f64,
                exhaustive: false,
            }
        };
        out.push(stratum);
    }
    Ok(out)
}

/// Weights strata `0..=k_max` by the Poisson-binomial law of `probs`:
/// `p_L = Σ w_k A_k`, with the tail mass added to the standard error.
pub fn combine_strata(strata: &[Stratum], probs: &[f64], seed: u64) -> SimResult {
    let k_max = strata.iter().map(|s| s.k).max().unwrap_or(0);
    let (w, tail) = poisson_binomial(probs, k_max);
    let mut out = SimResult {
        trials: 0,
        failures: 0,
        p_logical: 0.0,
        stderr: 0.0,
        seed,
        strata: Vec::with_capacity(strata.len()),
        tail,
    };
    let mut var = 0.0;
    for s in strata {
        let mut s = s.clone();
        s.weight = w[s.k];
        out.p_logical += s.weight * s.a_k;
        var += s.weight * s.weight * s.variance;
        out.trials += s.trials;
        out.failures += s.failures;
        out.strata.push(s);
    }
    out.stderr = libm::sqrt(var) + tail;
    out
}

/// Subset sampling over strata `0..=k_max`, raising `k_max` while the
/// unsampled tail exceeds 10% of the estimate (when enabled).
pub fn run_importance<E: Executor>(
    exp: &Experiment,
    locations: &[FaultLocation],
    params: &ImportanceParams,
    seed: u64,
    exec: &E,
) -> Result<SimResult, McError> {
    let locs = active(locations);
    let probs: Vec<f64> = locs.iter().map(|l| l.probability).collect();
    let mut strata = estimate_strata(exp, &locs, 0..=params.k_max, params, seed, exec)?;
    let k_cap = locs.len().min(params.k_max + 16);
    loop {
        let res = combine_strata(&strata, &probs, seed);
        let k = strata.len() - 1;
        if !params.auto_raise || k >= k_cap || res.tail <= 0.1 * res.p_logical {
            return Ok(res);
        }
        strata.extend(estimate_strata(exp, &locs, k + 1..=k + 1, params, seed, exec)?);
    }
}

/// Strata of a model whose locations all share one probability. `A_k` then
/// does not depend on that probability, so one set of strata serves every
/// point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformStrata {
    pub n_locations: usize,
    pub strata: Vec<Stratum>,
    pub seed: u64,
}

impl UniformStrata {
    pub fn estimate<E: Executor>(
        exp: &Experiment,
        locations: &[FaultLocation],
        params: &ImportanceParams,
        seed: u64,
        exec: &E,
    ) -> Result<Self, McError> {
        let strata = estimate_strata(exp, locations, 0..=params.k_max, params, seed, exec)?;
        Ok(Self {
            n_locations: locations.iter().filter(|l| l.probability > 0.0).count(),
            strata,
            seed,
        })
    }

    pub fn at(&self, p: f64) -> SimResult {
        let probs = vec![p; self.n_locations];
        combine_strata(&self.strata, &probs, self.seed)
    }
}

/// Result of a pseudothreshold search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold {
    pub p: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Bisects (in log space) for the crossing of `p_L(p)` with `comparator(p)`.
/// `eval` returns `(p_L, stderr)`; below the threshold `p_L < comparator`.
/// Stops when the bracket is narrower than `rel_tol` or when the 2σ interval
/// of `p_L - comparator` covers zero and is under 10% of `p` wide.
pub fn pseudothreshold(
    mut eval: impl FnMut(f64) -> (f64, f64),
    comparator: impl Fn(f64) -> f64,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<Threshold, McError> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(McError::BadBracket(lo, hi));
    }
    let diff = |e: (f64, f64), p: f64| (e.0 - comparator(p), e.1);
    let (d_lo, _) = diff(eval(lo), lo);
    let (d_hi, _) = diff(eval(hi), hi);
    let mut evaluations = 2;
    if !(d_lo < 0.0 && d_hi > 0.0) {
        return Err(McError::NoSignChange { lo, hi });
    }
    while hi / lo > 1.0 + rel_tol {
        let mid = libm::sqrt(lo * hi);
        let (d, se) = diff(eval(mid), mid);
        evaluations += 1;
        if libm::fabs(d) <= 2.0 * se && 4.0 * se < 0.1 * mid {
            return Ok(Threshold {
                p: mid,
                lo,
                hi,
                evaluations,
            });
        }
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        p: libm::sqrt(lo * hi),
        lo,
        hi,
        evaluations,
    })
}

/// One point of a round sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundComparison {
    pub rounds: usize,
    pub baconshor: SimResult,
    pub surface: SimResult,
}

impl RoundComparison {
    /// Surface-17 better with non-overlapping 2σ intervals.
    pub fn surface_wins(&self) -> bool {
        self.surface.interval(2.0).1 < self.baconshor.interval(2.0).0
    }
}

/// The first round count in `1..=max_rounds` at which `eval(rounds)` (Bacon-
/// Shor, Surface-17) shows Surface-17 significantly ahead, with the sweep.
pub fn crossover_rounds(
    mut eval: impl FnMut(usize) -> (SimResult, SimResult),
    max_rounds: usize,
) -> Result<(usize, Vec<RoundComparison>), McError> {
    let mut sweep = Vec::new();
    for rounds in 1..=max_rounds {
        let (baconshor, surface) = eval(rounds);
        let point = RoundComparison {
            rounds,
            baconshor,
            surface,
        };
        let wins = point.surface_wins();
        sweep.push(point);
        if wins {
            return Ok((rounds, sweep));
        }
    }
    Err(McError::NoCrossing(max_rounds))
}
