//! Random link states, reachability and path counting, exact enumeration of the linking
//! probability and Monte-Carlo estimates.
//!
//! Every Monte-Carlo sample `i` draws from its own ChaCha stream keyed by `(seed, i)` and
//! results are aggregated as integer tallies, so estimates are bit-identical for a given
//! seed no matter how the work is split across threads.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::distributions::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::netgraph::{NetworkParams, VertexId};

/// Largest number of links [`exact_q`] enumerates by default (`2^24` states).
pub const DEFAULT_EXACT_BITS: u32 = 24;

/// Two-sided 95% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Idle (`true`) / busy flags for every link, packed 64 per word.
///
/// Links are the vertices of ranks `1..l-1`; link `(rank, label)` has index
/// `(rank - 1) * b^k + label_index`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkState {
    params: NetworkParams,
    words: Vec<u64>,
}

impl LinkState {
    pub fn link_count(params: &NetworkParams) -> usize {
        params.l.saturating_sub(1) as usize * params.rank_size()
    }

    pub fn uniform(params: &NetworkParams, idle: bool) -> Self {
        let n = Self::link_count(params);
        let mut words = vec![if idle { u64::MAX } else { 0 }; n.div_ceil(64)];
        if idle && !n.is_multiple_of(64) {
            *words.last_mut().expect("nonempty") = (1u64 << (n % 64)) - 1;
        }
        Self {
            params: *params,
            words,
        }
    }

    /// State whose first (up to 64) links follow the bits of `bits`.
    pub fn from_bits(params: &NetworkParams, bits: u64) -> Self {
        let mut s = Self::uniform(params, false);
        let n = Self::link_count(params);
        if let Some(w) = s.words.first_mut() {
            *w = if n >= 64 {
                bits
            } else {
                bits & ((1u64 << n) - 1)
            };
        }
        s
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        Self::link_count(&self.params)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, rank: u32, label_index: usize) -> usize {
        debug_assert!(rank >= 1 && rank < self.params.l);
        (rank as usize - 1) * self.params.rank_size() + label_index
    }

    pub fn is_idle_at(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_idle(&self, rank: u32, label_index: usize) -> bool {
        self.is_idle_at(self.index(rank, label_index))
    }

    pub fn set_idle(&mut self, i: usize, idle: bool) {
        let mask = 1u64 << (i % 64);
        if idle {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn idle_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Monte-Carlo estimate of a probability with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub n: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_successes(successes: u64, n: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, n);
        Self {
            p_hat: successes as f64 / n as f64,
            n,
            ci_low,
            ci_high,
            seed,
        }
    }

    /// Binomial standard deviation of `p_hat` when the true probability is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n as f64).sqrt()
    }

    /// True when `p_hat` lies within `z` standard deviations of `p`.
    pub fn within_sigmas(&self, p: f64, z: f64) -> bool {
        (self.p_hat - p).abs() <= z * self.sigma_at(p)
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    assert!(n > 0 && successes <= n);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    (
        (center - half).min(p).max(0.0),
        (center + half).max(p).min(1.0),
    )
}

/// Generator for Monte-Carlo sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Marks every link idle independently with probability `q`.
pub fn sample_state<R: Rng + ?Sized>(params: &NetworkParams, q: f64, rng: &mut R) -> LinkState {
    let coin = Bernoulli::new(q).expect("q checked by caller");
    let mut state = LinkState::uniform(params, false);
    for i in 0..state.len() {
        if coin.sample(rng) {
            state.set_idle(i, true);
        }
    }
    state
}

// Label-index weight of the position changed by `stage`, or `None` when k = 0.
fn stage_weight(params: &NetworkParams, stage: u32) -> Option<usize> {
    params
        .stage_position(stage)
        .map(|j| (params.b as usize).pow(params.k - 1 - j as u32))
}

/// Vertices of rank `to` reachable from `sources` (all in rank `from`) along paths whose
/// intermediate vertices (ranks strictly between) are idle. Endpoint statuses are ignored.
fn reach(state: &LinkState, from: u32, sources: &[usize], to: u32) -> Vec<bool> {
    let params = state.params();
    let size = params.rank_size();
    let b = params.b as usize;
    let mut cur = vec![false; size];
    for &s in sources {
        cur[s] = true;
    }
    let mut next = vec![false; size];
    for rank in from + 1..=to {
        let gate = |y: usize| rank == to || state.is_idle(rank, y);
        match stage_weight(params, rank) {
            None => next[0] = cur[0] && gate(0),
            Some(w) => {
                for (y, slot) in next.iter_mut().enumerate() {
                    let base = y - (y / w % b) * w;
                    *slot = gate(y) && (0..b).any(|d| cur[base + d * w]);
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

fn count_layers<T>(state: &LinkState, source: usize, to: u32) -> Vec<T>
where
    T: Clone + Zero + One + for<'a> std::ops::AddAssign<&'a T>,
{
    let params = state.params();
    let size = params.rank_size();
    let b = params.b as usize;
    let mut cur = vec![T::zero(); size];
    cur[source] = T::one();
    for rank in 1..=to {
        let mut next = vec![T::zero(); size];
        let gated = rank < to;
        match stage_weight(params, rank) {
            None => {
                if !gated || state.is_idle(rank, 0) {
                    for _ in 0..b {
                        next[0] += &cur[0];
                    }
                }
            }
            Some(w) => {
                for (y, slot) in next.iter_mut().enumerate() {
                    if gated && !state.is_idle(rank, y) {
                        continue;
                    }
                    let base = y - (y / w % b) * w;
                    for d in 0..b {
                        *slot += &cur[base + d * w];
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

fn check_endpoints(params: &NetworkParams, v: &VertexId, w: &VertexId) -> Result<()> {
    params.check_vertex(v)?;
    params.check_vertex(w)?;
    if v.rank != 0 || w.rank != params.l {
        return Err(Error::RankMismatch(format!(
            "expected input in rank 0 and output in rank {}, got {} and {}",
            params.l, v.rank, w.rank
        )));
    }
    Ok(())
}

/// True when an all-idle path joins input `v` to output `w`.
pub fn is_linked(
    params: &NetworkParams,
    state: &LinkState,
    v: &VertexId,
    w: &VertexId,
) -> Result<bool> {
    check_endpoints(params, v, w)?;
    Ok(linked_indices(
        state,
        v.label.to_index(params.b),
        w.label.to_index(params.b),
    ))
}

fn linked_indices(state: &LinkState, v: usize, w: usize) -> bool {
    let l = state.params().l;
    if l == 0 {
        return v == w;
    }
    reach(state, 0, &[v], l)[w]
}

/// Number of all-idle paths from input `v` to output `w`.
pub fn count_idle_paths(
    params: &NetworkParams,
    state: &LinkState,
    v: &VertexId,
    w: &VertexId,
) -> Result<BigUint> {
    check_endpoints(params, v, w)?;
    let (vi, wi) = (v.label.to_index(params.b), w.label.to_index(params.b));
    Ok(count_indices(state, vi, wi))
}

fn count_indices(state: &LinkState, v: usize, w: usize) -> BigUint {
    let params = state.params();
    if params.l == 0 {
        return BigUint::from(u8::from(v == w));
    }
    // Counts at rank m are at most b^m.
    if (params.l as f64) * (params.b as f64).log2() < 126.0 {
        BigUint::from(count_layers::<u128>(state, v, params.l)[w])
    } else {
        count_layers::<BigUint>(state, v, params.l)[w].clone()
    }
}

fn check_samples(q: f64, n: u64) -> Result<()> {
    check_probability(q)?;
    if n == 0 {
        return Err(Error::InvalidParams("need at least one sample".into()));
    }
    Ok(())
}

/// Fraction of `n` random states linking input `0^k` to output `0^k`.
pub fn estimate_q(params: &NetworkParams, q: f64, n: u64, seed: u64) -> Result<Estimate> {
    check_samples(q, n)?;
    let linked = (0..n)
        .into_par_iter()
        .filter(|&i| {
            let state = sample_state(params, q, &mut sample_rng(seed, i));
            linked_indices(&state, 0, 0)
        })
        .count() as u64;
    Ok(Estimate::from_successes(linked, n, seed))
}

/// Sample moments of the idle-path count `X` between `0^k` and `0^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean_x: f64,
    pub mean_x2: f64,
    /// Standard errors of the two sample means.
    pub se_x: f64,
    pub se_x2: f64,
    pub max_x: u64,
    pub n: u64,
    pub seed: u64,
}

pub fn estimate_moments(
    params: &NetworkParams,
    q: f64,
    n: u64,
    seed: u64,
) -> Result<MomentEstimate> {
    check_samples(q, n)?;
    let zero = || {
        [
            BigUint::zero(),
            BigUint::zero(),
            BigUint::zero(),
            BigUint::zero(),
        ]
    };
    let (sums, max_x) = (0..n)
        .into_par_iter()
        .map(|i| {
            let state = sample_state(params, q, &mut sample_rng(seed, i));
            let x = count_indices(&state, 0, 0);
            let x2 = &x * &x;
            let max = x.to_u64().unwrap_or(u64::MAX);
            ([x.clone(), x2.clone(), &x2 * &x, &x2 * &x2], max)
        })
        .reduce(
            || (zero(), 0),
            |(a, ma), (b, mb)| {
                let [a0, a1, a2, a3] = a;
                let [b0, b1, b2, b3] = b;
                ([a0 + b0, a1 + b1, a2 + b2, a3 + b3], ma.max(mb))
            },
        );
    let nf = n as f64;
    let mean = |s: &BigUint| s.to_f64().unwrap_or(f64::INFINITY) / nf;
    let (m1, m2, m4) = (mean(&sums[0]), mean(&sums[1]), mean(&sums[3]));
    Ok(MomentEstimate {
        mean_x: m1,
        mean_x2: m2,
        se_x: ((m2 - m1 * m1).max(0.0) / nf).sqrt(),
        se_x2: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        max_x,
        n,
        seed,
    })
}

/// Counts of linking states by number of idle links: entry `i` is the number of states with
/// `i` idle links in which `0^k` reaches `0^k`.
pub fn linking_polynomial(params: &NetworkParams, max_bits: u32) -> Result<Vec<u64>> {
    let m = LinkState::link_count(params);
    if m > max_bits as usize || m >= 64 {
        return Err(Error::CapExceeded {
            size: 1u128 << m.min(127),
            cap: 1u128 << max_bits,
        });
    }
    let mut counts = vec![0u64; m + 1];
    let mut state = LinkState::uniform(params, false);
    let mut idle = 0usize;
    // Gray-code order: state g(i) = i ^ (i >> 1) differs from g(i-1) in bit trailing_zeros(i).
    for i in 0u64..(1u64 << m) {
        if i > 0 {
            let bit = i.trailing_zeros() as usize;
            state.flip(bit);
            if state.is_idle_at(bit) {
                idle += 1;
            } else {
                idle -= 1;
            }
        }
        if linked_indices(&state, 0, 0) {
            counts[idle] += 1;
        }
    }
    Ok(counts)
}

/// Exact linking probability of `0^k -> 0^k` by enumerating all `2^M` link states.
pub fn exact_q_capped(params: &NetworkParams, q: f64, max_bits: u32) -> Result<f64> {
    check_probability(q)?;
    let counts = linking_polynomial(params, max_bits)?;
    let m = counts.len() as i32 - 1;
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| c as f64 * q.powi(i as i32) * (1.0 - q).powi(m - i as i32))
        .sum())
}

pub fn exact_q(params: &NetworkParams, q: f64) -> Result<f64> {
    exact_q_capped(params, q, DEFAULT_EXACT_BITS)
}

/// Monte-Carlo probability that an idle path joins some link of `v_set` (rank `floor(k/2)`)
/// to some link of `w_set` (rank `l - floor(k/2)`), both endpoints exclusive.
pub fn linkset_connect_prob(
    params: &NetworkParams,
    v_set: &[VertexId],
    w_set: &[VertexId],
    q: f64,
    n: u64,
    seed: u64,
) -> Result<Estimate> {
    check_samples(q, n)?;
    let r = params.k / 2;
    let s = params
        .l
        .checked_sub(params.k / 2)
        .filter(|&s| s > r)
        .ok_or_else(|| {
            Error::RankMismatch(format!(
                "no room between ranks for k = {}, l = {}",
                params.k, params.l
            ))
        })?;
    if v_set.is_empty() || w_set.is_empty() {
        return Err(Error::InvalidParams("link sets must be nonempty".into()));
    }
    let indices = |set: &[VertexId], rank: u32| -> Result<Vec<usize>> {
        set.iter()
            .map(|x| {
                params.check_vertex(x)?;
                if x.rank != rank {
                    return Err(Error::RankMismatch(format!(
                        "vertex {x} is not in rank {rank}"
                    )));
                }
                Ok(x.label.to_index(params.b))
            })
            .collect()
    };
    let sources = indices(v_set, r)?;
    let targets = indices(w_set, s)?;
    let hits = (0..n)
        .into_par_iter()
        .filter(|&i| {
            let state = sample_state(params, q, &mut sample_rng(seed, i));
            let reached = reach(&state, r, &sources, s);
            targets.iter().any(|&t| reached[t])
        })
        .count() as u64;
    Ok(Estimate::from_successes(hits, n, seed))
}
