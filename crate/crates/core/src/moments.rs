//! First and second moments of the idle-path count `X` between a fixed input and output.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::genfun;
use crate::netgraph::{self, NetworkParams, VertexId};

/// Moments of `X` and the Markov / second-moment bounds on the linking probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub ex_x: f64,
    pub ex_x2_exact: f64,
    /// Leading-order asymptotic second moment; `None` when `q <= 1/b`.
    pub ex_x2_asymptotic: Option<f64>,
    pub markov_upper: f64,
    pub chebyshev_lower: f64,
}

fn check(b: u32, k: u32, l: u32, q: f64) -> Result<()> {
    NetworkParams::new(b, k, l)?;
    if l < k {
        return Err(Error::InvalidParams(format!(
            "moments need l >= k, got k = {k}, l = {l}"
        )));
    }
    check_probability(q)
}

fn links_on_path(l: u32) -> i32 {
    l.saturating_sub(1) as i32
}

/// `Ex[X] = b^(l-k) q^(l-1)`.
pub fn expected_paths(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    check(b, k, l, q)?;
    Ok((b as f64).powi((l - k) as i32) * q.powi(links_on_path(l)))
}

/// `Ex[X^2] = Ex[X] * phi_l(q)`, an exact identity.
pub fn second_moment(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    let ex = expected_paths(b, k, l, q)?;
    if k == 0 {
        // Parallel edges share every link, so X is b^l times an indicator.
        return Ok(ex * (b as f64).powi(l as i32));
    }
    Ok(ex * genfun::phi_eval(b, k, l, q)?)
}

/// Exact rational second moment via the integer polynomial `phi_l`.
pub fn second_moment_exact(b: u32, k: u32, l: u32, q: &BigRational) -> Result<BigRational> {
    if k == 0 || l < k {
        return Err(Error::InvalidParams("exact mode needs 1 <= k <= l".into()));
    }
    let ex = BigRational::from_integer(BigInt::from(b).pow(l - k)) * q.clone().pow(l as i32 - 1);
    Ok(ex * genfun::phi_poly(b, k, l)?.eval_rational(q))
}

fn require_supercritical(b: u32, q: f64) -> Result<()> {
    if q * b as f64 <= 1.0 {
        Err(Error::Regime(format!(
            "q = {q} must exceed 1/b = {}",
            1.0 / b as f64
        )))
    } else {
        Ok(())
    }
}

/// Leading terms `Ex[X] ((b-1)/(bq-1))^2 b^(l-k) q^(l+1) + Ex[X]`.
pub fn second_moment_asymptotic(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    let ex = expected_paths(b, k, l, q)?;
    require_supercritical(b, q)?;
    let bf = b as f64;
    let ratio = (bf - 1.0) / (bf * q - 1.0);
    Ok(ex * (ratio * ratio * bf.powi((l - k) as i32) * q.powi(l as i32 + 1) + 1.0))
}

/// Markov bound `Q <= min(1, Ex[X])`.
pub fn markov_upper_bound(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    Ok(expected_paths(b, k, l, q)?.min(1.0))
}

/// Second-moment bound `Q >= Ex[X]^2 / Ex[X^2]`.
///
/// Not clamped: a value above one means the moments are inconsistent and panics.
pub fn chebyshev_lower_bound(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    let ex = expected_paths(b, k, l, q)?;
    if ex == 0.0 {
        return Ok(0.0);
    }
    let ex2 = second_moment(b, k, l, q)?;
    let bound = ex * ex / ex2;
    assert!(
        (0.0..=1.0 + 1e-12).contains(&bound),
        "second-moment bound {bound} outside [0, 1] at b={b} k={k} l={l} q={q}"
    );
    Ok(bound)
}

/// `lim_k Ex[X]^2 / Ex[X^2]` at fixed `q`: `(bq-1)^2 / ((b-1)^2 q^2 + (bq-1)^2 q)`.
pub fn critical_ratio_limit(b: u32, q: f64) -> Result<f64> {
    require_supercritical(b, q)?;
    check_probability(q)?;
    let bf = b as f64;
    let s = (bf * q - 1.0).powi(2);
    Ok(s / ((bf - 1.0).powi(2) * q * q + s * q))
}

/// Oracle: sums `q^|links(u) ∪ links(u')|` over ordered pairs of paths `0^k -> 0^k`.
pub fn brute_second_moment(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    check(b, k, l, q)?;
    let params = NetworkParams::new(b, k, l)?;
    let paths = netgraph::enumerate_paths_capped(
        &params,
        &VertexId::zero(0, k),
        &VertexId::zero(l, k),
        netgraph::DEFAULT_PATH_CAP,
    )?;
    let pairs = (paths.len() as u128).pow(2);
    if pairs > netgraph::DEFAULT_PATH_CAP {
        return Err(Error::CapExceeded {
            size: pairs,
            cap: netgraph::DEFAULT_PATH_CAP,
        });
    }
    let link_sets: Vec<BTreeSet<VertexId>> = paths
        .iter()
        .map(|p| netgraph::path_links(p, &params).into_iter().collect())
        .collect();
    let mut total = 0.0;
    for a in &link_sets {
        for c in &link_sets {
            total += q.powi(a.union(c).count() as i32);
        }
    }
    Ok(total)
}

pub fn moment_report(b: u32, k: u32, l: u32, q: f64) -> Result<MomentReport> {
    let ex_x = expected_paths(b, k, l, q)?;
    Ok(MomentReport {
        ex_x,
        ex_x2_exact: second_moment(b, k, l, q)?,
        ex_x2_asymptotic: second_moment_asymptotic(b, k, l, q).ok(),
        markov_upper: markov_upper_bound(b, k, l, q)?,
        chebyshev_lower: chebyshev_lower_bound(b, k, l, q)?,
    })
}
