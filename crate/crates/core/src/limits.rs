//! Threshold and limit quantities for `l = c k` as `k` grows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun;

/// Summary of the limit constants at `(b, q, c)`; entries are `None` where undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub b: u32,
    pub q: f64,
    pub c: f64,
    pub q_c: f64,
    pub xi: Option<f64>,
    /// Limiting linking probability; `None` exactly at `q = q_c`.
    pub q_limit: Option<f64>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub q_star: Option<f64>,
}

fn check_base(b: u32) -> Result<()> {
    if b < 2 {
        Err(Error::InvalidParams(format!("base must be >= 2, got {b}")))
    } else {
        Ok(())
    }
}

fn check_supercritical(b: u32, q: f64) -> Result<()> {
    check_base(b)?;
    if !(q * b as f64 > 1.0 && q < 1.0) {
        return Err(Error::Regime(format!(
            "need 1/b < q < 1 for a non-trivial fixed point, got q = {q}"
        )));
    }
    Ok(())
}

/// `q_c = b^(-(c-1)/c)`.
pub fn critical_vacancy(b: u32, c: f64) -> Result<f64> {
    check_base(b)?;
    if !(c > 1.0) {
        return Err(Error::InvalidParams(format!(
            "aspect ratio c must exceed 1, got {c}"
        )));
    }
    Ok((b as f64).powf(-(c - 1.0) / c))
}

/// Unique root in `(0, 1)` of `x = (1 - q(1-x))^b`.
///
/// Bisection on `g(x) = (1 - q(1-x))^b - x` over `[0, 1 - 1e-12]`, then Newton polish.
pub fn fixed_point_xi(b: u32, q: f64) -> Result<f64> {
    check_supercritical(b, q)?;
    let bi = b as i32;
    let g = |x: f64| (1.0 - q * (1.0 - x)).powi(bi) - x;
    let dg = |x: f64| b as f64 * q * (1.0 - q * (1.0 - x)).powi(bi - 1) - 1.0;

    let (mut lo, mut hi) = (0.0, 1.0 - 1e-12);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::NoConvergence(format!(
            "fixed-point bracket lost sign change at b = {b}, q = {q}"
        )));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let d = dg(x);
        if d == 0.0 {
            break;
        }
        let next = x - g(x) / d;
        if !(next > 0.0 && next < 1.0) {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Limiting linking probability: `0` below `q_c`, `(1 - xi)^2` above, refused at `q_c`.
pub fn limiting_q(b: u32, q: f64, c: f64) -> Result<f64> {
    let q_c = critical_vacancy(b, c)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParams(format!("need 0 < q < 1, got {q}")));
    }
    // A few ulps of slack so that a decimal rendering of q_c is also refused.
    if (q - q_c).abs() <= 4.0 * f64::EPSILON * q_c {
        return Err(Error::Threshold { q_c });
    }
    if q < q_c {
        return Ok(0.0);
    }
    let xi = fixed_point_xi(b, q)?;
    Ok((1.0 - xi) * (1.0 - xi))
}

/// Branching contraction constant `eta = b (1 - q(1 - xi))^(b-1)`.
///
/// Near `q = 1/b` this exceeds one (it tends to `b`, while `q eta`, the slope of the
/// fixed-point map at `xi`, tends to one); such values are refused as a regime error.
pub fn eta(b: u32, q: f64) -> Result<f64> {
    let xi = fixed_point_xi(b, q)?;
    let eta = b as f64 * (1.0 - q * (1.0 - xi)).powi(b as i32 - 1);
    if eta >= 1.0 {
        return Err(Error::Regime(format!(
            "eta = {eta} is not below one at b = {b}, q = {q}"
        )));
    }
    Ok(eta)
}

/// Tail exponent `alpha = ln(1/eta) / ln(bq)`.
pub fn alpha_exponent(b: u32, q: f64) -> Result<f64> {
    let eta = eta(b, q)?;
    let alpha = (1.0 / eta).ln() / (b as f64 * q).ln();
    assert!(alpha > 0.0);
    Ok(alpha)
}

/// Extinction probabilities `p_0 .. p_r` of idle root-to-leaf paths in a depth-`r` `b`-ary
/// tree: `p_0 = 0`, `p_m = (1 - q(1 - p_{m-1}))^b`.
pub fn branching_extinction_seq(b: u32, q: f64, r: u32) -> Result<Vec<f64>> {
    check_base(b)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParams(format!("q = {q} not in [0, 1]")));
    }
    let mut seq = Vec::with_capacity(r as usize + 1);
    let mut p = 0.0;
    seq.push(p);
    for _ in 0..r {
        p = (1.0 - q * (1.0 - p)).powi(b as i32);
        seq.push(p);
    }
    Ok(seq)
}

fn check_lower_bound_regime(b: u32, q: f64, c: f64) -> Result<f64> {
    check_base(b)?;
    if !(c > 2.0) {
        return Err(Error::InvalidParams(format!(
            "reduced vacancy probability needs c > 2, got {c}"
        )));
    }
    let q_c = critical_vacancy(b, c)?;
    if !(q > q_c && q < 1.0) {
        return Err(Error::Regime(format!(
            "need q_c = {q_c} < q < 1, got q = {q}"
        )));
    }
    Ok(q_c)
}

/// `q_* = q_{c-1} q^(1/(c-1)^2)`, strictly below both `q` and `q_{c-1}`.
pub fn q_star(b: u32, q: f64, c: f64) -> Result<f64> {
    check_lower_bound_regime(b, q, c)?;
    let q_prev = critical_vacancy(b, c - 1.0)?;
    let qs = q_prev * q.powf(1.0 / ((c - 1.0) * (c - 1.0)));
    assert!(qs < q && qs < q_prev, "q_* = {qs} violates its ordering");
    Ok(qs)
}

/// `H = ceil((b q_*)^r)` with `r = floor(k/2)`.
pub fn h_threshold(b: u32, q: f64, c: f64, k: u32) -> Result<u64> {
    let qs = q_star(b, q, c)?;
    Ok((b as f64 * qs).powi((k / 2) as i32).ceil() as u64)
}

/// Outcome of checking `phi_h(q_*) <= k` for every `0 <= h <= l - k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiBoundCheck {
    pub holds: bool,
    pub l: u32,
    pub q_star: f64,
    pub max_phi: f64,
    pub argmax_h: u32,
}

/// Evaluates `phi_h(q_*)` for `0 <= h <= l - k` with `l = round(c k)`.
pub fn lemma36_check(b: u32, k: u32, c: f64, q: f64) -> Result<PhiBoundCheck> {
    let qs = q_star(b, q, c)?;
    let l = (c * k as f64).round() as u32;
    let series = genfun::psi_series(b, k, qs, l - k)?;
    let (argmax_h, max_phi) =
        series
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |best, (h, v)| if v > best.1 { (h, v) } else { best },
            );
    Ok(PhiBoundCheck {
        holds: series.iter().all(|&v| v <= k as f64),
        l,
        q_star: qs,
        max_phi,
        argmax_h: argmax_h as u32,
    })
}

pub fn threshold_report(b: u32, q: f64, c: f64) -> Result<ThresholdReport> {
    let q_c = critical_vacancy(b, c)?;
    let xi = fixed_point_xi(b, q).ok();
    let q_limit = match limiting_q(b, q, c) {
        Ok(v) => Some(v),
        Err(Error::Threshold { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ThresholdReport {
        b,
        q,
        c,
        q_c,
        xi,
        q_limit,
        eta: eta(b, q).ok(),
        alpha: alpha_exponent(b, q).ok(),
        q_star: if c > 2.0 { q_star(b, q, c).ok() } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_vacancy_examples() {
        assert!(
            (critical_vacancy(2, 2.0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15
        );
        assert!((critical_vacancy(2, 3.0).unwrap() - 0.629_960_524_947_436_6).abs() < 1e-15);
        assert!((critical_vacancy(2, 1.0 + 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!((critical_vacancy(3, 1e9).unwrap() - 1.0 / 3.0).abs() < 1e-8);
        assert!(critical_vacancy(2, 1.0).is_err());
        for b in 2..6 {
            for c in [1.1, 1.5, 2.0, 3.7, 10.0] {
                let qc = critical_vacancy(b, c).unwrap();
                assert!(1.0 / (b as f64) < qc && qc < 1.0);
            }
        }
    }

    #[test]
    fn xi_closed_form_for_binary() {
        assert!((fixed_point_xi(2, 0.8).unwrap() - 0.0625).abs() < 1e-12);
        let want = (0.15f64 / 0.85).powi(2);
        assert!((fixed_point_xi(2, 0.85).unwrap() - want).abs() < 1e-12);
        for i in 1..49 {
            let q = 0.5 + 0.01 * i as f64 + 0.001;
            let want = ((1.0 - q) / q).powi(2);
            assert!(
                (fixed_point_xi(2, q).unwrap() - want).abs() < 1e-12,
                "q={q}"
            );
        }
    }

    #[test]
    fn xi_residual_and_uniqueness() {
        for b in 2..=5u32 {
            for i in 1..20 {
                let q = 1.0 / b as f64 + (1.0 - 1.0 / b as f64) * i as f64 / 20.0;
                let xi = fixed_point_xi(b, q).unwrap();
                assert!(xi > 0.0 && xi < 1.0);
                let resid = (xi - (1.0 - q * (1.0 - xi)).powi(b as i32)).abs();
                assert!(resid <= 1e-14, "b={b} q={q} resid={resid}");
                // g changes sign only once on (0, 1): it is positive before xi and negative after.
                let g = |x: f64| (1.0 - q * (1.0 - x)).powi(b as i32) - x;
                assert!((1..100).map(|j| j as f64 / 100.0 * xi).all(|x| g(x) > 0.0));
                assert!((1..100)
                    .map(|j| xi + j as f64 / 100.0 * (1.0 - xi) * 0.999)
                    .all(|x| g(x) < 0.0));
            }
        }
    }

    #[test]
    fn xi_rejects_subcritical() {
        assert!(matches!(fixed_point_xi(2, 0.5), Err(Error::Regime(_))));
        assert!(matches!(fixed_point_xi(3, 0.2), Err(Error::Regime(_))));
        assert!(fixed_point_xi(2, 1.0).is_err());
    }

    #[test]
    fn xi_vanishes_near_full_vacancy() {
        let q: f64 = 0.999;
        let xi = fixed_point_xi(3, q).unwrap();
        assert!((xi / (1.0 - q).powi(3) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn limiting_q_examples() {
        assert!((limiting_q(2, 0.8, 2.0).unwrap() - 0.878_906_25).abs() < 1e-12);
        assert_eq!(limiting_q(2, 0.6, 2.0).unwrap(), 0.0);
        assert!((limiting_q(2, 0.85, 2.0).unwrap() - 0.938_686_078_950_204).abs() < 1e-12);
        let q_c = critical_vacancy(2, 2.0).unwrap();
        assert_eq!(limiting_q(2, q_c, 2.0), Err(Error::Threshold { q_c }));
    }

    #[test]
    fn limiting_q_monotone_above_threshold() {
        for (b, c) in [(2, 2.0), (3, 1.5), (2, 4.0)] {
            let q_c = critical_vacancy(b, c).unwrap();
            let vals: Vec<f64> = (1..100)
                .map(|i| q_c + (1.0 - q_c) * i as f64 / 100.0)
                .map(|q| limiting_q(b, q, c).unwrap())
                .collect();
            assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn eta_and_alpha() {
        assert!((eta(2, 0.8).unwrap() - 0.5).abs() < 1e-12);
        let want = 2f64.ln() / 1.6f64.ln();
        assert!((alpha_exponent(2, 0.8).unwrap() - want).abs() < 1e-12);
        // For b = 2, eta = 2(1-q)/q, below one only for q > 2/3.
        assert!(matches!(eta(2, 0.5001), Err(Error::Regime(_))));
        assert!(matches!(eta(2, 0.66), Err(Error::Regime(_))));
        assert!(eta(2, 0.67).unwrap() < 1.0);
        let xi = fixed_point_xi(2, 0.5001).unwrap();
        let slope = 2.0 * 0.5001 * (1.0 - 0.5001 * (1.0 - xi));
        assert!(slope < 1.0 && slope > 0.999);
    }

    #[test]
    fn branching_recursion() {
        let seq = branching_extinction_seq(2, 0.8, 40).unwrap();
        assert_eq!(seq[0], 0.0);
        assert!((seq[1] - 0.04).abs() < 1e-15);
        assert!((seq[2] - 0.053_824).abs() < 1e-15);
        let xi = 0.0625;
        assert!(seq.windows(2).all(|w| w[1] >= w[0] && w[1] <= xi));
        // Linearizing the map at xi gives the contraction factor f'(xi) = q * eta.
        let ratio = (seq[21] - xi).abs() / (seq[20] - xi).abs();
        assert!((ratio - 0.8 * 0.5).abs() / 0.4 < 0.01, "ratio {ratio}");
        let sub = branching_extinction_seq(2, 0.5, 4000).unwrap();
        assert!(*sub.last().unwrap() > 0.999);
        assert!(branching_extinction_seq(2, 0.3, 500).unwrap()[500] > 1.0 - 1e-12);
    }

    #[test]
    fn near_critical_scaling() {
        // Expanding the fixed-point equation about x = 1 gives
        // 1 - xi ~ (bq - 1) / (C(b,2) q^2).
        for b in 2..=4u32 {
            let q = 1.01 / b as f64;
            let xi = fixed_point_xi(b, q).unwrap();
            let choose = (b * (b - 1) / 2) as f64;
            let want = (0.01 / (choose * q * q)).powi(2);
            assert!(((1.0 - xi).powi(2) / want - 1.0).abs() < 0.05, "b={b}");
        }
    }

    #[test]
    fn q_star_and_h() {
        let qs = q_star(2, 0.9, 3.0).unwrap();
        assert!((qs - 0.688_724_653_998_429_8).abs() < 1e-12);
        assert_eq!(h_threshold(2, 0.9, 3.0, 10).unwrap(), 5);
        assert_eq!(h_threshold(2, 0.9, 3.0, 11).unwrap(), 5);
        assert!(q_star(2, 0.9, 2.0).is_err());
        assert!(matches!(q_star(2, 0.6, 3.0), Err(Error::Regime(_))));
        for b in 2..=4 {
            for c in [2.5, 3.0, 4.0] {
                let q_c = critical_vacancy(b, c).unwrap();
                let q_prev = critical_vacancy(b, c - 1.0).unwrap();
                for i in 1..10 {
                    let q = q_c + (1.0 - q_c) * i as f64 / 10.0;
                    let qs = q_star(b, q, c).unwrap();
                    assert!(qs < q && qs < q_prev);
                }
            }
        }
    }

    #[test]
    fn phi_bound_check() {
        let r = lemma36_check(2, 12, 3.0, 0.9).unwrap();
        assert!(r.holds);
        assert_eq!(r.l, 36);
        let maxes: Vec<f64> = [8, 12, 16]
            .iter()
            .map(|&k| lemma36_check(2, k, 3.0, 0.9).unwrap().max_phi)
            .collect();
        assert!(maxes.windows(2).all(|w| w[1] <= w[0]), "{maxes:?}");
        assert!(maxes.iter().all(|&m| m < 8.0));
    }

    #[test]
    fn report_fields() {
        let r = threshold_report(2, 0.8, 2.0).unwrap();
        assert!((r.xi.unwrap() - 0.0625).abs() < 1e-15);
        assert!(r.q_star.is_none());
        let q_c = critical_vacancy(2, 2.0).unwrap();
        let at = threshold_report(2, q_c, 2.0).unwrap();
        assert!(at.q_limit.is_none());
        let low = threshold_report(2, 0.4, 2.0).unwrap();
        assert_eq!(low.q_limit, Some(0.0));
        assert!(low.xi.is_none());
        assert!(threshold_report(2, 0.9, 3.0).unwrap().q_star.is_some());
    }
}
