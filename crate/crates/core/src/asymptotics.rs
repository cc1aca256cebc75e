//! Two-pole residue evaluation of `phi_l(q)`.
//!
//! At `y = q` the generating function is `A(z) / B(z)` with
//! `A(z) = 1 - bqz + (b-1)(qz)^(k+1)` and `B(z) = (1-z)(1-bqz) - (b-1) z (1-q) (qz)^k`.
//! Inside `|z| = (1/q)(1 - 1/l)` the denominator has exactly two zeros, perturbations of
//! `1` and `1/(bq)`; their residues give `phi_l(q)` up to an `O(l q^l)` contour term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-14;
const MAX_ITERS: u32 = 100;
/// `bq - 1` below this marks parameters where the expansion constants blow up.
pub const REGIME_WARNING_MARGIN: f64 = 0.05;

/// The two real zeros of `B` inside the contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootPair {
    /// Perturbation of `z = 1`.
    pub zeta2: f64,
    /// Perturbation of `z = 1/(bq)`.
    pub zeta3: f64,
    pub newton_iters: (u32, u32),
    /// `|B(zeta)|` relative to the sum of the magnitudes of its monomials.
    pub residual: (f64, f64),
    pub regime_warning: bool,
}

/// `A`, `B` and their reductions by the common factor `1 - qz` at real `q`.
///
/// Dividing out `1 - qz` gives
/// `B~(z) = 1 - (1 + (b-1)q) z + (b-1)(1-q) sum_{i=2..k} q^(i-1) z^i` and
/// `A~(z) = 1 - (b-1) sum_{i=1..k} (qz)^i`. `B~` is convex on `z > 0` with `B~(0) = 1` and
/// `B~(1) < 0`, so for `k >= 2` it has exactly two positive zeros, one on each side of `1`.
#[derive(Debug, Clone, Copy)]
pub struct Denominator {
    b: f64,
    k: i32,
    q: f64,
}

impl Denominator {
    pub fn new(b: u32, k: u32, q: f64) -> Self {
        Self {
            b: b as f64,
            k: k as i32,
            q,
        }
    }

    pub fn numer(&self, z: f64) -> f64 {
        let Self { b, k, q } = *self;
        1.0 - b * q * z + (b - 1.0) * (q * z).powi(k + 1)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let Self { b, k, q } = *self;
        (1.0 - z) * (1.0 - b * q * z) - (b - 1.0) * z * (1.0 - q) * (q * z).powi(k)
    }

    pub fn derivative(&self, z: f64) -> f64 {
        let Self { b, k, q } = *self;
        -(1.0 - b * q * z)
            - b * q * (1.0 - z)
            - (b - 1.0) * (1.0 - q) * (k + 1) as f64 * q.powi(k) * z.powi(k)
    }

    /// `A(z) / (1 - qz)`.
    pub fn reduced_numer(&self, z: f64) -> f64 {
        let Self { b, k, q } = *self;
        let w = q * z;
        let sum = (0..k).fold(0.0, |acc, _| (acc + 1.0) * w);
        1.0 - (b - 1.0) * sum
    }

    /// `B(z) / (1 - qz)` and its derivative, by Horner's rule.
    pub fn reduced(&self, z: f64) -> (f64, f64) {
        let Self { b, k, q } = *self;
        let coeff = |i: i32| match i {
            0 => 1.0,
            1 => -(1.0 + (b - 1.0) * q),
            _ => (b - 1.0) * (1.0 - q) * q.powi(i - 1),
        };
        let (mut p, mut dp) = (0.0, 0.0);
        for i in (0..=k.max(1)).rev() {
            dp = dp * z + p;
            p = p * z + coeff(i);
        }
        (p, dp)
    }
    /// Relative residual: `|B(z)|` over the summed magnitudes of the expanded terms.
    pub fn relative_residual(&self, z: f64) -> f64 {
        let Self { b, k, q } = *self;
        let scale = 1.0
            + z.abs()
            + (b * q * z).abs()
            + (b * q * z * z).abs()
            + ((b - 1.0) * z * (1.0 - q) * (q * z).powi(k)).abs();
        self.eval(z).abs() / scale
    }
}

fn check_regime(b: u32, k: u32, q: f64) -> Result<()> {
    if b < 2 || k == 0 {
        return Err(Error::InvalidParams(format!(
            "need b >= 2 and k >= 1, got b = {b}, k = {k}"
        )));
    }
    if !(q * b as f64 > 1.0 && q < 1.0) {
        return Err(Error::Regime(format!(
            "residue analysis needs 1/b < q < 1, got q = {q}"
        )));
    }
    Ok(())
}

// Newton from `start`, falling back to bisection on `bracket` when Newton stalls or leaves it.
fn solve(den: &Denominator, start: f64, bracket: (f64, f64)) -> Result<(f64, u32)> {
    let mut z = start;
    for iter in 1..=MAX_ITERS {
        let (f, d) = den.reduced(z);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = f / d;
        z -= step;
        if !z.is_finite() {
            break;
        }
        if (step / z).abs() <= NEWTON_TOL {
            if z >= bracket.0 && z <= bracket.1 {
                return Ok((z, iter));
            }
            break;
        }
    }
    bisect(den, bracket)
}

fn bisect(den: &Denominator, (mut lo, mut hi): (f64, f64)) -> Result<(f64, u32)> {
    let mut f_lo = den.reduced(lo).0;
    let f_hi = den.reduced(hi).0;
    if f_lo == 0.0 {
        return Ok((lo, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change of B on [{lo}, {hi}]"
        )));
    }
    let mut iters = 0;
    while iters < 200 && (hi - lo) > NEWTON_TOL * hi.abs() {
        let mid = 0.5 * (lo + hi);
        let f_mid = den.reduced(mid).0;
        if f_mid == 0.0 {
            return Ok((mid, iters));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    Ok((0.5 * (lo + hi), iters))
}

// Smallest `1 + step * 2^j` at which `B~` is positive.
fn upper_bracket(den: &Denominator, step: f64) -> Option<f64> {
    let mut step = step;
    for _ in 0..1100 {
        let z = 1.0 + step;
        if den.reduced(z).0 > 0.0 {
            return Some(z);
        }
        step *= 2.0;
    }
    None
}

/// Locates the two denominator zeros by Newton iteration from `1` and `1/(bq)`.
///
/// Iterates on `B~`, so the zero `1/q` that cancels against the numerator is never
/// returned unless it is a double zero of `B`. `zeta3` is bracketed by `[0, 1/(bq)]` and
/// `zeta2` by `[1, z]` for the first `z` found with `B~(z) > 0`.
pub fn denominator_roots(b: u32, k: u32, q: f64) -> Result<RootPair> {
    check_regime(b, k, q)?;
    let den = Denominator::new(b, k, q);
    let bq = b as f64 * q;
    let inv = 1.0 / bq;

    let hi2 = upper_bracket(&den, q.powi(k as i32)).ok_or_else(|| {
        Error::RootOrdering(format!("no zero of B above 1 at b = {b}, k = {k}, q = {q}"))
    })?;
    let (zeta2, it2) = solve(&den, 1.0, (1.0, hi2))?;
    let (zeta3, it3) = solve(&den, inv, (0.0, inv))?;
    if !(0.0 < zeta3 && zeta3 < zeta2) {
        return Err(Error::RootOrdering(format!(
            "expected 0 < zeta3 < zeta2, got zeta3 = {zeta3}, zeta2 = {zeta2}"
        )));
    }
    Ok(RootPair {
        zeta2,
        zeta3,
        newton_iters: (it2, it3),
        residual: (den.relative_residual(zeta2), den.relative_residual(zeta3)),
        regime_warning: bq - 1.0 < REGIME_WARNING_MARGIN,
    })
}

/// The two residue contributions to `phi_l(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueTerms {
    /// From the pole near `1`; tends to one.
    pub pole2: f64,
    /// From the pole near `1/(bq)`; carries the exponential growth.
    pub pole3: f64,
    pub roots: RootPair,
}

impl ResidueTerms {
    pub fn total(&self) -> f64 {
        self.pole2 + self.pole3
    }
}

pub fn residue_terms(b: u32, k: u32, l: u32, q: f64) -> Result<ResidueTerms> {
    if l < k {
        return Err(Error::InvalidParams(format!(
            "need l >= k, got k = {k}, l = {l}"
        )));
    }
    let roots = denominator_roots(b, k, q)?;
    let outer = (1.0 / q) * (1.0 - 1.0 / l.max(1) as f64);
    if roots.zeta2 >= outer {
        return Err(Error::RootOrdering(format!(
            "zeta2 = {} not inside the contour radius {outer}",
            roots.zeta2
        )));
    }
    let den = Denominator::new(b, k, q);
    // Equal to -A / (B' z^(l+1)) at simple zeros of B, and finite where 1 - qz vanishes.
    let residue = |z: f64| -den.reduced_numer(z) / (den.reduced(z).1 * z.powi(l as i32 + 1));
    Ok(ResidueTerms {
        pole2: residue(roots.zeta2),
        pole3: residue(roots.zeta3),
        roots,
    })
}

/// Two-pole approximation of `phi_l(q)`.
pub fn residue_phi(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    Ok(residue_terms(b, k, l, q)?.total())
}

/// Closed-form leading terms `((b-1)/(bq-1))^2 b^(l-k) q^(l+1) + 1`.
pub fn phi_asymptotic(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    if b < 2 || l < k {
        return Err(Error::InvalidParams(format!(
            "need b >= 2 and l >= k, got b = {b}, k = {k}, l = {l}"
        )));
    }
    let bf = b as f64;
    if bf * q <= 1.0 || q >= 1.0 {
        return Err(Error::Regime(format!("need 1/b < q < 1, got q = {q}")));
    }
    let ratio = (bf - 1.0) / (bf * q - 1.0);
    Ok(ratio * ratio * bf.powi((l - k) as i32) * q.powi(l as i32 + 1) + 1.0)
}
