//! Path-intersection polynomials `phi_l(y)`.
//!
//! `phi_l(y)` counts the paths `0^k -> 0^k` of depth `l` by the number of links whose label
//! differs from `0^k`. Their generating function `psi(y, z) = sum_l phi_l(y) z^l` is the ratio
//!
//! ```text
//!            1 - b y z + (b-1) (y z)^(k+1)
//! psi = -------------------------------------------
//!       (1 - z)(1 - b y z) - (b-1) z (1 - y) (y z)^k
//! ```
//!
//! and coefficients are extracted by series division, i.e. the linear recurrence
//! `phi_l = alpha_l - sum_{j>=1} beta_j phi_{l-j}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_probability, Error, Result};
use crate::netgraph::{self, NetworkParams, PathDigits, VertexId};

/// Dense polynomial in `y` with arbitrary-precision integer coefficients.
///
/// `coeffs[i]` is the coefficient of `y^i`; trailing zeros are trimmed, so the zero
/// polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `c * y^d`.
    pub fn monomial(c: impl Into<BigInt>, d: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); d + 1];
        coeffs[d] = c.into();
        Self::new(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval_f64(&self, y: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * y + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_big(&self, y: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * y + c)
    }

    pub fn eval_rational(&self, y: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| {
                acc * y + BigRational::from_integer(c.clone())
            })
    }

    pub fn coefficient_sum(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Coefficients as decimal strings, the JSON wire form.
    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;

    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;

    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;

    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;

    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, c) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * c;
            }
        }
        IntPoly::new(out)
    }
}

impl fmt::Display for IntPoly {
    /// Renders as `1 + 2y + y^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let show_mag = i == 0 || !mag.is_one();
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "y")?,
                _ => write!(f, "y^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&c.to_string())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(deserializer)?;
        raw.iter()
            .map(|s| s.parse::<BigInt>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(IntPoly::new)
    }
}

/// Numerator and denominator of `psi(y, z)` as polynomials in `z` with `IntPoly`
/// coefficients: `numer[j]` and `denom[j]` multiply `z^j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalGF {
    pub b: u32,
    pub k: u32,
    pub numer: Vec<IntPoly>,
    pub denom: Vec<IntPoly>,
}

impl RationalGF {
    /// The numerator and denominator specialized at a real `y`.
    pub fn eval_y(&self, y: f64) -> (Vec<f64>, Vec<f64>) {
        (
            self.numer.iter().map(|p| p.eval_f64(y)).collect(),
            self.denom.iter().map(|p| p.eval_f64(y)).collect(),
        )
    }
}

fn check_gf_params(b: u32, k: u32) -> Result<()> {
    if b < 2 {
        return Err(Error::InvalidParams(format!("base must be >= 2, got {b}")));
    }
    if k == 0 {
        return Err(Error::InvalidParams(
            "generating function requires scale k >= 1".into(),
        ));
    }
    Ok(())
}

/// Builds the numerator `1 - b y z + (b-1) (yz)^(k+1)` and the denominator
/// `1 - (1 + b y) z + b y z^2 - (b-1)(1-y) y^k z^(k+1)`.
pub fn build_gf(b: u32, k: u32) -> Result<RationalGF> {
    check_gf_params(b, k)?;
    let bb = BigInt::from(b);
    let k = k as usize;

    let mut numer = vec![IntPoly::zero(); k + 2];
    numer[0] = IntPoly::one();
    numer[1] = IntPoly::monomial(-bb.clone(), 1);
    numer[k + 1] = &numer[k + 1] + &IntPoly::monomial(bb.clone() - 1, k + 1);

    let mut denom = vec![IntPoly::zero(); (k + 2).max(3)];
    denom[0] = IntPoly::one();
    denom[1] = IntPoly::new(vec![BigInt::from(-1), -bb.clone()]);
    denom[2] = &denom[2] + &IntPoly::monomial(bb.clone(), 1);
    // -(b-1)(1-y) y^k = -(b-1) y^k + (b-1) y^(k+1)
    let perturb = &IntPoly::monomial(bb.clone() - 1, k + 1) - &IntPoly::monomial(bb - 1, k);
    denom[k + 1] = &denom[k + 1] + &perturb;

    Ok(RationalGF {
        b,
        k: k as u32,
        numer,
        denom,
    })
}

/// Exact `phi_0 .. phi_l` by series division of the numerator by the denominator.
pub fn phi_polys(b: u32, k: u32, l: u32) -> Result<Vec<IntPoly>> {
    let gf = build_gf(b, k)?;
    let mut out: Vec<IntPoly> = Vec::with_capacity(l as usize + 1);
    for n in 0..=l as usize {
        let mut acc = gf.numer.get(n).cloned().unwrap_or_default();
        for (j, beta) in gf.denom.iter().enumerate().skip(1).take(n) {
            if !beta.is_zero() {
                acc = &acc - &(beta * &out[n - j]);
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Exact `phi_l(y)`.
pub fn phi_poly(b: u32, k: u32, l: u32) -> Result<IntPoly> {
    Ok(phi_polys(b, k, l)?.pop().expect("at least phi_0"))
}

/// `phi_0(y) .. phi_n(y)` at a real `y`, by the same recurrence in floating point.
pub fn psi_series(b: u32, k: u32, y: f64, n: u32) -> Result<Vec<f64>> {
    let gf = build_gf(b, k)?;
    let (alpha, beta) = gf.eval_y(y);
    let mut out: Vec<f64> = Vec::with_capacity(n as usize + 1);
    for m in 0..=n as usize {
        let mut acc = alpha.get(m).copied().unwrap_or(0.0);
        for (j, bj) in beta.iter().enumerate().skip(1).take(m) {
            acc -= bj * out[m - j];
        }
        out.push(acc);
    }
    Ok(out)
}

/// `phi_l(q)` in floating point.
pub fn phi_eval(b: u32, k: u32, l: u32, q: f64) -> Result<f64> {
    check_probability(q)?;
    Ok(*psi_series(b, k, q, l)?.last().expect("nonempty series"))
}

/// Oracle: tallies the paths `0^k -> 0^k` in `G(b, k, l)` by their count of non-zero links.
pub fn brute_phi(b: u32, k: u32, l: u32) -> Result<IntPoly> {
    brute_phi_capped(b, k, l, netgraph::DEFAULT_PATH_CAP)
}

pub fn brute_phi_capped(b: u32, k: u32, l: u32, cap: u128) -> Result<IntPoly> {
    let params = NetworkParams::new(b, k, l)?;
    let paths = netgraph::enumerate_paths_capped(
        &params,
        &VertexId::zero(0, k),
        &VertexId::zero(l, k),
        cap,
    )?;
    let mut tally = vec![0u64; l.max(1) as usize];
    for p in &paths {
        let nonzero = netgraph::path_links(p, &params)
            .iter()
            .filter(|u| !u.label.is_zero())
            .count();
        tally[nonzero] += 1;
    }
    Ok(IntPoly::new(tally.into_iter().map(BigInt::from).collect()))
}

/// One letter of the marked path language: a digit and whether the vertex it leads to
/// differs from `0^k` (the overline).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symbol {
    pub digit: u8,
    pub marked: bool,
}

/// Marks stage digits of a path `0^k -> 0^k`, dropping the leading `0^k`.
///
/// Digit `t_{k+m}` is marked when the rank-`m` vertex is not `0^k`. Since both endpoints
/// are `0^k`, the number of marks equals the number of links off `0^k`.
pub fn path_symbols(p: &PathDigits, params: &NetworkParams) -> Vec<Symbol> {
    let k = params.k as usize;
    (1..=params.l)
        .map(|m| Symbol {
            digit: p.digits[k + m as usize - 1],
            marked: !p.vertex(params, m).label.is_zero(),
        })
        .collect()
}

/// An excursion: zero or more preliminary segments followed by a final segment.
/// Lengths are in symbols; every segment starts with a marked non-zero digit followed by
/// marked zeros, and the final segment has length exactly `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Excursion {
    pub preliminary: Vec<usize>,
    pub final_len: usize,
}

/// A stretch: an optional excursion closed by an unmarked `0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stretch {
    pub excursion: Option<Excursion>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOutcome {
    Unique(Vec<Stretch>),
    NoParse,
    Ambiguous(u64),
}

/// Parses a marked string into stretches, counting every parse to detect ambiguity.
pub fn parse_stretches(s: &[Symbol], k: u32) -> ParseOutcome {
    let n = s.len();
    let k = k as usize;
    let lead = |i: usize| s[i].marked && s[i].digit != 0;
    let zero_run = |from: usize, to: usize| s[from..to].iter().all(|c| c.marked && c.digit == 0);
    let segment = |i: usize, e: usize, exact: bool| {
        let len = e - i;
        let len_ok = if exact {
            len == k
        } else {
            (1..=k).contains(&len)
        };
        len_ok && lead(i) && zero_run(i + 1, e)
    };

    // exc[i][e]: number of excursion parses of s[i..e].
    let mut exc = vec![vec![0u64; n + 1]; n + 1];
    #[allow(clippy::needless_range_loop)]
    for e in 0..=n {
        for i in (0..e).rev() {
            let mut count = u64::from(segment(i, e, true));
            for m in i + 1..e {
                if segment(i, m, false) {
                    count += exc[m][e];
                }
            }
            exc[i][e] = count;
        }
    }
    let stretch = |i: usize, j: usize| -> u64 {
        if j == 0 || s[j - 1].marked || s[j - 1].digit != 0 {
            return 0;
        }
        u64::from(i + 1 == j) + if i + 1 < j { exc[i][j - 1] } else { 0 }
    };
    // tail[i]: parses of s[i..] as a sequence of stretches.
    let mut tail = vec![0u64; n + 1];
    tail[n] = 1;
    for i in (0..n).rev() {
        tail[i] = (i + 1..=n).map(|j| stretch(i, j) * tail[j]).sum();
    }
    match tail[0] {
        0 => ParseOutcome::NoParse,
        1 => {
            let mut out = Vec::new();
            let mut i = 0;
            while i < n {
                let j = (i + 1..=n)
                    .find(|&j| stretch(i, j) * tail[j] == 1)
                    .expect("unique parse continues");
                let excursion = (i + 1 < j).then(|| {
                    let end = j - 1;
                    let mut preliminary = Vec::new();
                    let mut a = i;
                    // exc[a][end] == 1 along a unique parse, so exactly one branch applies.
                    while !segment(a, end, true) {
                        let m = (a + 1..end)
                            .find(|&m| segment(a, m, false) && exc[m][end] == 1)
                            .expect("unique excursion continues");
                        preliminary.push(m - a);
                        a = m;
                    }
                    Excursion {
                        preliminary,
                        final_len: end - a,
                    }
                });
                out.push(Stretch { excursion });
                i = j;
            }
            ParseOutcome::Unique(out)
        }
        c => ParseOutcome::Ambiguous(c),
    }
}
