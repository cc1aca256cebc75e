//! Spider-web crossbar graphs `G(b, k, l)`.
//!
//! Vertices live in ranks `0..=l`, each rank holding the `b^k` strings of length `k` over
//! `{0, .., b-1}`. Stage `m` (between ranks `m-1` and `m`) may change only label position
//! `j = ((m - 1) mod k) + 1`, so every stage is a union of `b^(k-1)` complete `b x b`
//! crossbars. Positions are 1-based in documentation and 0-based in code.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of paths [`enumerate_paths`] will materialize.
pub const DEFAULT_PATH_CAP: u128 = 1 << 20;

/// Base, scale and depth of a spider-web graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkParams {
    pub b: u32,
    pub k: u32,
    pub l: u32,
}

impl NetworkParams {
    pub fn new(b: u32, k: u32, l: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidParams(format!("base must be >= 2, got {b}")));
        }
        if b > u8::MAX as u32 + 1 {
            return Err(Error::InvalidParams(format!(
                "base {b} exceeds digit width"
            )));
        }
        Ok(Self { b, k, l })
    }

    /// Number of vertices in every rank, `b^k`.
    pub fn rank_size(&self) -> usize {
        (self.b as usize).pow(self.k)
    }

    /// 0-based label position changed by `stage` (1-based), or `None` when `k = 0`.
    pub fn stage_position(&self, stage: u32) -> Option<usize> {
        if self.k == 0 {
            None
        } else {
            Some(((stage - 1) % self.k) as usize)
        }
    }

    /// Number of paths joining any input to any output when `l >= k`, `b^(l-k)`.
    pub fn paths_per_pair(&self) -> Option<u128> {
        if self.l < self.k {
            return None;
        }
        (self.b as u128).checked_pow(self.l - self.k)
    }

    pub(crate) fn check_rank(&self, rank: u32) -> Result<()> {
        if rank > self.l {
            Err(Error::RankOutOfRange {
                rank,
                depth: self.l,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_vertex(&self, v: &VertexId) -> Result<()> {
        self.check_rank(v.rank)?;
        v.label.check(self.b, self.k)
    }
}

/// A vertex label `a_1 .. a_k`, stored with position 1 at index 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub Vec<u8>);

impl Label {
    pub fn zeros(k: u32) -> Self {
        Label(vec![0; k as usize])
    }

    /// Decodes an integer index; position 1 is the most significant digit.
    pub fn from_index(mut index: usize, b: u32, k: u32) -> Self {
        let mut digits = vec![0u8; k as usize];
        for d in digits.iter_mut().rev() {
            *d = (index % b as usize) as u8;
            index /= b as usize;
        }
        Label(digits)
    }

    pub fn to_index(&self, b: u32) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &d| acc * b as usize + d as usize)
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    /// Parses a plain digit string such as `"0110"` (bases up to 10).
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidLabel(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Label)
    }

    fn check(&self, b: u32, k: u32) -> Result<()> {
        if self.0.len() != k as usize {
            return Err(Error::InvalidLabel(format!(
                "label {self} has length {} but k = {k}",
                self.0.len()
            )));
        }
        if let Some(&d) = self.0.iter().find(|&&d| d as u32 >= b) {
            return Err(Error::InvalidLabel(format!("digit {d} not below base {b}")));
        }
        Ok(())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&d| d < 10) {
            for d in &self.0 {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub rank: u32,
    pub label: Label,
}

impl VertexId {
    pub fn new(rank: u32, label: Label) -> Self {
        Self { rank, label }
    }

    pub fn zero(rank: u32, k: u32) -> Self {
        Self::new(rank, Label::zeros(k))
    }

    /// Convenience constructor from a digit string, e.g. `VertexId::parse(1, "01")`.
    pub fn parse(rank: u32, label: &str) -> Result<Self> {
        Ok(Self::new(rank, Label::parse(label)?))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, \"{}\")", self.rank, self.label)
    }
}

/// A path encoded as its digit string `t_1 .. t_{k+l}`.
///
/// The first `k` digits are the input label; `t_{k+m}` is the digit written by stage `m`.
/// The rank-`m` vertex consists of the window `t_{m+1} .. t_{m+k}`, where position `j` of the
/// label holds the window digit whose index is congruent to `j` modulo `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathDigits {
    pub digits: Vec<u8>,
}

impl PathDigits {
    pub fn new(digits: Vec<u8>) -> Self {
        Self { digits }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(Self::new(Label::parse(s)?.0))
    }

    /// Depth of the path given its scale.
    pub fn depth(&self, k: u32) -> u32 {
        self.digits.len() as u32 - k
    }

    /// The vertex the path visits in `rank`.
    pub fn vertex(&self, params: &NetworkParams, rank: u32) -> VertexId {
        let k = params.k as usize;
        let m = rank as usize;
        let label = (0..k)
            .map(|j| self.digits[m + (j + k - m % k) % k])
            .collect();
        VertexId::new(rank, Label(label))
    }

    /// The vertex sequence `(u_0, .., u_l)`.
    pub fn vertices(&self, params: &NetworkParams) -> Vec<VertexId> {
        (0..=params.l).map(|m| self.vertex(params, m)).collect()
    }

    fn check(&self, params: &NetworkParams) -> Result<()> {
        if self.digits.len() != (params.k + params.l) as usize {
            return Err(Error::InvalidParams(format!(
                "path has {} digits, expected k + l = {}",
                self.digits.len(),
                params.k + params.l
            )));
        }
        if self.digits.iter().any(|&d| d as u32 >= params.b) {
            return Err(Error::InvalidLabel("path digit not below base".into()));
        }
        Ok(())
    }
}

impl fmt::Display for PathDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Label(self.digits.clone()).fmt(f)
    }
}

/// True when `(x, y)` is an edge of `G(b, k, l)` directed from `x` to `y`.
pub fn is_edge(params: &NetworkParams, x: &VertexId, y: &VertexId) -> bool {
    if y.rank != x.rank + 1 || y.rank > params.l {
        return false;
    }
    match params.stage_position(y.rank) {
        None => true,
        Some(j) => x
            .label
            .0
            .iter()
            .zip(&y.label.0)
            .enumerate()
            .all(|(i, (a, c))| i == j || a == c),
    }
}

/// The `b` crossbar neighbours of `v` in the next (`forward`) or previous rank.
///
/// For `k = 0` every rank holds a single vertex joined by `b` parallel edges, so the
/// same vertex is returned `b` times.
pub fn neighbors(params: &NetworkParams, v: &VertexId, forward: bool) -> Result<Vec<VertexId>> {
    params.check_vertex(v)?;
    let (rank, stage) = if forward {
        if v.rank >= params.l {
            return Err(Error::RankOutOfRange {
                rank: v.rank + 1,
                depth: params.l,
            });
        }
        (v.rank + 1, v.rank + 1)
    } else {
        if v.rank == 0 {
            return Err(Error::RankOutOfRange {
                rank: 0,
                depth: params.l,
            });
        }
        (v.rank - 1, v.rank)
    };
    Ok((0..params.b as u8)
        .map(|d| {
            let mut label = v.label.clone();
            if let Some(j) = params.stage_position(stage) {
                label.0[j] = d;
            }
            VertexId::new(rank, label)
        })
        .collect())
}

/// All paths from input `v` to output `w`, refusing when more than `cap` would be produced.
pub fn enumerate_paths_capped(
    params: &NetworkParams,
    v: &VertexId,
    w: &VertexId,
    cap: u128,
) -> Result<Vec<PathDigits>> {
    params.check_vertex(v)?;
    params.check_vertex(w)?;
    if v.rank != 0 || w.rank != params.l {
        return Err(Error::RankMismatch(format!(
            "paths run from rank 0 to rank {}, got {} -> {}",
            params.l, v.rank, w.rank
        )));
    }
    if params.l >= params.k {
        let size = params.paths_per_pair().unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
    }
    let mut out = Vec::new();
    let mut digits = v.label.0.clone();
    walk(params, &v.label, w, 0, &mut digits, &mut out);
    Ok(out)
}

/// [`enumerate_paths_capped`] with [`DEFAULT_PATH_CAP`].
pub fn enumerate_paths(
    params: &NetworkParams,
    v: &VertexId,
    w: &VertexId,
) -> Result<Vec<PathDigits>> {
    enumerate_paths_capped(params, v, w, DEFAULT_PATH_CAP)
}

// Depth-first walk along stages, pruning branches that can no longer reach `w`.
fn walk(
    params: &NetworkParams,
    label: &Label,
    w: &VertexId,
    rank: u32,
    digits: &mut Vec<u8>,
    out: &mut Vec<PathDigits>,
) {
    if rank == params.l {
        if *label == w.label {
            out.push(PathDigits::new(digits.clone()));
        }
        return;
    }
    let remaining = params.l - rank;
    if remaining < params.k {
        let k = params.k;
        let changeable = |j: usize| (rank + 1..=params.l).any(|s| ((s - 1) % k) as usize == j);
        let blocked = (0..k as usize).any(|j| !changeable(j) && label.0[j] != w.label.0[j]);
        if blocked {
            return;
        }
    }
    let stage = rank + 1;
    for d in 0..params.b as u8 {
        let mut next = label.clone();
        if let Some(j) = params.stage_position(stage) {
            next.0[j] = d;
        }
        digits.push(d);
        walk(params, &next, w, stage, digits, out);
        digits.pop();
    }
}

/// The links (ranks `1..l-1`) visited by a path.
pub fn path_links(p: &PathDigits, params: &NetworkParams) -> Vec<VertexId> {
    (1..params.l).map(|m| p.vertex(params, m)).collect()
}

/// A rank-wise digit shift `(theta_0, .., theta_l)` acting by addition modulo `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorphism {
    shifts: Vec<Label>,
}

impl Automorphism {
    /// Validates that consecutive shifts differ only in the position their stage may change.
    pub fn new(params: &NetworkParams, shifts: Vec<Label>) -> Result<Self> {
        if shifts.len() != params.l as usize + 1 {
            return Err(Error::InvalidParams(format!(
                "automorphism needs {} shifts, got {}",
                params.l + 1,
                shifts.len()
            )));
        }
        for s in &shifts {
            s.check(params.b, params.k)?;
        }
        for m in 1..=params.l {
            let prev = VertexId::new(m - 1, shifts[m as usize - 1].clone());
            let cur = VertexId::new(m, shifts[m as usize].clone());
            if !is_edge(params, &prev, &cur) {
                return Err(Error::InvalidParams(format!(
                    "shifts {} and {} differ outside stage {m}'s position",
                    prev.label, cur.label
                )));
            }
        }
        Ok(Self { shifts })
    }

    pub fn identity(params: &NetworkParams) -> Self {
        Self {
            shifts: vec![Label::zeros(params.k); params.l as usize + 1],
        }
    }

    pub fn shifts(&self) -> &[Label] {
        &self.shifts
    }

    pub fn is_identity(&self) -> bool {
        self.shifts.iter().all(Label::is_zero)
    }

    pub fn apply(&self, v: &VertexId, b: u32) -> VertexId {
        let shift = &self.shifts[v.rank as usize];
        let label = v
            .label
            .0
            .iter()
            .zip(&shift.0)
            .map(|(&a, &t)| ((a as u32 + t as u32) % b) as u8)
            .collect();
        VertexId::new(v.rank, Label(label))
    }
}

/// The automorphism carrying path `p` onto the all-zeros path `u* = (0^k, .., 0^k)`.
pub fn canonical_automorphism(p: &PathDigits, params: &NetworkParams) -> Result<Automorphism> {
    p.check(params)?;
    let b = params.b;
    let shifts = p
        .vertices(params)
        .into_iter()
        .map(|u| {
            Label(
                u.label
                    .0
                    .iter()
                    .map(|&a| ((b - a as u32) % b) as u8)
                    .collect(),
            )
        })
        .collect();
    Ok(Automorphism { shifts })
}

pub fn apply_automorphism(
    a: &Automorphism,
    v: &VertexId,
    params: &NetworkParams,
) -> Result<VertexId> {
    params.check_vertex(v)?;
    Ok(a.apply(v, params.b))
}

/// Isomorphism onto the reversed graph: rank `m` goes to rank `l - m` and
/// `a*_i = a_j` with `j = l + 1 - i (mod k)`. It is an involution.
pub fn dual_map(params: &NetworkParams, v: &VertexId) -> Result<VertexId> {
    params.check_vertex(v)?;
    let k = params.k as usize;
    let l = params.l as usize;
    let label = (0..k)
        .map(|i| v.label.0[(l % k + 2 * k - 1 - i) % k])
        .collect();
    Ok(VertexId::new(params.l - v.rank, Label(label)))
}

/// Embeds a vertex of `G(b, k, n - m)` into ranks `m..=n` of `G(b, k, l)`.
///
/// Rank `h` goes to rank `m + h` and `a'_i = a_j` with `j = i - m (mod k)`, which lines up
/// stage `h` of the small graph with stage `m + h` of the large one.
pub fn window_iso(params: &NetworkParams, m: u32, n: u32, v: &VertexId) -> Result<VertexId> {
    if m > n || n > params.l {
        return Err(Error::InvalidParams(format!(
            "window [{m}, {n}] not inside 0..={}",
            params.l
        )));
    }
    let small = NetworkParams {
        l: n - m,
        ..*params
    };
    small.check_vertex(v)?;
    let k = params.k as usize;
    let shift = m as usize % k.max(1);
    let label = (0..k).map(|i| v.label.0[(i + k - shift) % k]).collect();
    Ok(VertexId::new(m + v.rank, Label(label)))
}

/// Every vertex of `rank`, in label-index order.
pub fn rank_vertices(params: &NetworkParams, rank: u32) -> impl Iterator<Item = VertexId> + '_ {
    (0..params.rank_size())
        .map(move |i| VertexId::new(rank, Label::from_index(i, params.b, params.k)))
}
