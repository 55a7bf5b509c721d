//! Symmetric r-colorings of pairs of vertices `0..n`.
//!
//! A [`Coloring`] is always finite (a universe of `n` vertices) but carries
//! one of three presentations:
//!
//! * dense: an explicit upper triangle,
//! * streamed: an upper triangle grown stage by stage, where stage `s`
//!   colors exactly the pairs `{t, s+1}` for `t <= s`,
//! * stable: a limit color and threshold per vertex plus a sparse table of
//!   exceptions below the threshold.
//!
//! Pairs are keyed by `(min, max)` and flattened in the order
//! `(0,1), (0,2), (1,2), (0,3), ...`, which is also the enumeration order
//! of [`enumerate_all`] and the order of the `triangle` array on disk.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(pub u8);

impl Color {
    pub const BLUE: Color = Color(0);
    pub const RED: Color = Color(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The other color of a 2-coloring.
    #[inline]
    pub fn opposite(self) -> Color {
        debug_assert!(self.0 < 2);
        Color(1 - self.0)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "BLUE"),
            1 => write!(f, "RED"),
            k => write!(f, "color{k}"),
        }
    }
}

/// Position of the pair `{x, y}` in the flattened upper triangle.
#[inline]
pub fn pair_index(x: Vertex, y: Vertex) -> usize {
    let (a, b) = if x < y { (x, y) } else { (y, x) };
    b * (b - 1) / 2 + a
}

#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColoringKind {
    DenseFinite,
    Streamed,
    StablePresented,
}

/// Per-vertex limit colors and thresholds. The pair `{x, y}` with `x < y`
/// gets `limits[x]` whenever `y >= thresholds[x]`; below the threshold an
/// entry of `exceptions` overrides the limit color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StablePresentation {
    pub limits: Vec<Color>,
    pub thresholds: Vec<usize>,
    pub exceptions: BTreeMap<(Vertex, Vertex), Color>,
}

impl StablePresentation {
    pub fn max_threshold(&self) -> usize {
        self.thresholds.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    Triangle(Vec<u8>),
    Stable(StablePresentation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    r: usize,
    n: usize,
    kind: ColoringKind,
    repr: Repr,
}

impl Coloring {
    /// A dense coloring from its flattened upper triangle.
    pub fn from_triangle(n: usize, r: usize, triangle: Vec<u8>) -> Result<Self> {
        if r == 0 {
            return Err(Error::domain("a coloring needs at least one color"));
        }
        if triangle.len() != pair_count(n) {
            return Err(Error::Malformed(format!(
                "triangle for n = {n} must have {} entries, found {}",
                pair_count(n),
                triangle.len()
            )));
        }
        if let Some(bad) = triangle.iter().find(|&&c| c as usize >= r) {
            return Err(Error::Malformed(format!("color {bad} not below r = {r}")));
        }
        Ok(Coloring {
            r,
            n,
            kind: ColoringKind::DenseFinite,
            repr: Repr::Triangle(triangle),
        })
    }

    /// Builds a dense coloring by evaluating `f(x, y)` for every `x < y < n`.
    pub fn from_fn(n: usize, r: usize, mut f: impl FnMut(Vertex, Vertex) -> Color) -> Result<Self> {
        let mut triangle = Vec::with_capacity(pair_count(n));
        for y in 1..n {
            for x in 0..y {
                triangle.push(f(x, y).0);
            }
        }
        Self::from_triangle(n, r, triangle)
    }

    pub fn constant(n: usize, r: usize, color: Color) -> Result<Self> {
        if color.index() >= r {
            return Err(Error::domain(format!("{color} is not a color below r = {r}")));
        }
        Self::from_triangle(n, r, vec![color.0; pair_count(n)])
    }

    pub fn stable(n: usize, r: usize, presentation: StablePresentation) -> Result<Self> {
        if r == 0 {
            return Err(Error::domain("a coloring needs at least one color"));
        }
        let p = &presentation;
        if p.limits.len() != n || p.thresholds.len() != n {
            return Err(Error::Malformed(format!(
                "stable presentation needs {n} limits and thresholds, found {} and {}",
                p.limits.len(),
                p.thresholds.len()
            )));
        }
        if let Some(c) = p.limits.iter().find(|c| c.index() >= r) {
            return Err(Error::Malformed(format!("limit color {} not below r = {r}", c.0)));
        }
        for (&(x, y), c) in &p.exceptions {
            if !(x < y && y < n) {
                return Err(Error::Malformed(format!("exception pair ({x}, {y}) is not x < y < {n}")));
            }
            if y >= p.thresholds[x] {
                return Err(Error::Malformed(format!(
                    "exception ({x}, {y}) lies at or above threshold {}",
                    p.thresholds[x]
                )));
            }
            if c.index() >= r {
                return Err(Error::Malformed(format!("exception color {} not below r = {r}", c.0)));
            }
        }
        Ok(Coloring {
            r,
            n,
            kind: ColoringKind::StablePresented,
            repr: Repr::Stable(presentation),
        })
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of vertices in the universe.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ColoringKind {
        self.kind
    }

    pub fn stable_presentation(&self) -> Option<&StablePresentation> {
        match &self.repr {
            Repr::Stable(p) => Some(p),
            Repr::Triangle(_) => None,
        }
    }

    /// Checked accessor.
    pub fn color_of(&self, x: Vertex, y: Vertex) -> Result<Color> {
        if x == y {
            return Err(Error::domain(format!("no self-pair {{{x}, {x}}}")));
        }
        for v in [x, y] {
            if v >= self.n {
                return Err(Error::Range { vertex: v, bound: self.n });
            }
        }
        Ok(self.color(x, y))
    }

    /// Unchecked accessor for hot loops; callers guarantee `x != y`, both `< n`.
    #[inline]
    pub fn color(&self, x: Vertex, y: Vertex) -> Color {
        debug_assert!(x != y && x < self.n && y < self.n, "bad pair ({x}, {y}) for n = {}", self.n);
        match &self.repr {
            Repr::Triangle(t) => Color(t[pair_index(x, y)]),
            Repr::Stable(p) => {
                let (a, b) = if x < y { (x, y) } else { (y, x) };
                if b >= p.thresholds[a] {
                    p.limits[a]
                } else {
                    p.exceptions.get(&(a, b)).copied().unwrap_or(p.limits[a])
                }
            }
        }
    }

    /// The flattened upper triangle, materialized if necessary.
    pub fn triangle(&self) -> Vec<u8> {
        match &self.repr {
            Repr::Triangle(t) => t.clone(),
            Repr::Stable(_) => {
                let mut t = Vec::with_capacity(pair_count(self.n));
                for y in 1..self.n {
                    for x in 0..y {
                        t.push(self.color(x, y).0);
                    }
                }
                t
            }
        }
    }

    /// The coloring restricted to the prefix `0..m`, as a dense coloring.
    pub fn restrict(&self, m: usize) -> Result<Coloring> {
        if m > self.n {
            return Err(Error::Range { vertex: m, bound: self.n });
        }
        Coloring::from_fn(m, self.r, |x, y| self.color(x, y))
    }

    /// Colors assigned at stage `s` of the streamed view: pairs `{t, s+1}`
    /// for `t = 0..=s`.
    pub fn stage_pairs(&self, s: usize) -> Result<Vec<Color>> {
        if s + 1 >= self.n {
            return Err(Error::Range { vertex: s + 1, bound: self.n });
        }
        Ok((0..=s).map(|t| self.color(t, s + 1)).collect())
    }

    /// Checks that every row is constant from its threshold on. Returns the
    /// first offending `(x, y, z)` with `c{x,y} != c{x,z}`.
    pub fn check_stability(&self) -> std::result::Result<(), (Vertex, Vertex, Vertex)> {
        let Some(p) = self.stable_presentation() else {
            return Ok(());
        };
        for x in 0..self.n {
            let from = p.thresholds[x].max(x + 1);
            if from >= self.n {
                continue;
            }
            let expected = self.color(x, from);
            if expected != p.limits[x] {
                return Err((x, from, from));
            }
            for y in from + 1..self.n {
                if self.color(x, y) != expected {
                    return Err((x, from, y));
                }
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> ColoringFile {
        let (limits, thresholds, exceptions) = match &self.repr {
            Repr::Stable(p) => (
                Some(p.limits.iter().map(|c| c.0).collect()),
                Some(p.thresholds.clone()),
                Some(p.exceptions.iter().map(|(&(x, y), c)| [x, y, c.index()]).collect()),
            ),
            Repr::Triangle(_) => (None, None, None),
        };
        ColoringFile {
            v: FORMAT_VERSION,
            n: self.n,
            r: self.r,
            triangle: self.triangle(),
            limits,
            thresholds,
            exceptions,
        }
    }

    pub fn from_file(file: &ColoringFile) -> Result<Coloring> {
        if file.v != FORMAT_VERSION {
            return Err(Error::Malformed(format!("unsupported coloring format version {}", file.v)));
        }
        let dense = Coloring::from_triangle(file.n, file.r, file.triangle.clone())?;
        match (&file.limits, &file.thresholds, &file.exceptions) {
            (None, None, None) => Ok(dense),
            (Some(limits), Some(thresholds), exceptions) => {
                let mut table = BTreeMap::new();
                for &[x, y, c] in exceptions.iter().flatten() {
                    let c = u8::try_from(c).map_err(|_| Error::Malformed(format!("color {c} too large")))?;
                    table.insert((x, y), Color(c));
                }
                let stable = Coloring::stable(
                    file.n,
                    file.r,
                    StablePresentation {
                        limits: limits.iter().map(|&c| Color(c)).collect(),
                        thresholds: thresholds.clone(),
                        exceptions: table,
                    },
                )?;
                if stable.triangle() != file.triangle {
                    return Err(Error::Malformed(
                        "triangle disagrees with the stable presentation".into(),
                    ));
                }
                Ok(stable)
            }
            _ => Err(Error::Malformed(
                "stable presentation needs both \"limits\" and \"thresholds\"".into(),
            )),
        }
    }
}

pub const FORMAT_VERSION: u32 = 1;

fn format_version() -> u32 {
    FORMAT_VERSION
}

/// On-disk JSON form of a coloring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringFile {
    #[serde(default = "format_version")]
    pub v: u32,
    pub n: usize,
    pub r: usize,
    pub triangle: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceptions: Option<Vec<[usize; 3]>>,
}

/// Grows a streamed coloring one stage at a time. Colors already assigned
/// are never revisited.
#[derive(Clone, Debug)]
pub struct StreamBuilder {
    coloring: Coloring,
}

impl StreamBuilder {
    /// A stream over the single vertex `0`; no stage has run yet.
    pub fn new(r: usize) -> Result<Self> {
        let mut coloring = Coloring::from_triangle(1, r, Vec::new())?;
        coloring.kind = ColoringKind::Streamed;
        Ok(StreamBuilder { coloring })
    }

    /// Number of completed stages.
    pub fn stages(&self) -> usize {
        self.coloring.n - 1
    }

    /// Runs the next stage `s`, assigning `colors[t]` to `{t, s+1}`.
    pub fn push_stage(&mut self, colors: &[Color]) -> Result<()> {
        let s = self.stages();
        if colors.len() != s + 1 {
            return Err(Error::precondition(format!(
                "stage {s} colors {} pairs, got {}",
                s + 1,
                colors.len()
            )));
        }
        let r = self.coloring.r;
        if let Some(c) = colors.iter().find(|c| c.index() >= r) {
            return Err(Error::domain(format!("color {} not below r = {r}", c.0)));
        }
        let Repr::Triangle(t) = &mut self.coloring.repr else {
            unreachable!("streams are stored as triangles")
        };
        t.extend(colors.iter().map(|c| c.0));
        self.coloring.n += 1;
        Ok(())
    }

    /// The coloring of everything assigned so far.
    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn finish(self) -> Coloring {
        self.coloring
    }
}

/// The vertices `x != m` of `universe` with `c{m, x} = color`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSet {
    pub vertex: Vertex,
    pub color: Color,
    pub members: BTreeSet<Vertex>,
}

pub fn neighbors_of_color(
    c: &Coloring,
    m: Vertex,
    color: Color,
    universe: impl IntoIterator<Item = Vertex>,
) -> Result<NeighborSet> {
    let universe: BTreeSet<Vertex> = universe.into_iter().collect();
    if !universe.contains(&m) {
        return Err(Error::precondition(format!("vertex {m} is not in the universe")));
    }
    let mut members = BTreeSet::new();
    for &x in &universe {
        if x != m && c.color_of(m, x)? == color {
            members.insert(x);
        }
    }
    Ok(NeighborSet { vertex: m, color, members })
}

/// Uniformly random dense coloring, deterministic in `seed`.
pub fn gen_random(n: usize, r: usize, seed: u64) -> Result<Coloring> {
    if n < 2 {
        return Err(Error::domain(format!("need at least two vertices, got {n}")));
    }
    if r == 0 || r > u8::MAX as usize {
        return Err(Error::domain(format!("color count {r} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triangle = (0..pair_count(n)).map(|_| rng.gen_range(0..r) as u8).collect();
    Coloring::from_triangle(n, r, triangle)
}

/// Random stable coloring: random limit colors, thresholds in
/// `0..=max_threshold`, and random colors on pairs below the thresholds.
pub fn gen_stable_random(n: usize, r: usize, seed: u64, max_threshold: usize) -> Result<Coloring> {
    if max_threshold > n {
        return Err(Error::domain(format!("threshold bound {max_threshold} exceeds n = {n}")));
    }
    if r == 0 || r > u8::MAX as usize {
        return Err(Error::domain(format!("color count {r} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limits: Vec<Color> = (0..n).map(|_| Color(rng.gen_range(0..r) as u8)).collect();
    let thresholds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=max_threshold)).collect();
    let mut exceptions = BTreeMap::new();
    for x in 0..n {
        for y in x + 1..thresholds[x].min(n) {
            let c = Color(rng.gen_range(0..r) as u8);
            if c != limits[x] {
                exceptions.insert((x, y), c);
            }
        }
    }
    Coloring::stable(n, r, StablePresentation { limits, thresholds, exceptions })
}

/// All colorings of `n` vertices with `r` colors, lexicographic in the
/// flattened triangle (first pair most significant).
#[derive(Clone, Debug)]
pub struct ColoringEnumerator {
    n: usize,
    r: usize,
    next: u128,
    end: u128,
}

impl ColoringEnumerator {
    pub fn total(&self) -> u128 {
        self.end
    }

    /// The colorings with indices in `range`, for splitting work.
    pub fn slice(&self, start: u128, end: u128) -> ColoringEnumerator {
        ColoringEnumerator { n: self.n, r: self.r, next: start.min(self.end), end: end.min(self.end) }
    }
}

pub fn coloring_count(n: usize, r: usize) -> Option<u128> {
    (r as u128).checked_pow(u32::try_from(pair_count(n)).ok()?)
}

pub fn enumerate_all(n: usize, r: usize, budget: u128) -> Result<ColoringEnumerator> {
    if r == 0 || r > u8::MAX as usize {
        return Err(Error::domain(format!("color count {r} out of range")));
    }
    let total = coloring_count(n, r).ok_or_else(|| Error::Budget {
        what: format!("enumerating colorings of n = {n} with r = {r}"),
        needed: u128::MAX,
        budget,
    })?;
    if total > budget {
        return Err(Error::Budget {
            what: format!("enumerating colorings of n = {n} with r = {r}"),
            needed: total,
            budget,
        });
    }
    Ok(ColoringEnumerator { n, r, next: 0, end: total })
}

/// The coloring at position `index` of the lexicographic enumeration.
pub fn nth_coloring(n: usize, r: usize, mut index: u128) -> Coloring {
    let len = pair_count(n);
    let mut triangle = vec![0u8; len];
    for slot in triangle.iter_mut().rev() {
        *slot = (index % r as u128) as u8;
        index /= r as u128;
    }
    Coloring::from_triangle(n, r, triangle).expect("digits are below r")
}

impl Iterator for ColoringEnumerator {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        if self.next >= self.end {
            return None;
        }
        let c = nth_coloring(self.n, self.r, self.next);
        self.next += 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.end - self.next).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}
