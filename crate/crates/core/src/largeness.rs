//! Largeness notions standing in for a non-principal ultrafilter, and the
//! constructions that use them: the neighbor-color construction, stable
//! decompositions, homogeneous sets, and the condition-sequence construction.
//!
//! On a finite universe no notion of largeness satisfies all the ultrafilter
//! facts for every vertex. Each oracle therefore carries a *domain*: the
//! vertices `m` for which its neighbor partition `{N(m, i)}` is known to
//! have exactly one large part. Constructions stop with a truncation marker
//! when they need the oracle outside its domain.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, ColoringKind, Vertex};
use crate::error::{Error, Result};
use crate::paths::{DecompState, ExtensionStep, Trace, TraceEnd};

pub type VertexSet = BTreeSet<Vertex>;

/// `N(m, i)` inside `[n]`.
pub fn neighbors(c: &Coloring, m: Vertex, i: Color) -> VertexSet {
    (0..c.n()).filter(|&x| x != m && c.color(m, x) == i).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleKind {
    /// Large iff the set contains every vertex from `tail_start` on.
    Cofinite { tail_start: usize },
    /// Large iff at most `slack` elements of `set` fall outside.
    Cohesive { set: Vec<Vertex>, slack: usize },
    /// Large iff the set holds a strict majority of `reference`.
    ExactFinite { reference: VertexSet },
    /// An arbitrary predicate, for experiments and negative tests.
    Predicate { name: String },
}

type Pred = Arc<dyn Fn(&VertexSet) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct LargenessOracle {
    n: usize,
    kind: OracleKind,
    domain: VertexSet,
    pred: Option<Pred>,
}

impl fmt::Debug for LargenessOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LargenessOracle")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .finish()
    }
}

impl LargenessOracle {
    /// A custom oracle. `domain` lists the vertices whose neighbor partitions
    /// the caller vouches for.
    pub fn predicate(
        n: usize,
        name: impl Into<String>,
        domain: VertexSet,
        f: impl Fn(&VertexSet) -> bool + Send + Sync + 'static,
    ) -> Self {
        LargenessOracle { n, kind: OracleKind::Predicate { name: name.into() }, domain, pred: Some(Arc::new(f)) }
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &VertexSet {
        &self.domain
    }

    pub fn is_large(&self, x: &VertexSet) -> bool {
        match &self.kind {
            OracleKind::Cofinite { tail_start } => (*tail_start..self.n).all(|v| x.contains(&v)),
            OracleKind::Cohesive { set, slack } => set.iter().filter(|v| !x.contains(v)).count() <= *slack,
            OracleKind::ExactFinite { reference } => 2 * reference.intersection(x).count() > reference.len(),
            OracleKind::Predicate { .. } => (self.pred.as_ref().expect("predicate oracles carry a closure"))(x),
        }
    }

    /// No set with fewer elements is large (0 when unknown).
    pub fn scale(&self) -> usize {
        match &self.kind {
            OracleKind::Cofinite { tail_start } => self.n.saturating_sub(*tail_start),
            OracleKind::Cohesive { set, slack } => set.len().saturating_sub(*slack),
            OracleKind::ExactFinite { reference } => reference.len() / 2 + 1,
            OracleKind::Predicate { .. } => 0,
        }
    }

    /// The unique color `i` with `N(m, i)` large.
    pub fn large_color(&self, c: &Coloring, m: Vertex) -> Result<Color> {
        let large: Vec<Color> =
            (0..c.r()).map(|i| Color(i as u8)).filter(|&i| self.is_large(&neighbors(c, m, i))).collect();
        match large[..] {
            [one] => Ok(one),
            _ => Err(Error::OracleViolation(format!(
                "neighbor partition of {m} has {} large parts {:?}",
                large.len(),
                large.iter().map(|c| c.0).collect::<Vec<_>>()
            ))),
        }
    }
}

/// Cofinite largeness for a stable coloring. A set is large when it contains
/// the tail `[T, n)` with `T = max(max threshold, ceil(n/2))`; for every
/// `m < T` the limit-color neighbor set contains that tail and the others
/// miss it, so the domain is `[0, T)`.
pub fn cofinite_oracle(c: &Coloring) -> Result<LargenessOracle> {
    let Some(p) = c.stable_presentation() else {
        return Err(Error::domain("the cofinite oracle needs a stable presentation"));
    };
    let n = c.n();
    let tau = p.max_threshold();
    if tau >= n {
        return Err(Error::precondition(format!("max threshold {tau} is not below n = {n}")));
    }
    let tail_start = tau.max(n.div_ceil(2));
    Ok(LargenessOracle { n, kind: OracleKind::Cofinite { tail_start }, domain: (0..tail_start).collect(), pred: None })
}

/// Majority on `reference`. Its domain is computed by checking every vertex.
pub fn exact_finite_oracle(c: &Coloring, reference: VertexSet) -> Result<LargenessOracle> {
    if let Some(&v) = reference.iter().find(|&&v| v >= c.n()) {
        return Err(Error::Range { vertex: v, bound: c.n() });
    }
    let mut o = LargenessOracle { n: c.n(), kind: OracleKind::ExactFinite { reference }, domain: VertexSet::new(), pred: None };
    o.domain = (0..c.n()).filter(|&m| o.large_color(c, m).is_ok()).collect();
    Ok(o)
}

/// Which side of `N(m, i)` the residual set was cut down to at one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohesiveStage {
    pub m: Vertex,
    pub i: Color,
    /// True when the residual set was intersected with `N(m, i)` itself.
    pub inside: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohesiveState {
    /// `c_0 < c_1 < ...` in the order they were taken.
    pub set: Vec<Vertex>,
    pub residual: VertexSet,
    pub processed: Vec<CohesiveStage>,
}

/// Stagewise cohesive-set construction over the pairs `<m, i>` indexed
/// `m * r + i`, at most `max_pairs` of them. Each stage moves the least
/// residual element into the set and keeps the larger of the two sides of
/// `N(m, i)` (ties keep `N(m, i)`).
pub fn cohesive_build(c: &Coloring, max_pairs: usize) -> CohesiveState {
    let r = c.r();
    let mut residual: VertexSet = (0..c.n()).collect();
    let mut set = Vec::new();
    let mut processed = Vec::new();
    for s in 0..max_pairs.min(c.n() * r) {
        let Some(&least) = residual.iter().next() else { break };
        set.push(least);
        let (m, i) = (s / r, Color((s % r) as u8));
        let (inside, outside): (VertexSet, VertexSet) =
            residual.iter().partition(|&&v| v != m && c.color(m, v) == i);
        let keep_inside = inside.len() >= outside.len();
        residual = if keep_inside { inside } else { outside };
        residual.remove(&least);
        processed.push(CohesiveStage { m, i, inside: keep_inside });
    }
    CohesiveState { set, residual, processed }
}

/// Largeness "all but `slack` elements of C lie inside". A vertex `m` is in
/// the domain when all its pairs were processed early enough that the tail
/// of C after them pins down exactly one large neighbor set.
pub fn cohesive_oracle(c: &Coloring, state: &CohesiveState, slack: Option<usize>) -> LargenessOracle {
    let slack = slack.unwrap_or(state.set.len() / 4);
    let r = c.r();
    let len = state.set.len();
    let domain = (0..c.n())
        .filter(|&m| {
            let last = m * r + r - 1;
            last < state.processed.len() && last < slack && len > last + 2 + slack
        })
        .collect();
    LargenessOracle { n: c.n(), kind: OracleKind::Cohesive { set: state.set.clone(), slack }, domain, pred: None }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub partitions: usize,
    pub intersections: usize,
}

/// Tests the oracle on every neighbor partition of its domain: exactly one
/// part large, no large set below the oracle's scale, the empty set small,
/// and every pair of large neighbor sets found has a large intersection.
pub fn check_axioms(o: &LargenessOracle, c: &Coloring) -> Result<AxiomReport> {
    if o.is_large(&VertexSet::new()) {
        return Err(Error::OracleViolation("the empty set is large".into()));
    }
    let mut report = AxiomReport::default();
    let mut large_sets = Vec::new();
    for &m in o.domain() {
        let color = o.large_color(c, m)?;
        let set = neighbors(c, m, color);
        if set.len() < o.scale() {
            return Err(Error::OracleViolation(format!(
                "N({m}, {color}) has {} elements, below the scale {}",
                set.len(),
                o.scale()
            )));
        }
        large_sets.push((m, set));
        report.partitions += 1;
    }
    for (a, (m, x)) in large_sets.iter().enumerate() {
        for (k, y) in &large_sets[a + 1..] {
            let both: VertexSet = x.intersection(y).copied().collect();
            if !o.is_large(&both) {
                return Err(Error::OracleViolation(format!("large neighbor sets of {m} and {k} meet in a small set")));
            }
            report.intersections += 1;
        }
    }
    Ok(report)
}

/// Stagewise construction from a largeness oracle: each unplaced vertex `s`
/// goes to the path of its oracle color `k`, preceded by the least unplaced
/// connector in `N(e, k) ∩ N(s, k)` where `e` ends that path. When no
/// connector is left but the edge `es` itself has color `k`, `s` is appended
/// directly. Stops with a truncation marker at the first vertex outside the
/// oracle domain or without a connector.
pub fn ultra_decompose(c: &Coloring, o: &LargenessOracle) -> Result<Trace> {
    colored_construction(c, |s| o.domain().contains(&s).then(|| o.large_color(c, s)))
}

fn colored_construction(c: &Coloring, color_of: impl Fn(Vertex) -> Option<Result<Color>>) -> Result<Trace> {
    let mut t = Trace::new(DecompState::empty(c.r()));
    let mut placed = vec![false; c.n()];
    for s in 0..c.n() {
        if placed[s] {
            continue;
        }
        let Some(k) = color_of(s) else {
            t.end = TraceEnd::Truncated { at: s, reason: "outside the oracle domain".into() };
            return Ok(t);
        };
        let k = k?;
        if let Some(e) = t.last().end(k) {
            let connector = (0..c.n()).find(|&v| !placed[v] && v != s && c.color(e, v) == k && c.color(s, v) == k);
            match connector {
                Some(v) => {
                    t.push(ExtensionStep::append(k, v))?;
                    placed[v] = true;
                }
                None if c.color(e, s) == k => {}
                None => {
                    t.end = TraceEnd::Truncated { at: s, reason: "no connector".into() };
                    return Ok(t);
                }
            }
        }
        t.push(ExtensionStep::append(k, s))?;
        placed[s] = true;
    }
    t.end = TraceEnd::Complete;
    Ok(t)
}

/// A stable decomposition of a prefix: the construction above with cofinite
/// largeness, continued past the oracle domain with each vertex's limit
/// color (which is its oracle color inside the domain). `prefix` is the
/// largest `p` with `[0, p)` placed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableOutcome {
    pub trace: Trace,
    pub prefix: usize,
}

pub fn stable_decompose(c: &Coloring, r: usize) -> Result<StableOutcome> {
    if c.kind() != ColoringKind::StablePresented {
        return Err(Error::domain("stable_decompose needs a stable presentation"));
    }
    if r != c.r() {
        return Err(Error::domain(format!("coloring has {} colors, asked for {r}", c.r())));
    }
    let o = cofinite_oracle(c)?;
    let limits = &c.stable_presentation().expect("checked above").limits;
    let trace = colored_construction(c, |s| {
        Some(if o.domain().contains(&s) { o.large_color(c, s) } else { Ok(limits[s]) })
    })?;
    let placed = trace.last().placed_mask(c.n());
    let prefix = placed.iter().position(|&p| !p).unwrap_or(c.n());
    Ok(StableOutcome { trace, prefix })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homogeneous {
    pub color: Color,
    pub set: Vec<Vertex>,
    /// False when the thinning ran out before the target size.
    pub complete: bool,
}

/// Thins the large color class into a homogeneous set: `A_j` is the set of
/// domain vertices whose `j`-neighborhood is large, `j` is the unique color
/// with `A_j` large, and each next element is the least member of `A_j`
/// inside all previous `j`-neighborhoods.
pub fn homogeneous_set(c: &Coloring, o: &LargenessOracle, target: usize) -> Result<Homogeneous> {
    let mut classes = vec![VertexSet::new(); c.r()];
    for &m in o.domain() {
        classes[o.large_color(c, m)?.index()].insert(m);
    }
    let large: Vec<usize> = (0..c.r()).filter(|&j| o.is_large(&classes[j])).collect();
    let [j] = large[..] else {
        return Err(Error::OracleViolation(format!("{} of the color classes are large", large.len())));
    };
    let color = Color(j as u8);
    let mut pool = classes.swap_remove(j);
    let mut set = Vec::new();
    while set.len() < target {
        let Some(&h) = pool.iter().next() else { break };
        set.push(h);
        pool.retain(|&v| v > h && c.color(h, v) == color);
    }
    let complete = set.len() == target;
    Ok(Homogeneous { color, set, complete })
}

/// A condition: paths, a reservoir standing in for an infinite set, and the
/// liveness threshold below which the reservoir counts as exhausted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub paths: DecompState,
    pub reservoir: VertexSet,
    pub theta: usize,
}

impl Condition {
    /// Disjoint valid paths, a live reservoir of free vertices, and every
    /// reservoir vertex joined to each path end in that path's color.
    pub fn check(&self, c: &Coloring) -> std::result::Result<(), String> {
        crate::paths::validate_placed(c, &self.paths).map_err(|e| e.to_string())?;
        if self.reservoir.len() < self.theta {
            return Err(format!("reservoir of {} is below theta {}", self.reservoir.len(), self.theta));
        }
        if let Some(v) = self.reservoir.iter().find(|&&v| self.paths.contains(v)) {
            return Err(format!("reservoir vertex {v} is on a path"));
        }
        for p in self.paths.paths() {
            if let Some(e) = p.end() {
                if let Some(x) = self.reservoir.iter().find(|&&x| c.color(e, x) != p.color) {
                    return Err(format!("reservoir vertex {x} is not a {} neighbor of end {e}", p.color));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericRun {
    pub trace: Trace,
    /// The condition after each vertex was placed, starting with the initial one.
    pub conditions: Vec<Condition>,
}

/// Meets the dense sets "vertex i is placed" for i = 0, 1, ... in turn.
/// Vertex `i` goes to the color `j` with the most `j`-neighbors left in the
/// reservoir (least `j` on ties), after the least reservoir connector when
/// path `j` is nonempty; the reservoir shrinks to those neighbors. Stops
/// with a truncation marker when no connector exists or the reservoir would
/// fall below `theta`.
pub fn generic_decompose(c: &Coloring, r: usize, theta: usize) -> Result<GenericRun> {
    if r != c.r() {
        return Err(Error::domain(format!("coloring has {} colors, asked for {r}", c.r())));
    }
    if theta < r + 1 {
        return Err(Error::precondition(format!("theta {theta} must be at least r + 1 = {}", r + 1)));
    }
    let mut cond = Condition { paths: DecompState::empty(r), reservoir: (0..c.n()).collect(), theta };
    let mut t = Trace::new(cond.paths.clone());
    let mut conditions = vec![cond.clone()];
    for i in 0..c.n() {
        if cond.paths.contains(i) {
            continue;
        }
        let (j, mut next) = (0..r)
            .map(|j| {
                let color = Color(j as u8);
                (color, cond.reservoir.iter().copied().filter(|&x| x != i && c.color(i, x) == color).collect::<VertexSet>())
            })
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
            .expect("r >= 1");
        let mut steps = Vec::new();
        if cond.paths.end(j).is_some() {
            // Reservoir vertices are already j-neighbors of the end.
            let Some(&v) = next.iter().next() else {
                t.end = TraceEnd::Truncated { at: i, reason: "no connector".into() };
                return Ok(GenericRun { trace: t, conditions });
            };
            steps.push(ExtensionStep::append(j, v));
            next.remove(&v);
        }
        if next.len() < theta {
            t.end = TraceEnd::Truncated { at: i, reason: format!("reservoir would drop to {} < theta", next.len()) };
            return Ok(GenericRun { trace: t, conditions });
        }
        steps.push(ExtensionStep::append(j, i));
        for st in steps {
            t.push(st)?;
        }
        cond = Condition { paths: t.last().clone(), reservoir: next, theta };
        conditions.push(cond.clone());
    }
    t.end = TraceEnd::Complete;
    Ok(GenericRun { trace: t, conditions })
}
