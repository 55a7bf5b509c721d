//! Stagewise limit constructions for 2-colorings, run on a finite universe.
//!
//! Everything here is relative to the universe `[n]` of the coloring: an
//! extension may only use vertices below `n`, and strongness is decided
//! against the free vertices of `[n]`. Searches that could run long are
//! bounded by [`Budgets`]; a bounded search that gives up says so.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, Vertex};
use crate::error::{Error, Result};
use crate::paths::{free_mask, insert_vertex, legal_steps, route, DecompState, ExtensionStep, Trace, TraceEnd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Candidate witness pairs have at most this many vertices in total.
    pub pair_len: usize,
    /// Extension searches add at most this many vertices past their start.
    pub depth: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { pair_len: 6, depth: 8 }
    }
}

/// Strong one-step extensions of `s`, ordered by (case, vertex).
pub fn strong_steps(c: &Coloring, s: &DecompState) -> Vec<ExtensionStep> {
    legal_steps(c, s).into_iter().filter(|st| !st.is_switch() || st.strong).collect()
}

/// The least strong switch of `color` available from `s`: a switch *to* `color`.
pub fn strong_switch_to(c: &Coloring, s: &DecompState, color: Color) -> Option<ExtensionStep> {
    legal_steps(c, s).into_iter().find(|st| st.is_switch() && st.strong && st.target() == color)
}

fn check_two_colors(c: &Coloring) -> Result<()> {
    if c.r() == 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("switch calculus needs r = 2, got r = {}", c.r())))
    }
}

/// Shortest sequence of strong one-step extensions from `s` ending in a
/// strong switch to `color`, adding at most `depth` vertices. Ties go to the
/// sequence that is least in (case, vertex) order. The flag reports whether
/// the depth bound cut the search.
pub fn find_switching_extension(
    c: &Coloring,
    s: &DecompState,
    color: Color,
    depth: usize,
) -> (Option<Vec<ExtensionStep>>, bool) {
    let mut seen: HashSet<DecompState> = HashSet::from([s.clone()]);
    let mut queue = VecDeque::from([(s.clone(), Vec::<ExtensionStep>::new())]);
    let mut truncated = false;
    while let Some((state, seq)) = queue.pop_front() {
        if seq.len() >= depth {
            truncated |= !strong_steps(c, &state).is_empty();
            continue;
        }
        let steps = strong_steps(c, &state);
        if let Some(sw) = steps.iter().find(|st| st.is_switch() && st.target() == color) {
            let mut out = seq;
            out.push(*sw);
            return (Some(out), false);
        }
        for st in steps {
            let next = crate::paths::apply_step(&state, &st).expect("legal steps apply");
            if seen.insert(next.clone()) {
                let mut longer = seq.clone();
                longer.push(st);
                queue.push_back((next, longer));
            }
        }
    }
    (None, truncated)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reach {
    Found,
    Exhausted,
    Truncated,
}

/// Memoized "can some strong extension of this state strongly switch to
/// `color`", explored up to a fixed total length so that answers do not
/// depend on where the search started.
struct SwitchReach<'a> {
    c: &'a Coloring,
    color: Color,
    horizon: usize,
    memo: HashMap<DecompState, Reach>,
}

impl SwitchReach<'_> {
    fn reach(&mut self, s: &DecompState) -> Reach {
        if let Some(&r) = self.memo.get(s) {
            return r;
        }
        let steps = strong_steps(self.c, s);
        let result = if steps.iter().any(|st| st.is_switch() && st.target() == self.color) {
            Reach::Found
        } else if steps.is_empty() {
            Reach::Exhausted
        } else if s.total_len() >= self.horizon {
            Reach::Truncated
        } else {
            let mut acc = Reach::Exhausted;
            for st in steps {
                let next = crate::paths::apply_step(s, &st).expect("legal steps apply");
                match self.reach(&next) {
                    Reach::Found => {
                        acc = Reach::Found;
                        break;
                    }
                    Reach::Truncated => acc = Reach::Truncated,
                    Reach::Exhausted => {}
                }
            }
            acc
        };
        self.memo.insert(s.clone(), result);
        result
    }
}

/// Answer to "can we always strongly switch to this color".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// Every pair within the pair budget has a strong extension containing
    /// such a switch.
    Yes,
    /// `witness` admits no such extension; among the pairs examined its path
    /// of the queried color is as short as possible.
    No { witness: DecompState },
    /// Some pair could be settled only by searching past the budget.
    Unknown { pairs_examined: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub can_red: Verdict,
    pub can_blue: Verdict,
}

impl CaseVerdict {
    pub fn get(&self, color: Color) -> &Verdict {
        if color == Color::RED {
            &self.can_red
        } else {
            &self.can_blue
        }
    }
}

/// All color-`z` paths with at most `max_len` vertices, in order of length
/// and then lexicographically.
fn mono_paths(c: &Coloring, z: Color, max_len: usize) -> Vec<Vec<Vertex>> {
    let mut by_len: Vec<Vec<Vec<Vertex>>> = vec![vec![Vec::new()]];
    for len in 1..=max_len.min(c.n()) {
        let mut next = Vec::new();
        for p in &by_len[len - 1] {
            for v in 0..c.n() {
                if !p.contains(&v) && p.last().is_none_or(|&e| c.color(e, v) == z) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        by_len.push(next);
    }
    by_len.into_iter().flatten().collect()
}

/// Decides, within budget, whether every pair of disjoint paths has a
/// strong extension that strongly switches to `color`. Pairs are visited by
/// (length of the `color` path, length of the other path, vertices), so the
/// first failure is a witness with the shortest `color` path examined.
pub fn detect_color(c: &Coloring, color: Color, budgets: Budgets) -> Result<Verdict> {
    check_two_colors(c)?;
    let own = mono_paths(c, color, budgets.pair_len);
    let other = mono_paths(c, color.opposite(), budgets.pair_len);
    let mut search = SwitchReach {
        c,
        color,
        horizon: c.n().min(budgets.pair_len + budgets.depth),
        memo: HashMap::new(),
    };
    let mut examined = 0u64;
    let mut unknown = false;
    let mut lengths = BTreeMap::<(usize, usize), Vec<(&Vec<Vertex>, &Vec<Vertex>)>>::new();
    for p in &own {
        for q in &other {
            if p.len() + q.len() <= budgets.pair_len && p.iter().all(|v| !q.contains(v)) {
                lengths.entry((p.len(), q.len())).or_default().push((p, q));
            }
        }
    }
    for pairs in lengths.values() {
        for &(p, q) in pairs {
            let s = if color == Color::RED {
                DecompState::pair(q.clone(), p.clone())
            } else {
                DecompState::pair(p.clone(), q.clone())
            };
            examined += 1;
            match search.reach(&s) {
                Reach::Exhausted => return Ok(Verdict::No { witness: s }),
                Reach::Truncated => unknown = true,
                Reach::Found => {}
            }
        }
    }
    Ok(if unknown { Verdict::Unknown { pairs_examined: examined } } else { Verdict::Yes })
}

pub fn detect_case(c: &Coloring, budgets: Budgets) -> Result<CaseVerdict> {
    Ok(CaseVerdict {
        can_red: detect_color(c, Color::RED, budgets)?,
        can_blue: detect_color(c, Color::BLUE, budgets)?,
    })
}

/// Whether a strong extension of `s` can strongly switch to `color`, searching
/// the whole universe. `None` when the horizon cut the search.
pub fn can_switch_from(c: &Coloring, s: &DecompState, color: Color) -> Option<bool> {
    let mut search = SwitchReach { c, color, horizon: c.n(), memo: HashMap::new() };
    match search.reach(s) {
        Reach::Found => Some(true),
        Reach::Exhausted => Some(false),
        Reach::Truncated => None,
    }
}

/// Appends the route to `x` as single steps.
fn push_route(t: &mut Trace, color: Color, route: Vec<Vertex>) -> Result<()> {
    for v in route {
        t.push(ExtensionStep::append(color, v))?;
    }
    Ok(())
}

fn least_free(c: &Coloring, s: &DecompState) -> Option<Vertex> {
    free_mask(c, s).iter().position(|&f| f)
}

/// Places `x` by a path extension in `first` color, else in the other, and
/// reports whether either worked.
fn extend_to(c: &Coloring, t: &mut Trace, x: Vertex, first: Color) -> Result<bool> {
    let free = free_mask(c, t.last());
    for color in [first, first.opposite()] {
        if let Some(r) = route(c, t.last().end(color), color, x, &free) {
            push_route(t, color, r)?;
            return Ok(true);
        }
    }
    Ok(false)
}

/// The construction for colorings where both switches are always available.
/// Each round places the least free vertex (path extension in BLUE, else
/// RED, else a strong switch), then appends a shortest strong extension
/// ending in a strong switch to RED, then one ending in a strong switch to
/// BLUE. Runs until every vertex is placed, or ends with a case-failure
/// marker when a required switch is not found.
pub fn always_switch_construction(c: &Coloring, budgets: Budgets) -> Result<Trace> {
    check_two_colors(c)?;
    let mut t = Trace::new(DecompState::empty(2));
    while let Some(x) = least_free(c, t.last()) {
        if !extend_to(c, &mut t, x, Color::BLUE)? {
            let (_, step) = insert_vertex(c, t.last(), x)?;
            if !step.strong {
                return Err(Error::Anomaly(format!("placing {x} needed a weak switch")));
            }
            t.push(step)?;
        }
        for color in [Color::RED, Color::BLUE] {
            if least_free(c, t.last()).is_none() {
                break;
            }
            match find_switching_extension(c, t.last(), color, budgets.depth).0 {
                Some(seq) => {
                    for st in seq {
                        t.push(st)?;
                    }
                }
                None => {
                    t.end = TraceEnd::CaseFailure { needed: color };
                    return Ok(t);
                }
            }
        }
    }
    t.end = TraceEnd::Complete;
    Ok(t)
}

/// Greedy construction from a witness that `frozen` switches are not always
/// available: the least free vertex is reached by a path extension in the
/// other color, else in `frozen`. No switches occur. If neither color
/// reaches the vertex the trace ends with an anomaly marker.
pub fn cannot_switch_construction(c: &Coloring, witness: &DecompState, frozen: Color) -> Result<Trace> {
    check_two_colors(c)?;
    crate::paths::validate_placed(c, witness)
        .map_err(|e| Error::precondition(format!("witness is not a pair of disjoint paths: {e}")))?;
    let mut t = Trace::new(witness.clone());
    while let Some(x) = least_free(c, t.last()) {
        if !extend_to(c, &mut t, x, frozen.opposite())? {
            t.end = TraceEnd::Anomaly { vertex: x };
            return Ok(t);
        }
    }
    t.end = TraceEnd::Complete;
    Ok(t)
}

/// One entry of a limit path: the vertex and the first stage from which it
/// sat at this position through the end of the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitEntry {
    pub vertex: Vertex,
    pub since: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitPaths {
    /// Per color, the positions holding the same vertex from some stage on.
    pub stabilized: Vec<Vec<LimitEntry>>,
    /// Per color, the first position with no value at the end of the trace.
    pub undefined_from: Vec<usize>,
    /// Per color, the length of the prefix guaranteed stable by strong
    /// switches onto that path: everything up to the last such vertex.
    pub certified: Vec<usize>,
}

pub fn limit_paths(t: &Trace) -> LimitPaths {
    let last = t.last();
    let r = last.r();
    let mut stabilized = Vec::with_capacity(r);
    for j in 0..r {
        let color = Color(j as u8);
        let fin = last.path(color);
        let mut entries: Vec<LimitEntry> = Vec::with_capacity(fin.len());
        for (i, &v) in fin.iter().enumerate() {
            let mut since = t.states().len() - 1;
            while since > 0 && t.states()[since - 1].path(color).get(i) == Some(&v) {
                since -= 1;
            }
            // A position is only as stable as the prefix before it.
            let floor = entries.last().map_or(0, |e| e.since);
            entries.push(LimitEntry { vertex: v, since: since.max(floor) });
        }
        stabilized.push(entries);
    }
    let mut certified = vec![0; r];
    for step in t.steps().iter().filter(|s| s.strong) {
        let (Some(v), to) = (step.switched, step.target()) else { continue };
        if let Some(pos) = last.path(to).iter().position(|&x| x == v) {
            certified[to.index()] = certified[to.index()].max(pos + 1);
        }
    }
    LimitPaths { undefined_from: stabilized.iter().map(Vec::len).collect(), stabilized, certified }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    /// The always-switch construction placed every vertex.
    UniformOk,
    /// `frozen` cannot always be strongly switched to. `finite` is the path
    /// that was fixed before covering began; `case` is 1 when it is the
    /// witness's `frozen` path and 2 when it is a stuck path of the other color.
    Fallback { frozen: Color, case: u8, finite: Color, witness: DecompState },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformResult {
    pub state: DecompState,
    pub outcome: Outcome,
    pub trace: Trace,
}

/// Greedy covering in `grow` with the other path held fixed: repeatedly
/// extend to the least free vertex reachable by a `grow` route. Returns the
/// least free vertex left over, if any.
fn grow_only(c: &Coloring, t: &mut Trace, grow: Color) -> Result<Option<Vertex>> {
    loop {
        let free = free_mask(c, t.last());
        let end = t.last().end(grow);
        let Some(first) = free.iter().position(|&f| f) else { return Ok(None) };
        match (first..c.n()).filter(|&x| free[x]).find_map(|x| route(c, end, grow, x, &free)) {
            Some(r) => push_route(t, grow, r)?,
            None => return Ok(Some(first)),
        }
    }
}

/// The fallback from a witness that `frozen` switches are not always
/// available. Case 1: keep the witness's `frozen` path and cover the rest
/// greedily in the other color. If some vertex stays out of reach, the
/// other-color path grown so far (as far as it reaches) is held fixed
/// instead, and Case 2 covers the rest greedily in `frozen`.
pub fn fallback_from_witness(c: &Coloring, witness: &DecompState, frozen: Color) -> Result<(Trace, Outcome)> {
    let other = frozen.opposite();
    let mut t = Trace::new(witness.clone());
    let outcome = |case, finite| Outcome::Fallback { frozen, case, finite, witness: witness.clone() };
    let Some(n0) = grow_only(c, &mut t, other)? else {
        t.end = TraceEnd::Complete;
        return Ok((t, outcome(1, frozen)));
    };
    if let Some(stuck) = grow_only(c, &mut t, frozen)? {
        t.end = TraceEnd::Anomaly { vertex: stuck };
        return Err(Error::Anomaly(format!(
            "no {other} extension to {n0} and no {frozen} extension to {stuck} from the witness"
        )));
    }
    t.end = TraceEnd::Complete;
    Ok((t, outcome(2, other)))
}

/// Runs the always-switch construction; if it stalls, finds a witness by
/// case detection and falls back to a decomposition with one fixed path.
pub fn uniform_attempt(c: &Coloring, budgets: Budgets) -> Result<UniformResult> {
    let t = always_switch_construction(c, budgets)?;
    let needed = match t.end {
        TraceEnd::Complete => {
            return Ok(UniformResult { state: t.last().clone(), outcome: Outcome::UniformOk, trace: t });
        }
        TraceEnd::CaseFailure { needed } => needed,
        ref other => return Err(Error::Anomaly(format!("unexpected trace end {other:?}"))),
    };
    for frozen in [needed, needed.opposite()] {
        if let Verdict::No { witness } = detect_color(c, frozen, budgets)? {
            let (trace, outcome) = fallback_from_witness(c, &witness, frozen)?;
            return Ok(UniformResult { state: trace.last().clone(), outcome, trace });
        }
    }
    Err(Error::Anomaly(format!(
        "always-switch construction stalled on {needed} but case detection found no witness within budget"
    )))
}
