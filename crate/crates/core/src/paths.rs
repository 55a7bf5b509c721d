//! Monochromatic paths, decomposition states and the one-step extension
//! calculus for 2-colorings.
//!
//! A [`DecompState`] holds one path per color; path `j` has color `j`. For
//! two colors the four one-step moves are: append to the BLUE path, append to
//! the RED path, switch the BLUE end to RED followed by a new vertex, and the
//! mirror image. A switch is *strong* when the opposite color could not have
//! reached the follower through free vertices.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, Vertex, FORMAT_VERSION};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub color: Color,
    pub vertices: Vec<Vertex>,
}

impl Path {
    pub fn new(color: Color, vertices: Vec<Vertex>) -> Self {
        Path { color, vertices }
    }

    pub fn end(&self) -> Option<Vertex> {
        self.vertices.last().copied()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// True iff the vertices are distinct, inside the universe, and every
/// consecutive pair has the path's color. Empty and singleton paths are
/// paths of every color.
pub fn validate_path(c: &Coloring, p: &Path) -> bool {
    let mut seen = BTreeSet::new();
    if !p.vertices.iter().all(|&v| v < c.n() && seen.insert(v)) {
        return false;
    }
    p.vertices.windows(2).all(|w| c.color(w[0], w[1]) == p.color)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "DecompositionFile", try_from = "DecompositionFile")]
pub struct DecompState {
    paths: Vec<Path>,
}

impl DecompState {
    /// `r` empty paths.
    pub fn empty(r: usize) -> Self {
        DecompState {
            paths: (0..r).map(|j| Path::new(Color(j as u8), Vec::new())).collect(),
        }
    }

    /// Path `j` of the result is `lists[j]` with color `j`.
    pub fn from_lists(lists: Vec<Vec<Vertex>>) -> Self {
        DecompState {
            paths: lists
                .into_iter()
                .enumerate()
                .map(|(j, v)| Path::new(Color(j as u8), v))
                .collect(),
        }
    }

    /// Two-color state from its BLUE and RED paths.
    pub fn pair(blue: Vec<Vertex>, red: Vec<Vertex>) -> Self {
        Self::from_lists(vec![blue, red])
    }

    pub fn r(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, color: Color) -> &[Vertex] {
        &self.paths[color.index()].vertices
    }

    pub fn blue(&self) -> &[Vertex] {
        self.path(Color::BLUE)
    }

    pub fn red(&self) -> &[Vertex] {
        self.path(Color::RED)
    }

    pub fn end(&self, color: Color) -> Option<Vertex> {
        self.paths[color.index()].end()
    }

    pub fn total_len(&self) -> usize {
        self.paths.iter().map(Path::len).sum()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.paths.iter().any(|p| p.vertices.contains(&v))
    }

    /// Color and position of `v`, if placed.
    pub fn locate(&self, v: Vertex) -> Option<(Color, usize)> {
        self.paths.iter().find_map(|p| p.vertices.iter().position(|&x| x == v).map(|i| (p.color, i)))
    }

    /// `mask[v]` is true iff `v < n` lies on some path.
    pub fn placed_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for p in &self.paths {
            for &v in &p.vertices {
                if v < n {
                    mask[v] = true;
                }
            }
        }
        mask
    }

    pub fn lists(&self) -> Vec<Vec<Vertex>> {
        self.paths.iter().map(|p| p.vertices.clone()).collect()
    }

    pub(crate) fn path_mut(&mut self, color: Color) -> &mut Vec<Vertex> {
        &mut self.paths[color.index()].vertices
    }

    pub fn to_file(&self) -> DecompositionFile {
        DecompositionFile { v: FORMAT_VERSION, r: self.r(), paths: self.lists() }
    }

    pub fn from_file(file: &DecompositionFile) -> Result<Self> {
        if file.paths.len() != file.r {
            return Err(Error::Malformed(format!(
                "decomposition declares r = {} but lists {} paths",
                file.r,
                file.paths.len()
            )));
        }
        Ok(Self::from_lists(file.paths.clone()))
    }
}

impl From<DecompState> for DecompositionFile {
    fn from(s: DecompState) -> Self {
        s.to_file()
    }
}

impl TryFrom<DecompositionFile> for DecompState {
    type Error = Error;

    fn try_from(file: DecompositionFile) -> Result<Self> {
        DecompState::from_file(&file)
    }
}

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionFile {
    #[serde(default = "format_version")]
    pub v: u32,
    pub r: usize,
    pub paths: Vec<Vec<Vertex>>,
}

/// Why a state is not a path decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompFailure {
    /// The edge entering position `pos` of path `path` has the wrong color.
    BadEdge { path: usize, pos: usize },
    Overlap(Vertex),
    Missing(Vertex),
    OutOfUniverse(Vertex),
    /// The state has a different number of paths than the coloring has colors.
    WrongArity { expected: usize, found: usize },
}

impl fmt::Display for DecompFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompFailure::BadEdge { path, pos } => write!(f, "bad-edge({path},{pos})"),
            DecompFailure::Overlap(v) => write!(f, "overlap({v})"),
            DecompFailure::Missing(v) => write!(f, "missing({v})"),
            DecompFailure::OutOfUniverse(v) => write!(f, "out-of-universe({v})"),
            DecompFailure::WrongArity { expected, found } => {
                write!(f, "wrong-arity(expected {expected}, found {found})")
            }
        }
    }
}

/// Paths valid and pairwise disjoint; coverage is not required.
pub fn validate_placed(c: &Coloring, s: &DecompState) -> std::result::Result<(), DecompFailure> {
    if s.r() != c.r() {
        return Err(DecompFailure::WrongArity { expected: c.r(), found: s.r() });
    }
    let mut seen = vec![false; c.n()];
    for (j, p) in s.paths().iter().enumerate() {
        for (pos, &v) in p.vertices.iter().enumerate() {
            if v >= c.n() {
                return Err(DecompFailure::OutOfUniverse(v));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(DecompFailure::Overlap(v));
            }
            if pos > 0 && c.color(p.vertices[pos - 1], v) != p.color {
                return Err(DecompFailure::BadEdge { path: j, pos });
            }
        }
    }
    Ok(())
}

/// Every path valid, paths disjoint, and their union exactly `0..n`.
pub fn validate_decomposition(
    c: &Coloring,
    s: &DecompState,
    n: usize,
) -> std::result::Result<(), DecompFailure> {
    validate_placed(c, s)?;
    let placed = s.placed_mask(c.n());
    if let Some(v) = s.paths().iter().flat_map(|p| p.vertices.iter()).find(|&&v| v >= n) {
        return Err(DecompFailure::OutOfUniverse(*v));
    }
    match (0..n).find(|&v| v >= placed.len() || !placed[v]) {
        Some(v) => Err(DecompFailure::Missing(v)),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    /// Case (1)/(2): add a vertex at the end of the path of this color.
    Append(Color),
    /// Case (3): the BLUE end moves to the RED path, followed by `added`.
    SwitchToRed,
    /// Case (4): the RED end moves to the BLUE path, followed by `added`.
    SwitchToBlue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "StepRecord", try_from = "StepRecord")]
pub struct ExtensionStep {
    pub kind: StepKind,
    pub added: Vertex,
    pub switched: Option<Vertex>,
    pub strong: bool,
}

impl ExtensionStep {
    pub fn append(color: Color, added: Vertex) -> Self {
        ExtensionStep { kind: StepKind::Append(color), added, switched: None, strong: false }
    }

    pub fn switch_to_red(switched: Vertex, added: Vertex, strong: bool) -> Self {
        ExtensionStep { kind: StepKind::SwitchToRed, added, switched: Some(switched), strong }
    }

    pub fn switch_to_blue(switched: Vertex, added: Vertex, strong: bool) -> Self {
        ExtensionStep { kind: StepKind::SwitchToBlue, added, switched: Some(switched), strong }
    }

    pub fn is_switch(&self) -> bool {
        !matches!(self.kind, StepKind::Append(_))
    }

    /// Color of the path that receives `added`.
    pub fn target(&self) -> Color {
        match self.kind {
            StepKind::Append(c) => c,
            StepKind::SwitchToRed => Color::RED,
            StepKind::SwitchToBlue => Color::BLUE,
        }
    }
}

impl fmt::Display for ExtensionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.switched) {
            (StepKind::Append(c), _) => write!(f, "append {} to {c}", self.added),
            (StepKind::SwitchToRed, Some(x)) => {
                write!(f, "{x} switches to RED, then {}{}", self.added, if self.strong { " (strong)" } else { "" })
            }
            (StepKind::SwitchToBlue, Some(x)) => {
                write!(f, "{x} switches to BLUE, then {}{}", self.added, if self.strong { " (strong)" } else { "" })
            }
            _ => write!(f, "malformed step"),
        }
    }
}

/// Serialized form of a step: `{"step": {"kind": ..., ...}, "strong": bool}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: StepPayload,
    pub strong: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StepPayload {
    AppendBlue { added: Vertex },
    AppendRed { added: Vertex },
    Append { color: Color, added: Vertex },
    SwitchToRed { switched: Vertex, added: Vertex },
    SwitchToBlue { switched: Vertex, added: Vertex },
}

impl From<ExtensionStep> for StepRecord {
    fn from(s: ExtensionStep) -> Self {
        let step = match s.kind {
            StepKind::Append(Color::BLUE) => StepPayload::AppendBlue { added: s.added },
            StepKind::Append(Color::RED) => StepPayload::AppendRed { added: s.added },
            StepKind::Append(color) => StepPayload::Append { color, added: s.added },
            StepKind::SwitchToRed => StepPayload::SwitchToRed {
                switched: s.switched.unwrap_or_default(),
                added: s.added,
            },
            StepKind::SwitchToBlue => StepPayload::SwitchToBlue {
                switched: s.switched.unwrap_or_default(),
                added: s.added,
            },
        };
        StepRecord { step, strong: s.strong }
    }
}

impl TryFrom<StepRecord> for ExtensionStep {
    type Error = String;

    fn try_from(rec: StepRecord) -> std::result::Result<Self, String> {
        let step = match rec.step {
            StepPayload::AppendBlue { added } => ExtensionStep::append(Color::BLUE, added),
            StepPayload::AppendRed { added } => ExtensionStep::append(Color::RED, added),
            StepPayload::Append { color, added } => ExtensionStep::append(color, added),
            StepPayload::SwitchToRed { switched, added } => {
                ExtensionStep::switch_to_red(switched, added, rec.strong)
            }
            StepPayload::SwitchToBlue { switched, added } => {
                ExtensionStep::switch_to_blue(switched, added, rec.strong)
            }
        };
        if rec.strong && !step.is_switch() {
            return Err("only switch steps carry the strong flag".into());
        }
        Ok(step)
    }
}

/// Applies one step to a state. Only the shape of the step is checked here;
/// edge colors are the caller's business (see [`validate_placed`]).
pub fn apply_step(s: &DecompState, step: &ExtensionStep) -> Result<DecompState> {
    if s.contains(step.added) {
        return Err(Error::precondition(format!("vertex {} is already placed", step.added)));
    }
    let mut next = s.clone();
    match step.kind {
        StepKind::Append(color) => {
            if color.index() >= s.r() {
                return Err(Error::precondition(format!("no {color} path in an r = {} state", s.r())));
            }
            if step.strong || step.switched.is_some() {
                return Err(Error::precondition("append steps carry no switch payload"));
            }
            next.path_mut(color).push(step.added);
        }
        StepKind::SwitchToRed | StepKind::SwitchToBlue => {
            if s.r() != 2 {
                return Err(Error::precondition("switches are defined for two colors only"));
            }
            let to = step.target();
            let from = to.opposite();
            let end = s.end(from).ok_or_else(|| {
                Error::precondition(format!("cannot switch to {to}: the {from} path is empty"))
            })?;
            if step.switched != Some(end) {
                return Err(Error::precondition(format!(
                    "switch names {:?} but the {from} end is {end}",
                    step.switched
                )));
            }
            next.path_mut(from).pop();
            let dest = next.path_mut(to);
            dest.push(end);
            dest.push(step.added);
        }
    }
    Ok(next)
}

/// The vertices appended to path `z` by the shortest color-`z` route from
/// `start` to `target` whose interior and target lie in `free`. With no
/// start (empty path) the route is just `[target]`. Neighbors are explored in
/// increasing order, so ties go to the least vertex.
pub fn route(
    c: &Coloring,
    start: Option<Vertex>,
    z: Color,
    target: Vertex,
    free: &[bool],
) -> Option<Vec<Vertex>> {
    let Some(start) = start else {
        return free[target].then(|| vec![target]);
    };
    if !free[target] {
        return None;
    }
    let n = c.n();
    let mut parent = vec![usize::MAX; n];
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if v == u || !free[v] || parent[v] != usize::MAX || c.color(u, v) != z {
                continue;
            }
            parent[v] = u;
            if v == target {
                let mut out = vec![target];
                let mut w = u;
                while w != start {
                    out.push(w);
                    w = parent[w];
                }
                out.reverse();
                return Some(out);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Free vertices of a state: in the universe and on no path.
pub fn free_mask(c: &Coloring, s: &DecompState) -> Vec<bool> {
    s.placed_mask(c.n()).into_iter().map(|p| !p).collect()
}

/// A color-`z` path extension of `s` ending at `x`: path `z` grown through
/// `free` until it ends at `x`, all other paths untouched.
pub fn find_color_extension_to(
    c: &Coloring,
    s: &DecompState,
    z: Color,
    x: Vertex,
    free: &BTreeSet<Vertex>,
) -> Result<Option<Path>> {
    if !free.contains(&x) {
        return Err(Error::precondition(format!("target {x} is not free")));
    }
    let mut mask = vec![false; c.n()];
    for &v in free {
        if v >= c.n() {
            return Err(Error::Range { vertex: v, bound: c.n() });
        }
        if s.contains(v) {
            return Err(Error::precondition(format!("free vertex {v} is already placed")));
        }
        mask[v] = true;
    }
    Ok(route(c, s.end(z), z, x, &mask).map(|tail| {
        let mut vertices = s.path(z).to_vec();
        vertices.extend(tail);
        Path::new(z, vertices)
    }))
}

/// Whether `switched` (the end of one path) moving across, followed by
/// `follower`, is a strong switch: the color being left has no extension to
/// `follower` through the free vertices of `s`.
pub fn is_strong_switch(c: &Coloring, s: &DecompState, switched: Vertex, follower: Vertex) -> Result<bool> {
    if c.r() != 2 || s.r() != 2 {
        return Err(Error::domain("strong switches are defined for 2-colorings"));
    }
    let from = if s.end(Color::BLUE) == Some(switched) {
        Color::BLUE
    } else if s.end(Color::RED) == Some(switched) {
        Color::RED
    } else {
        return Err(Error::precondition(format!("{switched} is not the end of either path")));
    };
    if follower >= c.n() {
        return Err(Error::Range { vertex: follower, bound: c.n() });
    }
    if s.contains(follower) || follower == switched {
        return Err(Error::precondition(format!("follower {follower} is already placed")));
    }
    let free = free_mask(c, s);
    Ok(route(c, Some(switched), from, follower, &free).is_none())
}

/// The step the inductive 2-color argument takes to place `n`, without
/// deciding strongness.
pub(crate) fn gg_step(c: &Coloring, s: &DecompState, n: Vertex) -> ExtensionStep {
    match (s.end(Color::BLUE), s.end(Color::RED)) {
        (None, _) if s.red().is_empty() => ExtensionStep::append(Color::BLUE, n),
        (_, None) => ExtensionStep::append(Color::RED, n),
        (None, _) => ExtensionStep::append(Color::BLUE, n),
        (Some(xb), Some(xr)) => {
            if c.color(xr, n) == Color::RED {
                ExtensionStep::append(Color::RED, n)
            } else if c.color(xb, n) == Color::BLUE {
                ExtensionStep::append(Color::BLUE, n)
            } else if c.color(xr, xb) == Color::RED {
                ExtensionStep::switch_to_red(xb, n, false)
            } else {
                ExtensionStep::switch_to_blue(xr, n, false)
            }
        }
    }
}

/// One-step extension placing the unplaced vertex `n`, following the
/// inductive argument: singleton on an empty path (BLUE when both are
/// empty), else append RED, else append BLUE, else switch according to the
/// color between the two ends. Switches come back with their strong flag.
pub fn insert_vertex(c: &Coloring, s: &DecompState, n: Vertex) -> Result<(DecompState, ExtensionStep)> {
    if c.r() != 2 || s.r() != 2 {
        return Err(Error::domain("insert_vertex needs a 2-coloring"));
    }
    if n >= c.n() {
        return Err(Error::Range { vertex: n, bound: c.n() });
    }
    if s.contains(n) {
        return Err(Error::precondition(format!("vertex {n} is already placed")));
    }
    let mut step = gg_step(c, s, n);
    if let Some(x) = step.switched {
        step.strong = is_strong_switch(c, s, x, n)?;
    }
    Ok((apply_step(s, &step)?, step))
}

/// How a stagewise construction ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "marker", rename_all = "kebab-case")]
pub enum TraceEnd {
    /// Every vertex the construction set out to place was placed.
    Complete,
    /// A required strong switch of `needed` color was not found in the universe.
    CaseFailure { needed: Color },
    /// Neither greedy extension reached `vertex`.
    Anomaly { vertex: Vertex },
    /// A finite-universe stand-in ran out (connectors, reservoir, oracle domain).
    Truncated { at: Vertex, reason: String },
}

/// A sequence of states, each obtained from the previous one by one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    states: Vec<DecompState>,
    steps: Vec<ExtensionStep>,
    pub end: TraceEnd,
}

impl Trace {
    pub fn new(initial: DecompState) -> Self {
        Trace { states: vec![initial], steps: Vec::new(), end: TraceEnd::Complete }
    }

    pub fn push(&mut self, step: ExtensionStep) -> Result<&DecompState> {
        let next = apply_step(self.last(), &step)?;
        self.states.push(next);
        self.steps.push(step);
        Ok(self.last())
    }

    pub fn initial(&self) -> &DecompState {
        &self.states[0]
    }

    pub fn last(&self) -> &DecompState {
        self.states.last().expect("a trace has an initial state")
    }

    pub fn states(&self) -> &[DecompState] {
        &self.states
    }

    pub fn steps(&self) -> &[ExtensionStep] {
        &self.steps
    }

    pub fn to_file(&self) -> TraceFile {
        TraceFile {
            v: FORMAT_VERSION,
            r: self.initial().r(),
            initial: self.initial().lists(),
            steps: self.steps.iter().map(|&s| s.into()).collect(),
            end: self.end.clone(),
        }
    }

    pub fn from_file(file: &TraceFile) -> Result<Trace> {
        if file.initial.len() != file.r {
            return Err(Error::Malformed("initial state arity differs from r".into()));
        }
        let mut t = Trace::new(DecompState::from_lists(file.initial.clone()));
        for rec in &file.steps {
            let step = ExtensionStep::try_from(rec.clone()).map_err(Error::Malformed)?;
            t.push(step)?;
        }
        t.end = file.end.clone();
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    #[serde(default = "format_version")]
    pub v: u32,
    pub r: usize,
    pub initial: Vec<Vec<Vertex>>,
    pub steps: Vec<StepRecord>,
    pub end: TraceEnd,
}

/// The three-way relation preserved by path extensions: `n` before `m` on
/// RED, or `m` before `n` on BLUE, or `n` on RED with `m` on BLUE.
pub fn before(s: &DecompState, n: Vertex, m: Vertex) -> bool {
    match (s.locate(n), s.locate(m)) {
        (Some((Color::RED, i)), Some((Color::RED, j))) => i < j,
        (Some((Color::BLUE, i)), Some((Color::BLUE, j))) => j < i,
        (Some((Color::RED, _)), Some((Color::BLUE, _))) => true,
        _ => false,
    }
}

/// First pair `(n, m)` related in `initial` but not in `last`.
pub fn check_order_preservation(initial: &DecompState, last: &DecompState) -> std::result::Result<(), (Vertex, Vertex)> {
    let placed: Vec<Vertex> = initial.paths().iter().flat_map(|p| p.vertices.iter().copied()).collect();
    for &n in &placed {
        for &m in &placed {
            if n != m && before(initial, n, m) && !before(last, n, m) {
                return Err((n, m));
            }
        }
    }
    Ok(())
}

/// A breach of the permanence of strong switches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermanenceViolation {
    pub vertex: Vertex,
    pub switch_step: usize,
    pub broken_at: usize,
}

/// After a strong switch moves `v` onto a path, `v` stays on that path and
/// the prefix of that path up to `v` never changes.
pub fn check_strong_permanence(t: &Trace) -> std::result::Result<(), PermanenceViolation> {
    for (i, step) in t.steps().iter().enumerate() {
        let (true, Some(v)) = (step.strong, step.switched) else { continue };
        let to = step.target();
        let after = &t.states()[i + 1];
        let pos = after.path(to).iter().position(|&x| x == v).expect("switched vertex was moved");
        let prefix = &after.path(to)[..=pos];
        for (k, later) in t.states().iter().enumerate().skip(i + 2) {
            let path = later.path(to);
            if path.len() <= pos || &path[..=pos] != prefix {
                return Err(PermanenceViolation { vertex: v, switch_step: i, broken_at: k });
            }
        }
    }
    Ok(())
}

/// Once placed, a vertex stays placed.
pub fn check_placement_monotone(t: &Trace) -> std::result::Result<(), (Vertex, usize)> {
    for (k, w) in t.states().windows(2).enumerate() {
        for p in w[0].paths() {
            if let Some(&v) = p.vertices.iter().find(|&&v| !w[1].contains(v)) {
                return Err((v, k + 1));
            }
        }
    }
    Ok(())
}

/// Every legal one-step extension of a 2-color state that places a vertex
/// of `free`, in (kind, vertex) order, with strong flags decided.
pub fn legal_steps(c: &Coloring, s: &DecompState) -> Vec<ExtensionStep> {
    let free = free_mask(c, s);
    let xb = s.end(Color::BLUE);
    let xr = s.end(Color::RED);
    let mut out = Vec::new();
    for color in [Color::BLUE, Color::RED] {
        let end = s.end(color);
        for x in (0..c.n()).filter(|&x| free[x]) {
            if end.is_none_or(|e| c.color(e, x) == color) {
                out.push(ExtensionStep::append(color, x));
            }
        }
    }
    if let Some(b) = xb {
        if xr.is_none_or(|r| c.color(r, b) == Color::RED) {
            for x in (0..c.n()).filter(|&x| free[x] && c.color(b, x) == Color::RED) {
                let strong = route(c, Some(b), Color::BLUE, x, &free).is_none();
                out.push(ExtensionStep::switch_to_red(b, x, strong));
            }
        }
    }
    if let Some(r) = xr {
        if xb.is_none_or(|b| c.color(b, r) == Color::BLUE) {
            for x in (0..c.n()).filter(|&x| free[x] && c.color(r, x) == Color::BLUE) {
                let strong = route(c, Some(r), Color::RED, x, &free).is_none();
                out.push(ExtensionStep::switch_to_blue(r, x, strong));
            }
        }
    }
    out
}

/// A trace of up to `max_steps` uniformly chosen legal one-step extensions
/// of the empty 2-color state, reproducible from `seed`.
pub fn random_trace(c: &Coloring, seed: u64, max_steps: usize) -> Result<Trace> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut t = Trace::new(DecompState::empty(2));
    for _ in 0..max_steps {
        let moves = legal_steps(c, t.last());
        if moves.is_empty() {
            break;
        }
        t.push(moves[rng.gen_range(0..moves.len())])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::gen_random;
    use proptest::prelude::*;

    fn k3() -> Coloring {
        // {0,1}=B {0,2}=R {1,2}=B
        Coloring::from_triangle(3, 2, vec![0, 1, 0]).unwrap()
    }

    fn blue(n: usize) -> Coloring {
        Coloring::constant(n, 2, Color::BLUE).unwrap()
    }

    fn red(n: usize) -> Coloring {
        Coloring::constant(n, 2, Color::RED).unwrap()
    }

    #[test]
    fn path_validation() {
        assert!(validate_path(&k3(), &Path::new(Color::RED, vec![])));
        assert!(validate_path(&blue(3), &Path::new(Color::BLUE, vec![0, 1, 2])));
        let c = Coloring::from_triangle(4, 2, vec![0, 0, 1, 0, 0, 0]).unwrap();
        assert!(!validate_path(&c, &Path::new(Color::BLUE, vec![0, 1, 2])));
        assert!(!validate_path(&blue(3), &Path::new(Color::BLUE, vec![0, 1, 0])));
    }

    #[test]
    fn decomposition_validation_reasons() {
        let c = blue(2);
        assert_eq!(validate_decomposition(&c, &DecompState::pair(vec![0, 1], vec![]), 2), Ok(()));
        assert_eq!(
            validate_decomposition(&c, &DecompState::pair(vec![0], vec![]), 2),
            Err(DecompFailure::Missing(1))
        );
        assert_eq!(
            validate_decomposition(&c, &DecompState::pair(vec![0, 1], vec![1]), 2),
            Err(DecompFailure::Overlap(1))
        );
        assert_eq!(
            validate_decomposition(&c, &DecompState::pair(vec![], vec![0, 1]), 2),
            Err(DecompFailure::BadEdge { path: 1, pos: 1 })
        );
    }

    #[test]
    fn insert_vertex_follows_the_inductive_rules() {
        let c = k3();
        let (s1, step1) = insert_vertex(&c, &DecompState::pair(vec![0], vec![]), 1).unwrap();
        assert_eq!(s1, DecompState::pair(vec![0], vec![1]));
        assert_eq!(step1.kind, StepKind::Append(Color::RED));
        let (s2, step2) = insert_vertex(&c, &s1, 2).unwrap();
        assert_eq!(s2, DecompState::pair(vec![0, 1, 2], vec![]));
        assert_eq!(step2.kind, StepKind::SwitchToBlue);
        assert_eq!(step2.switched, Some(1));
        assert_eq!(validate_decomposition(&c, &s2, 3), Ok(()));

        let (s, step) = insert_vertex(&blue(3), &DecompState::pair(vec![0], vec![1]), 2).unwrap();
        assert_eq!(s, DecompState::pair(vec![0, 2], vec![1]));
        assert_eq!(step.kind, StepKind::Append(Color::BLUE));

        let (s, _) = insert_vertex(&red(3), &DecompState::empty(2), 2).unwrap();
        assert_eq!(s, DecompState::pair(vec![2], vec![]));

        assert!(matches!(
            insert_vertex(&k3(), &DecompState::pair(vec![0], vec![]), 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn color_extensions() {
        let free: BTreeSet<Vertex> = [3, 5].into();
        let ext = find_color_extension_to(&red(8), &DecompState::empty(2), Color::BLUE, 5, &free).unwrap();
        assert_eq!(ext.unwrap().vertices, vec![5]);
        let s = DecompState::pair(vec![0], vec![]);
        assert_eq!(find_color_extension_to(&red(8), &s, Color::BLUE, 5, &free).unwrap(), None);
        let ext = find_color_extension_to(&blue(8), &s, Color::BLUE, 5, &free).unwrap();
        assert_eq!(ext.unwrap().vertices, vec![0, 5]);
        assert!(find_color_extension_to(&blue(8), &s, Color::BLUE, 0, &free).is_err());
    }

    #[test]
    fn extension_takes_shortest_least_route() {
        // 0-1 B, 1-3 B, 0-2 B, 2-3 B, 0-3 R: two blue routes of length 2, pick via 1.
        let c = Coloring::from_fn(4, 2, |x, y| if (x, y) == (0, 3) { Color::RED } else { Color::BLUE }).unwrap();
        let s = DecompState::pair(vec![0], vec![]);
        let free: BTreeSet<Vertex> = [1, 2, 3].into();
        let p = find_color_extension_to(&c, &s, Color::BLUE, 3, &free).unwrap().unwrap();
        assert_eq!(p.vertices, vec![0, 1, 3]);
    }

    #[test]
    fn strong_switch_examples() {
        let s = DecompState::pair(vec![0], vec![1]);
        assert!(is_strong_switch(&red(5), &s, 0, 2).unwrap());
        assert!(!is_strong_switch(&blue(5), &s, 0, 2).unwrap());
        // {0,1}=B {0,2}=R {1,2}=R {0,3}=R {1,3}=B {2,3}=R
        let c = Coloring::from_triangle(4, 2, vec![0, 1, 1, 1, 0, 1]).unwrap();
        let s = DecompState::pair(vec![1], vec![2]);
        assert!(!is_strong_switch(&c, &s, 1, 3).unwrap());
        assert!(is_strong_switch(&c, &s, 7, 3).is_err());
    }

    #[test]
    fn apply_step_cases() {
        let s = DecompState::pair(vec![0], vec![1]);
        let a = apply_step(&s, &ExtensionStep::append(Color::BLUE, 5)).unwrap();
        assert_eq!(a, DecompState::pair(vec![0, 5], vec![1]));
        let b = apply_step(&s, &ExtensionStep::switch_to_red(0, 5, false)).unwrap();
        assert_eq!(b, DecompState::pair(vec![], vec![1, 0, 5]));
        assert!(apply_step(&s, &ExtensionStep::switch_to_red(1, 5, false)).is_err());
        assert!(apply_step(&s, &ExtensionStep::append(Color::RED, 0)).is_err());
        assert!(apply_step(&DecompState::pair(vec![], vec![]), &ExtensionStep::switch_to_blue(3, 4, false)).is_err());
    }

    #[test]
    fn step_records_round_trip() {
        let steps = [
            ExtensionStep::append(Color::BLUE, 3),
            ExtensionStep::append(Color(2), 4),
            ExtensionStep::switch_to_red(1, 7, true),
        ];
        for s in steps {
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<ExtensionStep>(&json).unwrap(), s);
        }
        let rec = r#"{"step":{"kind":"AppendBlue","added":3},"strong":true}"#;
        assert!(serde_json::from_str::<ExtensionStep>(rec).is_err());
    }

    #[test]
    fn permanence_checker_catches_a_return() {
        // 0 is marked as strongly switched to RED, then switches back.
        let mut t = Trace::new(DecompState::pair(vec![0], vec![1]));
        t.push(ExtensionStep::switch_to_red(0, 2, true)).unwrap();
        t.push(ExtensionStep::switch_to_blue(2, 3, false)).unwrap();
        assert_eq!(check_strong_permanence(&t), Ok(()));
        t.push(ExtensionStep::switch_to_blue(0, 4, false)).unwrap();
        assert!(check_strong_permanence(&t).is_err());
    }


    proptest! {
        #[test]
        fn random_traces_keep_invariants(cseed in 0u64..10_000, tseed in 0u64..10_000, cut in 0usize..10) {
            let c = gen_random(9, 2, cseed).unwrap();
            let t = random_trace(&c, tseed, 25).unwrap();
            for s in t.states() {
                prop_assert_eq!(validate_placed(&c, s), Ok(()));
            }
            prop_assert_eq!(check_placement_monotone(&t), Ok(()));
            prop_assert_eq!(check_strong_permanence(&t), Ok(()));
            let k = cut.min(t.states().len() - 1);
            prop_assert_eq!(check_order_preservation(&t.states()[k], t.last()), Ok(()));
        }

        #[test]
        fn insert_vertex_always_extends(cseed in 0u64..100_000, tseed in 0u64..1000) {
            let c = gen_random(7, 2, cseed).unwrap();
            let t = random_trace(&c, tseed, 4).unwrap();
            let s = t.last();
            for v in (0..7).filter(|&v| !s.contains(v)) {
                let (next, step) = insert_vertex(&c, s, v).unwrap();
                prop_assert_eq!(validate_placed(&c, &next), Ok(()));
                prop_assert!(next.contains(v));
                prop_assert_eq!(next.total_len(), s.total_len() + 1);
                prop_assert_eq!(step.strong && !step.is_switch(), false);
            }
        }
    }
}
