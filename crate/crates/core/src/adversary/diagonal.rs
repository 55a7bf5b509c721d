//! A computable 2-coloring defeating a finite list of limit-approximated
//! decomposers.
//!
//! Stage `s` colors the pairs `{t, s+1}` for `t <= s`. Each candidate offers
//! at every stage an approximation `P_{z,s}` of its two paths, as lists with
//! every value at most `s`. Strategies `(z, i)` (path color `z` of candidate
//! `i`) are ranked by how long the relevant parts of their approximations
//! have been stable, and each ranked strategy traps the path it watches in
//! an interval colored against it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, StreamBuilder, Vertex};
use crate::error::{Error, Result};
use crate::paths::{apply_step, gg_step, DecompState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CandidateKind {
    /// Everything on BLUE in increasing order; RED empty.
    ConstantBlue,
    /// The 2-color greedy insertion run on the stage-`s` prefix.
    GgReplay,
    /// Even vertices on BLUE, odd ones on RED.
    Alternating,
    /// Both paths undefined everywhere.
    Empty,
    /// Fixed lists, revealed once their values are at most the stage.
    Explicit { blue: Vec<Vertex>, red: Vec<Vertex> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateDecomposer {
    pub id: String,
    #[serde(flatten)]
    pub kind: CandidateKind,
    /// First stage at which the candidate is enumerated.
    #[serde(default)]
    pub arrival: usize,
}

impl CandidateDecomposer {
    pub fn new(id: impl Into<String>, kind: CandidateKind) -> Self {
        CandidateDecomposer { id: id.into(), kind, arrival: 0 }
    }

    /// The three shipped flavors.
    pub fn reference_set() -> Vec<Self> {
        vec![
            Self::new("constant-blue", CandidateKind::ConstantBlue),
            Self::new("gg-replay", CandidateKind::GgReplay),
            Self::new("alternating", CandidateKind::Alternating),
        ]
    }

    fn runner(&self) -> Runner<'_> {
        Runner { kind: &self.kind, gg: DecompState::empty(2) }
    }
}

struct Runner<'a> {
    kind: &'a CandidateKind,
    gg: DecompState,
}

impl Runner<'_> {
    /// `[P_{b,s}, P_{r,s}]`, given the coloring of `[s+1]`.
    fn stage(&mut self, c: &Coloring, s: usize) -> [Vec<Vertex>; 2] {
        match self.kind {
            CandidateKind::ConstantBlue => [(0..=s).collect(), Vec::new()],
            CandidateKind::Alternating => [(0..=s).step_by(2).collect(), (1..=s).step_by(2).collect()],
            CandidateKind::Empty => [Vec::new(), Vec::new()],
            CandidateKind::Explicit { blue, red } => {
                let upto = |l: &[Vertex]| l.iter().copied().take_while(|&v| v <= s).collect();
                [upto(blue), upto(red)]
            }
            CandidateKind::GgReplay => {
                let step = gg_step(c, &self.gg, s);
                self.gg = apply_step(&self.gg, &step).expect("greedy steps are legal");
                [self.gg.blue().to_vec(), self.gg.red().to_vec()]
            }
        }
    }
}

/// Stability bookkeeping for one approximated path.
#[derive(Clone, Debug, Default)]
struct Track {
    list: Vec<Vertex>,
    /// `since[l]`: first stage from which the length-`l` prefix has been
    /// defined and unchanged.
    since: Vec<usize>,
    /// First stage from which the value at position 0 (or its absence) has
    /// been unchanged.
    since0: usize,
}

impl Track {
    fn update(&mut self, list: Vec<Vertex>, s: usize) {
        if s == 0 {
            self.since = vec![0; list.len() + 1];
            self.list = list;
            return;
        }
        if self.list.first() != list.first() {
            self.since0 = s;
        }
        let d = self.list.iter().zip(&list).take_while(|(a, b)| a == b).count();
        self.since.truncate(d + 1);
        self.since.resize(list.len() + 1, s);
        self.list = list;
    }
}

/// One ranked strategy at one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelChoice {
    pub candidate: usize,
    pub z: Color,
    /// `t_j(s)`.
    pub t: usize,
    /// `s_j`: the strategy colors `(s_{j-1}, s_j]` against `z` at this stage.
    pub s_j: usize,
    /// Position of the first path element past `s_{j-1}` (0 on level 0).
    pub k: usize,
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLog {
    pub s: usize,
    pub levels: Vec<LevelChoice>,
}

#[derive(Clone, Debug)]
pub struct DiagonalBuild {
    pub candidates: Vec<CandidateDecomposer>,
    /// The coloring of `[S+1]`.
    pub coloring: Coloring,
    pub log: Vec<StageLog>,
}

impl DiagonalBuild {
    pub fn stages(&self) -> usize {
        self.log.len()
    }
}

/// Least `(k, l)` with `[0, prev]` inside `P_z[..k] ∪ P_other[..l]` and
/// `P_z[k] > prev`, if any (with `prev = -1` meaning nothing to cover).
fn cover_split(pz: &[Vertex], other: &[Vertex], prev: Option<usize>, s: usize) -> Option<(usize, usize)> {
    let Some(prev) = prev else { return (!pz.is_empty()).then_some((0, 0)) };
    let mut pos_z = vec![usize::MAX; prev + 1];
    let mut pos_o = vec![usize::MAX; prev + 1];
    for (i, &v) in pz.iter().enumerate().filter(|(_, &v)| v <= prev) {
        pos_z[v] = i;
    }
    for (i, &v) in other.iter().enumerate().filter(|(_, &v)| v <= prev) {
        pos_o[v] = i;
    }
    // Everything missing from the other path must come before position k.
    let mut k_min = 0;
    for x in 0..=prev {
        if pos_o[x] == usize::MAX {
            if pos_z[x] == usize::MAX {
                return None;
            }
            k_min = k_min.max(pos_z[x] + 1);
        }
    }
    let k = (k_min..pz.len().min(s + 1)).find(|&k| pz[k] > prev)?;
    let l = (0..=prev).filter(|&x| pos_z[x] >= k).map(|x| pos_o[x] + 1).max().unwrap_or(0);
    (l <= s).then_some((k, l))
}

/// Runs `stages` stages against `candidates`, producing a coloring of
/// `[stages + 1]` and the per-stage ranking.
pub fn diagonal_build(candidates: &[CandidateDecomposer], stages: usize) -> Result<DiagonalBuild> {
    if candidates.is_empty() {
        return Err(Error::precondition("at least one candidate is needed"));
    }
    let mut builder = StreamBuilder::new(2)?;
    let mut runners: Vec<Runner> = candidates.iter().map(CandidateDecomposer::runner).collect();
    let mut tracks = vec![[Track::default(), Track::default()]; candidates.len()];
    // hist[j][s]: the strategy ranked j at stage s.
    let mut hist: Vec<Vec<Option<(usize, Color)>>> = Vec::new();
    let mut log = Vec::with_capacity(stages);
    for s in 0..stages {
        for (i, run) in runners.iter_mut().enumerate() {
            let [b, r] = run.stage(builder.coloring(), s);
            tracks[i][0].update(b, s);
            tracks[i][1].update(r, s);
        }
        let live: Vec<(usize, Color)> = (0..candidates.len())
            .filter(|&i| candidates[i].arrival <= s)
            .flat_map(|i| [(i, Color::BLUE), (i, Color::RED)])
            .collect();
        let mut colors = vec![Color::BLUE; s + 1];
        let mut levels: Vec<LevelChoice> = Vec::new();
        let mut prev: Option<usize> = None;
        loop {
            let j = levels.len();
            let best = live
                .iter()
                .filter(|p| !levels.iter().any(|l| (l.candidate, l.z) == **p))
                .filter_map(|&(i, z)| {
                    let (own, other) = (&tracks[i][z.index()], &tracks[i][z.opposite().index()]);
                    if j == 0 {
                        return Some((own.since0, i, z, 0, 0));
                    }
                    let (k, l) = cover_split(&own.list, &other.list, prev, s)?;
                    Some((own.list[k].max(own.since[k + 1]).max(other.since[l]), i, z, k, l))
                })
                .min_by_key(|&(t, i, z, _, _)| (t, i, z.index()));
            let Some((t, i, z, k, l)) = best else { break };
            if hist.len() <= j {
                hist.push(vec![None; stages]);
            }
            hist[j][s] = Some((i, z));
            let s_j = (t..=s).find(|&u| hist[j][u] == Some((i, z))).expect("stage s qualifies");
            let lo = prev.map_or(0, |p| p + 1);
            for c in &mut colors[lo..=s_j] {
                *c = z.opposite();
            }
            levels.push(LevelChoice { candidate: i, z, t, s_j, k, l });
            prev = Some(s_j);
            if s_j == s {
                break;
            }
        }
        builder.push_stage(&colors)?;
        log.push(StageLog { s, levels });
    }
    Ok(DiagonalBuild { candidates: candidates.to_vec(), coloring: builder.finish(), log })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BlueFinite,
    RedFinite,
    CoverageGap,
    BadEdge,
    UndecidedAtBound,
}

impl Verdict {
    pub fn is_defeat(self) -> bool {
        self != Verdict::UndecidedAtBound
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "evidence", rename_all = "kebab-case")]
pub enum Evidence {
    /// After position `k` the path can only use `[lo, hi]` and vertices
    /// below `stable_from + 1`: every pair from `[lo, hi]` to anything later
    /// has the other color, and `[0, lo)` is already used.
    Trap { level: usize, lo: usize, hi: usize, k: usize, stable_from: usize },
    BadEdge { path: Color, pos: usize, u: Vertex, v: Vertex },
    Overlap { vertex: Vertex },
    Uncovered { vertex: Vertex, up_to: usize },
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub id: String,
    /// False for objects checked against the coloring without having been
    /// diagonalized against.
    pub was_candidate: bool,
    pub verdict: Verdict,
    pub evidence: Evidence,
    /// Lengths of the limit-at-bound prefixes of the BLUE and RED paths.
    pub limit_lengths: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefeatReport {
    pub stages: usize,
    /// Approximations count as converged when constant from this stage on.
    pub window_start: usize,
    pub candidates: Vec<CandidateReport>,
}

impl DefeatReport {
    pub fn all_defeated(&self) -> bool {
        self.candidates.iter().all(|c| c.verdict.is_defeat())
    }
}

/// Replays the candidate against the built coloring and keeps the prefix
/// of each path that did not change during the last quarter of stages.
fn limit_at_bound(cand: &CandidateDecomposer, c: &Coloring, stages: usize, window: usize) -> [Vec<Vertex>; 2] {
    let mut run = cand.runner();
    let mut tracks = [Track::default(), Track::default()];
    for s in 0..stages {
        let [b, r] = run.stage(c, s);
        tracks[0].update(b, s);
        tracks[1].update(r, s);
    }
    tracks.map(|t| {
        let len = (0..t.since.len()).rev().find(|&l| t.since[l] <= window).unwrap_or(0);
        t.list[..len].to_vec()
    })
}

/// Levels `0..=m` whose choices did not change during the window.
fn settled_levels(build: &DiagonalBuild, window: usize) -> Vec<LevelChoice> {
    let last = &build.log[build.stages() - 1].levels;
    let mut out = Vec::new();
    for (j, choice) in last.iter().enumerate() {
        let steady = build.log[window..].iter().all(|st| {
            st.levels.get(j).is_some_and(|l| (l.candidate, l.z, l.s_j, l.k) == (choice.candidate, choice.z, choice.s_j, choice.k))
        });
        if !steady {
            break;
        }
        out.push(*choice);
    }
    out
}

fn judge(build: &DiagonalBuild, cand: &CandidateDecomposer, window: usize, levels: &[LevelChoice]) -> CandidateReport {
    let c = &build.coloring;
    let n = c.n();
    let paths = limit_at_bound(cand, c, build.stages(), window);
    let index = build.candidates.iter().position(|x| x == cand);
    let report = |verdict, evidence| CandidateReport {
        id: cand.id.clone(),
        was_candidate: index.is_some(),
        verdict,
        evidence,
        limit_lengths: [paths[0].len(), paths[1].len()],
    };
    for (j, lv) in levels.iter().enumerate() {
        if Some(lv.candidate) != index {
            continue;
        }
        let (own, other) = (&paths[lv.z.index()], &paths[lv.z.opposite().index()]);
        let lo = if j == 0 { 0 } else { levels[j - 1].s_j + 1 };
        let hi = lv.s_j;
        let Some(&entry) = own.get(lv.k) else { continue };
        let before_used = (0..lo).all(|x| own[..lv.k].contains(&x) || other.contains(&x));
        let sealed = (lo..=hi).all(|x| (window + 1..n).all(|y| y == x || c.color(x, y) == lv.z.opposite()));
        if (lo..=hi).contains(&entry) && before_used && sealed {
            let verdict = if lv.z == Color::BLUE { Verdict::BlueFinite } else { Verdict::RedFinite };
            return report(verdict, Evidence::Trap { level: j, lo, hi, k: lv.k, stable_from: window });
        }
    }
    let mut seen = vec![false; n];
    for (zi, p) in paths.iter().enumerate() {
        for (pos, &v) in p.iter().enumerate() {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return report(Verdict::BadEdge, Evidence::Overlap { vertex: v });
            }
            let z = Color(zi as u8);
            if pos > 0 && c.color(p[pos - 1], v) != z {
                return report(Verdict::BadEdge, Evidence::BadEdge { path: z, pos, u: p[pos - 1], v });
            }
        }
    }
    let up_to = levels.last().map_or(0, |l| l.s_j);
    if let Some(vertex) = (0..=up_to).find(|&x| !seen[x]) {
        return report(Verdict::CoverageGap, Evidence::Uncovered { vertex, up_to });
    }
    report(Verdict::UndecidedAtBound, Evidence::None)
}

/// Classifies each candidate (members of the build or not) by its
/// limit-at-bound paths: a verified trap, an invalid edge or repeat, a
/// vertex up to the deepest settled level left uncovered, or undecided.
pub fn verify_defeat(build: &DiagonalBuild, candidates: &[CandidateDecomposer]) -> DefeatReport {
    let stages = build.stages();
    let window = stages - stages / 4;
    let levels = settled_levels(build, window.min(stages - 1));
    let candidates = candidates.par_iter().map(|cand| judge(build, cand, window, &levels)).collect();
    DefeatReport { stages, window_start: window, candidates }
}

/// `t_j(s)` never decreases from one stage to the next, on every level
/// present at both. Returns the first offending stage and level.
pub fn check_monotone(log: &[StageLog]) -> std::result::Result<(), (usize, usize)> {
    for w in log.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if let Some(j) = a.levels.iter().zip(&b.levels).position(|(x, y)| y.t < x.t) {
            return Err((b.s, j));
        }
    }
    Ok(())
}
