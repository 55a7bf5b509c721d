//! A stable 2-coloring whose path decompositions all compute a (toy)
//! halting set.
//!
//! Stage numbering: stage `s >= 1` here colors the pairs `{x, s}` with
//! `x < s`, after updating markers and default colors. In the streamed
//! convention used elsewhere (stage `σ` colors `{t, σ+1}`) this is stage
//! `σ = s - 1`; the shift keeps every update ahead of the colorings it
//! governs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, StablePresentation, Vertex};
use crate::error::{Error, Result};
use crate::paths::{validate_decomposition, DecompState};

/// One line of a machine file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineEntry {
    pub e: usize,
    pub halts_at: Option<usize>,
}

/// Machine `e` halts on input `e` within `s` steps iff `halts_at[e] <= s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyHaltingOracle {
    halts_at: Vec<Option<usize>>,
}

impl ToyHaltingOracle {
    pub fn new(halts_at: Vec<Option<usize>>) -> Self {
        ToyHaltingOracle { halts_at }
    }

    /// Entries may come in any order but must name each of `0..len` once.
    pub fn from_entries(entries: &[MachineEntry]) -> Result<Self> {
        let mut halts_at = vec![None; entries.len()];
        let mut seen = vec![false; entries.len()];
        for m in entries {
            if m.e >= entries.len() || std::mem::replace(&mut seen[m.e], true) {
                return Err(Error::Malformed(format!("machine indices must be 0..{} without repeats", entries.len())));
            }
            halts_at[m.e] = m.halts_at;
        }
        Ok(ToyHaltingOracle { halts_at })
    }

    pub fn entries(&self) -> Vec<MachineEntry> {
        self.halts_at.iter().enumerate().map(|(e, &halts_at)| MachineEntry { e, halts_at }).collect()
    }

    pub fn len(&self) -> usize {
        self.halts_at.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halts_at.is_empty()
    }

    pub fn halts_at(&self, e: usize) -> Option<usize> {
        self.halts_at[e]
    }

    pub fn halted_by(&self, e: usize, s: usize) -> bool {
        self.halts_at[e].is_some_and(|h| h <= s)
    }

    pub fn halting_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.halts_at[e].is_some()).collect()
    }
}

/// `m_{e,s}` for every stage `0..=S`; stage 0 has no markers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerTable {
    rows: Vec<Vec<Option<usize>>>,
}

impl MarkerTable {
    pub fn stages(&self) -> usize {
        self.rows.len() - 1
    }

    /// `m_{e,s}`; stages past the last one repeat it, since nothing changes
    /// there once the precondition on the stage count holds.
    pub fn at(&self, e: usize, s: usize) -> Option<usize> {
        self.rows[s.min(self.stages())][e]
    }

    pub fn final_markers(&self) -> &[Option<usize>] {
        &self.rows[self.stages()]
    }

    /// The first stage at which marker `e` holds `value`.
    pub fn first_stage_with(&self, e: usize, value: usize) -> Option<usize> {
        self.rows.iter().position(|row| row[e] == Some(value))
    }
}

/// Default colors of `lo..=hi` turned RED at `stage` because `e` halted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub stage: usize,
    pub e: usize,
    pub lo: usize,
    pub hi: usize,
}

/// `[k, 2k+1]` for the final marker `2k+2` of machine `e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectedInterval {
    pub e: usize,
    pub lo: usize,
    pub hi: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaltingBuild {
    pub oracle: ToyHaltingOracle,
    pub markers: MarkerTable,
    pub flips: Vec<Flip>,
    flip_stage: BTreeMap<Vertex, usize>,
}

pub fn halting_coloring_build(oracle: &ToyHaltingOracle, stages: usize) -> Result<HaltingBuild> {
    let need = 2 * oracle.len() + oracle.halts_at.iter().flatten().max().copied().unwrap_or(0) + 2;
    if stages < need {
        return Err(Error::precondition(format!("{stages} stages, need at least {need}")));
    }
    let len = oracle.len();
    let mut markers: Vec<Option<usize>> = vec![None; len];
    let mut rows = vec![markers.clone()];
    let mut flips = Vec::new();
    let mut flip_stage = BTreeMap::new();
    let mut used = 0;
    for s in 1..=stages {
        used = used.max(s);
        if let Some(e) = markers.iter().position(Option::is_none) {
            let k = used + 1;
            markers[e] = Some(2 * k + 2);
            used = 2 * k + 2;
        }
        // Simultaneous halts are handled in increasing e.
        for e in 0..len.min(s) {
            let Some(m) = markers[e] else { continue };
            if oracle.halts_at[e] != Some(s) {
                continue;
            }
            for x in m..=s + 1 {
                flip_stage.entry(x).or_insert(s);
            }
            flips.push(Flip { stage: s, e, lo: m, hi: s + 1 });
            markers[e + 1..].iter_mut().for_each(|m| *m = None);
            used = used.max(s + 1);
        }
        rows.push(markers.clone());
    }
    Ok(HaltingBuild { oracle: oracle.clone(), markers: MarkerTable { rows }, flips, flip_stage })
}

impl HaltingBuild {
    pub fn stages(&self) -> usize {
        self.markers.stages()
    }

    pub fn flip_stage(&self, x: Vertex) -> Option<usize> {
        self.flip_stage.get(&x).copied()
    }

    /// The default color of `x` when stage `s` colors its pairs.
    pub fn default_at(&self, x: Vertex, s: usize) -> Color {
        match self.flip_stage(x) {
            Some(f) if f <= s => Color::RED,
            _ => Color::BLUE,
        }
    }

    /// Vertices whose default ever turned RED, ascending.
    pub fn flipped(&self) -> Vec<Vertex> {
        self.flip_stage.keys().copied().collect()
    }

    /// The last stage that changed a default color (0 when none did).
    pub fn last_flip_stage(&self) -> usize {
        self.flip_stage.values().copied().max().unwrap_or(0)
    }

    pub fn protected_intervals(&self) -> Vec<ProtectedInterval> {
        self.markers
            .final_markers()
            .iter()
            .enumerate()
            .filter_map(|(e, m)| m.map(|m| ProtectedInterval { e, lo: (m - 2) / 2, hi: m - 1 }))
            .collect()
    }

    /// The built coloring on `[n]`: every pair gets the smaller vertex's
    /// default color at the stage that colors it.
    pub fn coloring(&self, n: usize) -> Result<Coloring> {
        let mut limits = vec![Color::BLUE; n];
        let mut thresholds = vec![0; n];
        let mut exceptions = BTreeMap::new();
        for (&x, &f) in self.flip_stage.range(..n) {
            limits[x] = Color::RED;
            thresholds[x] = f.min(n);
            for y in x + 1..f.min(n) {
                exceptions.insert((x, y), Color::BLUE);
            }
        }
        Coloring::stable(n, 2, StablePresentation { limits, thresholds, exceptions })
    }

    /// Replays the stages against `c`: each pair `{x, s}` carries the
    /// default of `x` at stage `s`, and defaults only ever go BLUE to RED.
    /// Past the last stage every row is constant by construction of the
    /// presentation, which is checked separately.
    pub fn verify_coloring(&self, c: &Coloring) -> std::result::Result<(), String> {
        let horizon = c.n().min(self.stages() + 2);
        for s in 1..horizon {
            for x in 0..s {
                if c.color(x, s) != self.default_at(x, s) {
                    return Err(format!("pair {{{x}, {s}}} disagrees with the default of {x}"));
                }
            }
        }
        let p = c.stable_presentation().ok_or("not stable presented")?;
        if let Some(x) = (0..c.n()).find(|&x| p.thresholds[x] > self.stages() + 1) {
            return Err(format!("row {x} settles only after the last stage"));
        }
        if let Some(x) = (0..c.n()).find(|&x| p.limits[x] != self.default_at(x, self.stages())) {
            return Err(format!("row {x} settles to the wrong color"));
        }
        Ok(())
    }

    /// A universe size large enough for `intended_decomposition` and for
    /// decoding every final marker from its output.
    pub fn recommended_universe(&self) -> usize {
        let top = self.markers.final_markers().iter().flatten().max().copied().unwrap_or(0);
        let base = self.last_flip_stage().max(self.flipped().last().copied().unwrap_or(0)) + 1;
        top.max(base) + 2 * self.flipped().len() + 4
    }
}

/// The decomposition the construction is designed around. BLUE takes the
/// never-flipped vertices in increasing order, except for the connectors.
/// RED visits the flipped vertices in increasing order, with a distinct
/// never-flipped connector above every flip stage between consecutive ones.
pub fn intended_decomposition(build: &HaltingBuild, n: usize) -> Result<DecompState> {
    let flipped: Vec<Vertex> = build.flipped().into_iter().filter(|&x| x < n).collect();
    let base = build.last_flip_stage().max(build.flipped().last().copied().unwrap_or(0)) + 1;
    let needed = flipped.len().saturating_sub(1);
    let required = base + needed;
    if n < required || flipped.len() != build.flipped().len() {
        return Err(Error::Insufficient {
            reason: format!("{} flipped vertices need {needed} connectors above {base}", build.flipped().len()),
            required: required.max(base + 1),
        });
    }
    let connectors: Vec<Vertex> = (base..base + needed).collect();
    let mut red = Vec::with_capacity(flipped.len() + needed);
    for (i, &f) in flipped.iter().enumerate() {
        if i > 0 {
            red.push(connectors[i - 1]);
        }
        red.push(f);
    }
    let blue = (0..n).filter(|&x| build.flip_stage(x).is_none() && !(base..base + needed).contains(&x)).collect();
    let d = DecompState::pair(blue, red);
    let c = build.coloring(n)?;
    validate_decomposition(&c, &d, n).map_err(|f| Error::Anomaly(format!("intended decomposition fails: {f}")))?;
    Ok(d)
}

/// What a decomposition reveals about the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    pub markers: Vec<usize>,
    /// Per machine: the BLUE element that follows everything up to its marker.
    pub probes: Vec<usize>,
    pub membership: Vec<bool>,
}

/// The BLUE element that comes next once every `x <= m` has been seen,
/// enumerating both paths in lockstep (one element of each per step).
fn probe(d: &DecompState, m: usize) -> Option<Vertex> {
    let (blue, red) = (d.blue(), d.red());
    let mut missing = m + 1;
    for i in 0.. {
        if missing == 0 {
            return blue.get(i).copied();
        }
        if i >= blue.len() && i >= red.len() {
            return None;
        }
        missing -= [blue.get(i), red.get(i)].into_iter().flatten().filter(|&&x| x <= m).count();
    }
    unreachable!()
}

/// Recovers every marker and the halting set from a decomposition of the
/// built coloring on `[n]`, where `n` is the number of vertices it places.
/// `m_0 = m_{0,1}`; from `m_e`, with `t_0` the first stage showing it and
/// `t_1` the probe element, `m_{e+1} = m_{e+1, max(t_0, t_1) + 1}`.
pub fn decode(d: &DecompState, build: &HaltingBuild) -> Result<Decoded> {
    let n = d.total_len();
    let c = build.coloring(n)?;
    validate_decomposition(&c, d, n).map_err(|f| Error::precondition(format!("decomposition rejected: {f}")))?;
    let len = build.oracle.len();
    let table = &build.markers;
    let mut out = Decoded { markers: Vec::new(), probes: Vec::new(), membership: Vec::new() };
    let mut m = match table.at(0, 1) {
        Some(m) if len > 0 => m,
        _ => return Ok(out),
    };
    for e in 0..len {
        let t1 = probe(d, m).ok_or_else(|| Error::Insufficient {
            reason: format!("BLUE path ends before passing marker {m} of machine {e}"),
            required: build.recommended_universe().max(2 * n),
        })?;
        out.markers.push(m);
        out.probes.push(t1);
        out.membership.push(build.oracle.halted_by(e, t1));
        if e + 1 < len {
            let t0 = table
                .first_stage_with(e, m)
                .ok_or_else(|| Error::Anomaly(format!("marker value {m} never held by machine {e}")))?;
            m = table
                .at(e + 1, t0.max(t1) + 1)
                .ok_or_else(|| Error::Anomaly(format!("marker of machine {} undefined at decode time", e + 1)))?;
        }
    }
    Ok(out)
}

pub fn decode_markers(d: &DecompState, build: &HaltingBuild) -> Result<Vec<usize>> {
    Ok(decode(d, build)?.markers)
}

pub fn decode_membership(d: &DecompState, build: &HaltingBuild, e: usize) -> Result<bool> {
    if e >= build.oracle.len() {
        return Err(Error::Range { vertex: e, bound: build.oracle.len() });
    }
    Ok(decode(d, build)?.membership[e])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_halting_machines_give_all_blue() {
        let o = ToyHaltingOracle::new(vec![None; 3]);
        let b = halting_coloring_build(&o, 20).unwrap();
        assert!(b.flips.is_empty());
        assert_eq!(b.markers.at(0, 1), Some(6));
        assert_eq!(b.markers.final_markers(), &[Some(6), Some(16), Some(36)]);
        let n = b.recommended_universe();
        let d = intended_decomposition(&b, n).unwrap();
        assert_eq!(d.blue(), (0..n).collect::<Vec<_>>());
        assert!(d.red().is_empty());
        assert_eq!(decode_markers(&d, &b).unwrap(), vec![6, 16, 36]);
    }

    #[test]
    fn single_halt_flips_the_marker_interval() {
        let o = ToyHaltingOracle::new(vec![Some(5)]);
        let b = halting_coloring_build(&o, 20).unwrap();
        assert_eq!(b.flips, vec![Flip { stage: 5, e: 0, lo: 6, hi: 6 }]);
        let c = b.coloring(30).unwrap();
        assert_eq!(b.verify_coloring(&c), Ok(()));
        for y in 7..30 {
            assert_eq!(c.color(6, y), Color::RED);
        }
        let d = intended_decomposition(&b, 30).unwrap();
        assert_eq!(d.red(), &[6]);
        assert!(decode_membership(&d, &b, 0).unwrap());
    }

    #[test]
    fn stage_count_precondition() {
        let o = ToyHaltingOracle::new(vec![Some(9), None]);
        assert!(halting_coloring_build(&o, 14).is_err());
        assert!(halting_coloring_build(&o, 15).is_ok());
    }

    #[test]
    fn probe_runs_in_lockstep() {
        let d = DecompState::pair(vec![0, 2, 5, 7], vec![1, 3, 4, 6]);
        assert_eq!(probe(&d, 3), Some(5));
        assert_eq!(probe(&d, 0), Some(2));
        assert_eq!(probe(&d, 7), None);
    }
}
