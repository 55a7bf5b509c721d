//! Finite decomposition algorithms: the inductive 2-color algorithm, an
//! exact oracle, and a counterexample hunter for more colors.
//!
//! The exact oracle does not backtrack over insertion orders. For each color
//! it tabulates, over all vertex subsets, which vertices can end a
//! Hamiltonian path of that color on the subset. A decomposition is then a
//! partition of the universe into one such subset per color (empty allowed),
//! found by a memoized submask search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{coloring_count, gen_random, nth_coloring, Coloring, Vertex};
use crate::error::{Error, Result};
use crate::paths::{insert_vertex, DecompState, Trace};

/// The inductive algorithm: insert `0, 1, ..., n-1` in turn.
pub fn gg_decompose(c: &Coloring) -> Result<DecompState> {
    Ok(gg_trace(c)?.last().clone())
}

/// Same as [`gg_decompose`], keeping every intermediate state.
pub fn gg_trace(c: &Coloring) -> Result<Trace> {
    if c.r() != 2 {
        return Err(Error::domain(format!("the inductive algorithm needs r = 2, got r = {}", c.r())));
    }
    let mut t = Trace::new(DecompState::empty(2));
    for v in 0..c.n() {
        let (_, step) = insert_vertex(c, t.last(), v)?;
        t.push(step)?;
    }
    Ok(t)
}

/// Largest universe the exact oracle accepts by default.
pub const DEFAULT_BRUTE_MAX_N: usize = 12;

/// Hard ceiling on the exact oracle: tables have `r * 2^n` entries.
pub const BRUTE_HARD_MAX_N: usize = 22;

/// Per-color subset tables for one coloring.
pub struct ExactOracle<'a> {
    c: &'a Coloring,
    n: usize,
    /// `ends[j][mask]`: vertices that end some color-`j` path spanning `mask`.
    ends: Vec<Vec<u32>>,
    /// `adj[j][v]`: color-`j` neighbors of `v`.
    adj: Vec<Vec<u32>>,
}

impl<'a> ExactOracle<'a> {
    pub fn new(c: &'a Coloring, max_n: usize) -> Result<Self> {
        let n = c.n();
        let cap = max_n.min(BRUTE_HARD_MAX_N);
        if n > cap {
            return Err(Error::Budget {
                what: "exact decomposition search (universe size)".into(),
                needed: n as u128,
                budget: cap as u128,
            });
        }
        let r = c.r();
        let mut adj = vec![vec![0u32; n]; r];
        for y in 1..n {
            for x in 0..y {
                let j = c.color(x, y).index();
                adj[j][x] |= 1 << y;
                adj[j][y] |= 1 << x;
            }
        }
        let ends = adj.iter().map(|a| path_ends(n, a)).collect();
        Ok(ExactOracle { c, n, ends, adj })
    }

    /// Whether the vertices of `mask` can be ordered as a color-`j` path.
    pub fn spans(&self, j: usize, mask: u32) -> bool {
        mask == 0 || self.ends[j][mask as usize] != 0
    }

    /// Some decomposition whose color-`j` path lies inside `allowed[j]`.
    pub fn find(&self, allowed: &[u32]) -> Option<DecompState> {
        let r = self.c.r();
        let full = (1u32 << self.n) - 1;
        let mut failed: Vec<Vec<bool>> = (0..r).map(|_| Vec::new()).collect();
        let mut parts = vec![0u32; r];
        if !self.cover(0, full, allowed, &mut failed, &mut parts) {
            return None;
        }
        let lists = parts.iter().enumerate().map(|(j, &m)| self.order(j, m)).collect();
        Some(DecompState::from_lists(lists))
    }

    fn cover(&self, j: usize, rem: u32, allowed: &[u32], failed: &mut [Vec<bool>], parts: &mut [u32]) -> bool {
        let r = parts.len();
        if j + 1 == r {
            parts[j] = rem;
            return rem & !allowed[j] == 0 && self.spans(j, rem);
        }
        if failed[j].is_empty() {
            failed[j] = vec![false; 1usize << self.n];
        }
        if failed[j][rem as usize] {
            return false;
        }
        // Largest pieces first: dense colors tend to take long paths.
        let mut sub = rem & allowed[j];
        loop {
            if self.spans(j, sub) {
                parts[j] = sub;
                if self.cover(j + 1, rem & !sub, allowed, failed, parts) {
                    return true;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rem & allowed[j];
        }
        failed[j][rem as usize] = true;
        false
    }

    /// A color-`j` ordering of `mask`; only called when one exists.
    fn order(&self, j: usize, mask: u32) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(mask.count_ones() as usize);
        if mask == 0 {
            return out;
        }
        let mut m = mask;
        let mut v = self.ends[j][m as usize].trailing_zeros();
        loop {
            out.push(v as usize);
            m &= !(1 << v);
            if m == 0 {
                break;
            }
            let cands = self.ends[j][m as usize] & self.adj[j][v as usize];
            v = cands.trailing_zeros();
        }
        out.reverse();
        out
    }
}

fn path_ends(n: usize, adj: &[u32]) -> Vec<u32> {
    let mut ends = vec![0u32; 1usize << n];
    for v in 0..n {
        ends[1 << v] = 1 << v;
    }
    for mask in 1..(1usize << n) {
        let mut e = ends[mask];
        while e != 0 {
            let v = e.trailing_zeros() as usize;
            e &= e - 1;
            let mut ext = adj[v] & !(mask as u32);
            while ext != 0 {
                let w = ext.trailing_zeros() as usize;
                ext &= ext - 1;
                ends[mask | (1 << w)] |= 1 << w;
            }
        }
    }
    ends
}

/// Exact decomposition search. `None` means no decomposition exists.
pub fn brute_force_decompose(c: &Coloring, r: usize) -> Result<Option<DecompState>> {
    brute_force_decompose_within(c, r, DEFAULT_BRUTE_MAX_N)
}

pub fn brute_force_decompose_within(c: &Coloring, r: usize, max_n: usize) -> Result<Option<DecompState>> {
    if r != c.r() {
        return Err(Error::domain(format!("coloring has {} colors, asked for {r}", c.r())));
    }
    let oracle = ExactOracle::new(c, max_n)?;
    Ok(oracle.find(&vec![u32::MAX; r]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum HuntMode {
    Exhaustive,
    Random { seed: u64, trials: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuntReport {
    pub n: usize,
    pub r: usize,
    pub examined: u64,
    pub counterexamples: Vec<Coloring>,
    pub mode: HuntMode,
    /// False when the budget cut the search short.
    pub complete: bool,
}

/// Seed of the `i`-th random trial.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Searches for `r`-colorings of `[n]` without a decomposition, examining at
/// most `budget` colorings. Every reported hit is re-verified on a fresh
/// oracle before it is emitted.
pub fn hunt_counterexamples(r: usize, n: usize, mode: HuntMode, budget: u64) -> Result<HuntReport> {
    if r < 2 {
        return Err(Error::domain("hunting needs at least two colors"));
    }
    if n < 2 {
        return Err(Error::domain("hunting needs n >= 2"));
    }
    if n > DEFAULT_BRUTE_MAX_N {
        return Err(Error::Budget {
            what: "hunt universe size".into(),
            needed: n as u128,
            budget: DEFAULT_BRUTE_MAX_N as u128,
        });
    }
    let wanted: u128 = match mode {
        HuntMode::Exhaustive => coloring_count(n, r).unwrap_or(u128::MAX),
        HuntMode::Random { trials, .. } => trials as u128,
    };
    let examined = wanted.min(budget as u128) as u64;
    let make = |i: u64| match mode {
        HuntMode::Exhaustive => nth_coloring(n, r, i as u128),
        HuntMode::Random { seed, .. } => gen_random(n, r, trial_seed(seed, i)).expect("n >= 2 checked above"),
    };
    let mut hits: Vec<(u64, Coloring)> = (0..examined)
        .into_par_iter()
        .filter_map(|i| {
            let c = make(i);
            let found = ExactOracle::new(&c, DEFAULT_BRUTE_MAX_N).ok()?.find(&vec![u32::MAX; r]);
            found.is_none().then_some((i, c))
        })
        .collect();
    hits.sort_by_key(|(i, _)| *i);
    let mut counterexamples = Vec::with_capacity(hits.len());
    for (_, c) in hits {
        if brute_force_decompose(&c, r)?.is_none() {
            counterexamples.push(c);
        }
    }
    Ok(HuntReport { n, r, examined, counterexamples, mode, complete: examined as u128 == wanted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{enumerate_all, Color};
    use crate::paths::validate_decomposition;
    use proptest::prelude::*;

    /// Independent check: try every assignment of vertices to colors and
    /// every ordering of each class.
    fn naive_exists(c: &Coloring) -> bool {
        fn perm_ok(c: &Coloring, color: Color, vs: &mut Vec<Vertex>, k: usize) -> bool {
            if k == vs.len() {
                return vs.windows(2).all(|w| c.color(w[0], w[1]) == color);
            }
            for i in k..vs.len() {
                vs.swap(k, i);
                if perm_ok(c, color, vs, k + 1) {
                    return true;
                }
                vs.swap(k, i);
            }
            false
        }
        let (n, r) = (c.n(), c.r());
        let total = r.pow(n as u32);
        (0..total).any(|mut code| {
            let mut classes = vec![Vec::new(); r];
            for v in 0..n {
                classes[code % r].push(v);
                code /= r;
            }
            classes.iter_mut().enumerate().all(|(j, vs)| perm_ok(c, Color(j as u8), vs, 0))
        })
    }

    #[test]
    fn gg_examples() {
        // The singleton rule fires before any append when one path is empty.
        let c = Coloring::constant(2, 2, Color::BLUE).unwrap();
        let s = gg_decompose(&c).unwrap();
        assert_eq!(s, DecompState::pair(vec![0], vec![1]));
        assert_eq!(validate_decomposition(&c, &s, 2), Ok(()));
        let c = Coloring::from_triangle(3, 2, vec![0, 1, 0]).unwrap();
        let s = gg_decompose(&c).unwrap();
        assert_eq!(s, DecompState::pair(vec![0, 1, 2], vec![]));
        assert!(brute_force_decompose(&c, 2).unwrap().is_some());
        let red = Coloring::constant(4, 2, Color::RED).unwrap();
        let s = gg_decompose(&red).unwrap();
        assert_eq!(validate_decomposition(&red, &s, 4), Ok(()));
        assert!(s.blue().len() <= 1);
        assert!(matches!(gg_decompose(&Coloring::constant(3, 3, Color(0)).unwrap()), Err(Error::Domain(_))));
    }

    #[test]
    fn brute_force_examples() {
        let c = Coloring::constant(5, 1, Color(0)).unwrap();
        let s = brute_force_decompose(&c, 1).unwrap().unwrap();
        assert_eq!(validate_decomposition(&c, &s, 5), Ok(()));
        assert_eq!(s.paths()[0].len(), 5);
        let c = Coloring::from_triangle(3, 3, vec![0, 1, 2]).unwrap();
        let s = brute_force_decompose(&c, 3).unwrap().unwrap();
        assert_eq!(validate_decomposition(&c, &s, 3), Ok(()));
        let big = Coloring::constant(13, 2, Color::RED).unwrap();
        assert!(matches!(brute_force_decompose(&big, 2), Err(Error::Budget { .. })));
        assert!(brute_force_decompose_within(&big, 2, 13).unwrap().is_some());
    }

    #[test]
    fn exact_oracle_agrees_with_naive_search_r3_n4() {
        for c in enumerate_all(4, 3, 1 << 20).unwrap() {
            let found = brute_force_decompose(&c, 3).unwrap();
            assert_eq!(found.is_some(), naive_exists(&c));
            if let Some(s) = found {
                assert_eq!(validate_decomposition(&c, &s, 4), Ok(()));
            }
        }
    }

    #[test]
    fn constrained_search_respects_allowed_sets() {
        let c = Coloring::constant(4, 2, Color::BLUE).unwrap();
        let oracle = ExactOracle::new(&c, 12).unwrap();
        // BLUE may not use vertex 3, so 3 sits alone on RED.
        let s = oracle.find(&[0b0111, u32::MAX]).unwrap();
        assert_eq!(s.red(), &[3]);
        // Neither color may use 3.
        assert!(oracle.find(&[0b0111, 0b0111]).is_none());
    }

    #[test]
    fn hunt_small_cases_are_empty() {
        let rep = hunt_counterexamples(2, 5, HuntMode::Exhaustive, u64::MAX).unwrap();
        assert_eq!((rep.examined, rep.complete), (1024, true));
        assert!(rep.counterexamples.is_empty());
        let rep = hunt_counterexamples(3, 3, HuntMode::Exhaustive, u64::MAX).unwrap();
        assert_eq!(rep.examined, 27);
        assert!(rep.counterexamples.is_empty());
        let rep = hunt_counterexamples(3, 5, HuntMode::Random { seed: 7, trials: 50 }, 20).unwrap();
        assert_eq!((rep.examined, rep.complete), (20, false));
    }

    proptest! {
        #[test]
        fn gg_valid_and_deterministic(seed in any::<u64>(), n in 2usize..40) {
            let c = gen_random(n, 2, seed).unwrap();
            let s = gg_decompose(&c).unwrap();
            prop_assert_eq!(validate_decomposition(&c, &s, n), Ok(()));
            prop_assert_eq!(gg_decompose(&c).unwrap(), s);
        }

        #[test]
        fn exact_oracle_matches_naive(seed in any::<u64>(), n in 2usize..7, r in 2usize..4) {
            let c = gen_random(n, r, seed).unwrap();
            let found = brute_force_decompose(&c, r).unwrap();
            prop_assert_eq!(found.is_some(), naive_exists(&c));
            if let Some(s) = found {
                prop_assert_eq!(validate_decomposition(&c, &s, n), Ok(()));
            }
        }
    }
}
