use proptest::prelude::*;
use rado_core::coloring::{gen_random, gen_stable_random};
use rado_core::largeness::{
    check_axioms, cofinite_oracle, cohesive_build, cohesive_oracle, exact_finite_oracle, generic_decompose,
    homogeneous_set, stable_decompose, ultra_decompose, VertexSet,
};
use rado_core::paths::validate_placed;
use rado_core::{Color, Coloring, Error, TraceEnd, Vertex};

fn homogeneous(c: &Coloring, set: &[Vertex], color: Color) -> bool {
    set.iter().enumerate().all(|(a, &x)| set[a + 1..].iter().all(|&y| c.color(x, y) == color))
}

fn some_homogeneous_four_set(c: &Coloring) -> bool {
    let n = c.n();
    (0..n).any(|a| {
        (a + 1..n).any(|b| {
            let col = c.color(a, b);
            (b + 1..n).filter(|&x| c.color(a, x) == col && c.color(b, x) == col).any(|x| {
                (x + 1..n).any(|y| c.color(a, y) == col && c.color(b, y) == col && c.color(x, y) == col)
            })
        })
    })
}

#[test]
fn cofinite_axioms_on_random_stable_colorings() {
    for seed in 0..200u64 {
        let r = 2 + (seed % 4) as usize;
        let c = gen_stable_random(60, r, seed, 10).unwrap();
        let o = cofinite_oracle(&c).unwrap();
        let rep = check_axioms(&o, &c).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert_eq!(rep.partitions, 30);
    }
}

#[test]
fn cohesive_oracle_axioms_hold_on_its_domain() {
    let mut covered = 0;
    for seed in 0..30u64 {
        let c = gen_random(256, 2, seed).unwrap();
        let st = cohesive_build(&c, 512);
        let o = cohesive_oracle(&c, &st, None);
        check_axioms(&o, &c).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        covered += o.domain().len();
    }
    assert!(covered > 0);
}

#[test]
fn stable_prefix_reaches_half() {
    for seed in 0..100u64 {
        let r = 2 + (seed % 4) as usize;
        let c = gen_stable_random(60, r, seed, 10).unwrap();
        let out = stable_decompose(&c, r).unwrap();
        assert_eq!(validate_placed(&c, out.trace.last()), Ok(()));
        assert!(out.prefix >= 30, "seed {seed}: {}", out.prefix);
        if out.trace.end == TraceEnd::Complete {
            assert_eq!(out.prefix, 60);
        }
    }
}

/// Either a verified homogeneous set, a flagged partial one, or a genuine
/// failure of the class partition, never anything else.
#[test]
fn homogeneous_sets_from_majority_largeness() {
    let mut complete = 0;
    for seed in 0..60u64 {
        let c = gen_random(30, 2, seed).unwrap();
        assert!(some_homogeneous_four_set(&c));
        let o = exact_finite_oracle(&c, (0..29).collect()).unwrap();
        match homogeneous_set(&c, &o, 4) {
            Ok(h) => {
                assert!(homogeneous(&c, &h.set, h.color), "seed {seed}");
                assert_eq!(h.complete, h.set.len() == 4);
                complete += h.complete as usize;
            }
            Err(Error::OracleViolation(_)) => {
                let mut classes = [VertexSet::new(), VertexSet::new()];
                for &m in o.domain() {
                    classes[o.large_color(&c, m).unwrap().index()].insert(m);
                }
                assert_ne!(classes.iter().filter(|a| o.is_large(a)).count(), 1);
            }
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(complete > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ultra_places_each_domain_vertex_on_its_oracle_color(seed in any::<u64>(), r in 2usize..5) {
        let c = gen_stable_random(40, r, seed, 8).unwrap();
        let o = cofinite_oracle(&c).unwrap();
        let t = ultra_decompose(&c, &o).unwrap();
        prop_assert!(validate_placed(&c, t.last()).is_ok());
        // A step places a non-connector exactly when it adds the least
        // vertex still unplaced; connectors always lie above it.
        let mut placed = vec![false; c.n()];
        for st in t.steps() {
            let least = placed.iter().position(|&p| !p).unwrap();
            if st.added == least {
                prop_assert_eq!(o.large_color(&c, least).unwrap(), st.target());
            } else {
                prop_assert!(st.added > least);
            }
            placed[st.added] = true;
        }
    }

    #[test]
    fn generic_conditions_stay_valid(seed in any::<u64>(), r in 1usize..4, theta_extra in 0usize..4) {
        let c = gen_random(24, r, seed).unwrap();
        let run = generic_decompose(&c, r, r + 1 + theta_extra).unwrap();
        for cond in &run.conditions {
            prop_assert_eq!(cond.check(&c), Ok(()));
        }
        let stop = match run.trace.end { TraceEnd::Truncated { at, .. } => at, _ => c.n() };
        prop_assert!((0..stop).all(|i| run.trace.last().contains(i)));
    }
}
