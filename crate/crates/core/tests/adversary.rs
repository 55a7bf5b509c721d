use proptest::prelude::*;
use rado_core::adversary::{
    check_monotone, decode, decode_markers, decode_membership, diagonal_build, halting_coloring_build,
    intended_decomposition, verify_defeat, CandidateDecomposer, CandidateKind, Evidence, HaltingBuild,
    ToyHaltingOracle, Verdict,
};
use rado_core::paths::validate_decomposition;
use rado_core::solver::{brute_force_decompose, brute_force_decompose_within, ExactOracle};
use rado_core::{Color, DecompState, Error};

fn eight_machines() -> ToyHaltingOracle {
    ToyHaltingOracle::new(vec![None, Some(3), None, Some(5), None, Some(11), Some(1), None])
}

/// Halts late enough that the marker intervals really flip.
fn late_halts() -> ToyHaltingOracle {
    ToyHaltingOracle::new(vec![None, Some(40), Some(90), None, Some(120)])
}

fn check_round_trip(o: &ToyHaltingOracle, stages: usize) -> HaltingBuild {
    let b = halting_coloring_build(o, stages).unwrap();
    let n = b.recommended_universe();
    let c = b.coloring(n).unwrap();
    assert_eq!(b.verify_coloring(&c), Ok(()));
    for iv in b.protected_intervals() {
        assert!(iv.hi < n);
        for x in iv.lo..=iv.hi {
            assert_eq!(b.flip_stage(x), None, "machine {} interval vertex {x}", iv.e);
        }
    }
    let d = intended_decomposition(&b, n).unwrap();
    assert_eq!(validate_decomposition(&c, &d, n), Ok(()));
    let finals: Vec<usize> = b.markers.final_markers().iter().map(|m| m.unwrap()).collect();
    assert_eq!(decode_markers(&d, &b).unwrap(), finals);
    let dec = decode(&d, &b).unwrap();
    let halting: Vec<usize> = (0..o.len()).filter(|&e| dec.membership[e]).collect();
    assert_eq!(halting, o.halting_set());
    b
}

#[test]
fn halting_round_trip_eight_machines() {
    check_round_trip(&eight_machines(), 200);
}

#[test]
fn halting_round_trip_with_real_flips() {
    let b = check_round_trip(&late_halts(), 200);
    assert!(b.flips.iter().any(|f| f.lo <= f.hi));
    let d = intended_decomposition(&b, b.recommended_universe()).unwrap();
    for e in 0..5 {
        assert_eq!(decode_membership(&d, &b, e).unwrap(), late_halts().halts_at(e).is_some());
    }
}

#[test]
fn intended_decomposition_needs_room_for_connectors() {
    let b = halting_coloring_build(&late_halts(), 200).unwrap();
    let too_small = b.last_flip_stage() + 2;
    match intended_decomposition(&b, too_small) {
        Err(Error::Insufficient { required, .. }) => assert!(intended_decomposition(&b, required).is_ok()),
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn tampered_decomposition_is_rejected_before_decoding() {
    let b = halting_coloring_build(&late_halts(), 200).unwrap();
    let d = intended_decomposition(&b, b.recommended_universe()).unwrap();
    let mut blue = d.blue().to_vec();
    let red = d.red().to_vec();
    // Move a RED vertex onto BLUE in place of its neighbor.
    let f = red[0];
    let pos = blue.iter().position(|&x| x > f).unwrap();
    blue.insert(pos, f);
    let red: Vec<usize> = red[1..].to_vec();
    let tampered = DecompState::pair(blue, red);
    assert!(matches!(decode(&tampered, &b), Err(Error::Precondition(_))));
}

/// No decomposition of a prefix keeps BLUE out of a protected interval.
#[test]
fn interval_forcing_on_prefixes() {
    for o in [eight_machines(), late_halts(), ToyHaltingOracle::new(vec![None; 3])] {
        let b = halting_coloring_build(&o, 200).unwrap();
        let ivs: Vec<_> = b.protected_intervals().into_iter().take(2).collect();
        let n = ivs[1].hi + 2;
        let c = b.coloring(n).unwrap();
        let oracle = ExactOracle::new(&c, 22).unwrap();
        let full = (1u32 << n) - 1;
        for iv in &ivs {
            let mask: u32 = (iv.lo..=iv.hi).map(|x| 1u32 << x).sum();
            assert!(oracle.find(&[full & !mask, full]).is_none(), "interval {iv:?}");
        }
        let d = brute_force_decompose_within(&c, 2, 22).unwrap().expect("2-colorings decompose");
        for iv in &ivs {
            assert!(d.blue().iter().any(|x| (iv.lo..=iv.hi).contains(x)));
        }
    }
}

#[test]
fn diagonal_defeats_reference_candidates() {
    let refs = CandidateDecomposer::reference_set();
    let sets = [vec![refs[0].clone()], vec![refs[1].clone()], vec![refs[2].clone()], vec![refs[0].clone(), refs[1].clone()]];
    for set in sets {
        let b = diagonal_build(&set, 2000).unwrap();
        assert_eq!(check_monotone(&b.log), Ok(()));
        let rep = verify_defeat(&b, &set);
        for c in &rep.candidates {
            assert!(c.was_candidate);
            assert!(c.verdict.is_defeat(), "{} undecided", c.id);
        }
    }
}

#[test]
fn duplicate_candidates_are_both_defeated() {
    let cb = CandidateDecomposer::new("cb", CandidateKind::ConstantBlue);
    let b = diagonal_build(&[cb.clone(), cb.clone()], 300).unwrap();
    for st in &b.log {
        assert_eq!((st.levels[0].candidate, st.levels[0].z), (0, Color::BLUE));
    }
    let rep = verify_defeat(&b, &[cb.clone(), cb]);
    assert!(rep.candidates.iter().all(|c| c.verdict == Verdict::BlueFinite));
}

#[test]
fn an_outside_valid_decomposition_is_not_defeated() {
    let cands = vec![CandidateDecomposer::new("cb", CandidateKind::ConstantBlue)];
    let b = diagonal_build(&cands, 200).unwrap();
    let prefix = b.coloring.restrict(10).unwrap();
    let d = brute_force_decompose(&prefix, 2).unwrap().unwrap();
    let control = CandidateDecomposer::new(
        "hand-built",
        CandidateKind::Explicit { blue: d.blue().to_vec(), red: d.red().to_vec() },
    );
    let rep = verify_defeat(&b, &[control]);
    assert!(!rep.candidates[0].was_candidate);
    assert_eq!(rep.candidates[0].verdict, Verdict::UndecidedAtBound);
    assert_eq!(rep.candidates[0].evidence, Evidence::None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn markers_round_trip_for_random_oracles(halts in proptest::collection::vec(proptest::option::of(1usize..120), 1..7)) {
        let o = ToyHaltingOracle::new(halts);
        check_round_trip(&o, 200);
    }

    #[test]
    fn stability_times_never_drop(seed in any::<u64>(), count in 1usize..4) {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cands: Vec<CandidateDecomposer> = (0..count)
            .map(|i| {
                let mut v: Vec<usize> = (0..40).collect();
                v.shuffle(&mut rng);
                let cut = rng.gen_range(0..40);
                let (blue, red) = (v[..cut].to_vec(), v[cut..].to_vec());
                CandidateDecomposer::new(format!("x{i}"), CandidateKind::Explicit { blue, red })
            })
            .collect();
        let b = diagonal_build(&cands, 200).unwrap();
        prop_assert_eq!(check_monotone(&b.log), Ok(()));
    }
}
