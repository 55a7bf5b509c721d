use std::path::Path;

use rado_core::adversary::{
    check_monotone, decode, diagonal_build, halting_coloring_build, intended_decomposition, verify_defeat,
    CandidateDecomposer, ToyHaltingOracle,
};
use rado_core::coloring::{gen_random, gen_stable_random};
use rado_core::largeness::{
    cofinite_oracle, cohesive_build, cohesive_oracle, exact_finite_oracle, generic_decompose, stable_decompose,
    ultra_decompose, LargenessOracle,
};
use rado_core::limit_sim::{always_switch_construction, cannot_switch_construction, detect_color, uniform_attempt, Verdict};
use rado_core::paths::{
    check_placement_monotone, check_strong_permanence, validate_decomposition, validate_placed,
};
use rado_core::solver::{brute_force_decompose, gg_trace, hunt_counterexamples, HuntMode};
use rado_core::{Color, Coloring, DecompState, Trace, TraceEnd};
use serde_json::json;

use crate::config::RunConfig;
use crate::io::{self, to_value, Inputs};
use crate::{
    AdversaryCommand, Algo, CliError, Command, DecomposeArgs, DiagArgs, GenArgs, GenKind, HaltingArgs, HarnessArgs,
    HuntArgs, HuntModeArg, OracleChoice, SimAlgo, SimulateArgs, VerifyArgs,
};

pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Gen(a) => gen(&a, cfg),
        Command::Decompose(a) => decompose(&a, cfg),
        Command::Verify(a) => verify(&a),
        Command::Hunt(a) => hunt(&a, cfg),
        Command::Simulate(a) => simulate(&a, cfg),
        Command::Adversary(AdversaryCommand::Halting(a)) => halting(&a, cfg),
        Command::Adversary(AdversaryCommand::Diag(a)) => diag(&a, cfg),
        Command::Harness(a) => harness(&a, cfg),
    }
}

fn gen(a: &GenArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let c = match a.kind {
        GenKind::Random => gen_random(a.n, a.r, cfg.seed)?,
        GenKind::Stable => gen_stable_random(a.n, a.r, cfg.seed, a.max_threshold)?,
        GenKind::Constant => Coloring::constant(a.n, a.r, Color(a.color))?,
    };
    io::write_output(&a.out, &c.to_file(), vec![], cfg, &Inputs::new())
}

fn write_state(path: &Path, s: &DecompState, algo: &str, cfg: &RunConfig, inputs: &Inputs) -> Result<(), CliError> {
    io::write_output(path, &s.to_file(), vec![("algo", json!(algo))], cfg, inputs)
}

fn write_trace(path: &Path, t: &Trace, extra: Vec<(&str, serde_json::Value)>, cfg: &RunConfig, inputs: &Inputs) -> Result<(), CliError> {
    io::write_output(path, &t.to_file(), extra, cfg, inputs)
}

fn oracle_for(c: &Coloring, choice: OracleChoice, cfg: &RunConfig) -> Result<LargenessOracle, CliError> {
    Ok(match choice {
        OracleChoice::Cofinite => cofinite_oracle(c)?,
        OracleChoice::Cohesive => {
            let max_pairs = usize::try_from(cfg.enum_budget).unwrap_or(usize::MAX);
            cohesive_oracle(c, &cohesive_build(c, max_pairs), cfg.slack)
        }
        OracleChoice::Majority => exact_finite_oracle(c, (0..c.n()).collect())?,
    })
}

fn report_end(t: &Trace) {
    match &t.end {
        TraceEnd::Complete => println!("complete: {} vertices placed", t.last().total_len()),
        TraceEnd::Truncated { at, reason } => {
            println!("truncated at {at} ({reason}); {} vertices placed", t.last().total_len())
        }
        TraceEnd::CaseFailure { needed } => println!("case failure: no strong switch to {needed}"),
        TraceEnd::Anomaly { vertex } => println!("anomaly: neither extension reached {vertex}"),
    }
}

fn decompose(a: &DecomposeArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mut inputs = Inputs::new();
    let c = io::read_coloring(&a.input, &mut inputs)?;
    if a.algo == Algo::Brute {
        if a.trace.is_some() {
            return Err(CliError::Usage("the exact search produces no trace".into()));
        }
        let d = brute_force_decompose(&c, c.r())?
            .ok_or_else(|| CliError::Failure(format!("no decomposition into {} paths exists", c.r())))?;
        println!("valid decomposition into {} paths", c.r());
        return write_state(&a.out, &d, "brute", cfg, &inputs);
    }
    let (trace, extra) = match a.algo {
        Algo::Gg => (gg_trace(&c)?, vec![]),
        Algo::Ultra => {
            let o = oracle_for(&c, a.oracle, cfg)?;
            let domain = o.domain().len();
            (ultra_decompose(&c, &o)?, vec![("oracle", to_value(o.kind())), ("domain_size", json!(domain))])
        }
        Algo::Stable => {
            let out = stable_decompose(&c, c.r())?;
            println!("prefix {} of {}", out.prefix, c.n());
            (out.trace, vec![("prefix", json!(out.prefix))])
        }
        Algo::Generic => {
            let run = generic_decompose(&c, c.r(), cfg.theta)?;
            let last = run.conditions.last().cloned();
            (run.trace, vec![("final_condition", to_value(&last))])
        }
        Algo::Brute => unreachable!(),
    };
    report_end(&trace);
    let name = format!("{:?}", a.algo).to_lowercase();
    write_state(&a.out, trace.last(), &name, cfg, &inputs)?;
    if let Some(path) = &a.trace {
        write_trace(path, &trace, extra, cfg, &inputs)?;
    }
    Ok(())
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    if a.decomp.is_none() && a.trace.is_none() {
        return Err(CliError::Usage("verify needs --decomp, --trace or both".into()));
    }
    let mut inputs = Inputs::new();
    let c = io::read_coloring(&a.coloring, &mut inputs)?;
    let mut problems = Vec::new();
    if let Some(path) = &a.decomp {
        let d = io::read_decomposition(path, &mut inputs)?;
        match validate_decomposition(&c, &d, c.n()) {
            Ok(()) => println!("decomposition: valid"),
            Err(f) => {
                println!("decomposition: invalid: {f}");
                problems.push(format!("decomposition {f}"));
            }
        }
    }
    if let Some(path) = &a.trace {
        let t = io::read_trace(path, &mut inputs)?;
        let verdict = if let Err(v) = check_strong_permanence(&t) {
            Some(format!(
                "strong switch of {} at step {} undone in state {}",
                v.vertex, v.switch_step, v.broken_at
            ))
        } else if let Err((v, k)) = check_placement_monotone(&t) {
            Some(format!("vertex {v} unplaced in state {k}"))
        } else if let Some((k, f)) = t.states().iter().enumerate().find_map(|(k, s)| validate_placed(&c, s).err().map(|f| (k, f))) {
            Some(format!("state {k}: {f}"))
        } else {
            None
        };
        match verdict {
            None => println!("trace: valid ({} steps)", t.steps().len()),
            Some(why) => {
                println!("trace: invalid: {why}");
                problems.push(format!("trace {why}"));
            }
        }
    }
    match problems.is_empty() {
        true => Ok(()),
        false => Err(CliError::Failure(problems.join("; "))),
    }
}

fn hunt(a: &HuntArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mode = match a.mode {
        HuntModeArg::Exhaustive => HuntMode::Exhaustive,
        HuntModeArg::Random => HuntMode::Random { seed: cfg.seed, trials: a.trials },
    };
    let budget = a.budget.unwrap_or(cfg.enum_budget);
    let rep = cfg.pool()?.install(|| hunt_counterexamples(a.r, a.n, mode, budget))?;
    println!(
        "{} counterexamples among {} colorings (r = {}, n = {}){}",
        rep.counterexamples.len(),
        rep.examined,
        rep.r,
        rep.n,
        if rep.complete { "" } else { "; budget exhausted" }
    );
    if let Some(path) = &a.out {
        let body = json!({
            "v": 1,
            "r": rep.r,
            "n": rep.n,
            "mode": rep.mode,
            "examined": rep.examined,
            "complete": rep.complete,
            "counterexamples": rep.counterexamples.iter().map(|c| to_value(&c.to_file())).collect::<Vec<_>>(),
        });
        io::write_output(path, &body, vec![], cfg, &Inputs::new())?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mut inputs = Inputs::new();
    let c = io::read_coloring(&a.input, &mut inputs)?;
    let (trace, extra) = match a.algo {
        SimAlgo::Always => (always_switch_construction(&c, cfg.budgets())?, vec![]),
        SimAlgo::Frozen => {
            let frozen = Color::from(a.frozen);
            match detect_color(&c, frozen, cfg.budgets())? {
                Verdict::No { witness } => {
                    let t = cannot_switch_construction(&c, &witness, frozen)?;
                    (t, vec![("witness", to_value(&witness))])
                }
                Verdict::Yes => {
                    return Err(CliError::Failure(format!(
                        "every pair can be strongly switched to {frozen}; the frozen construction does not apply"
                    )))
                }
                Verdict::Unknown { pairs_examined } => {
                    return Err(CliError::Failure(format!(
                        "undecided within budgets after {pairs_examined} pairs; raise --pair-len or --depth"
                    )))
                }
            }
        }
        SimAlgo::Uniform => {
            let res = uniform_attempt(&c, cfg.budgets())?;
            println!("outcome: {}", serde_json::to_string(&res.outcome).expect("outcomes serialize"));
            (res.trace, vec![("outcome", to_value(&res.outcome))])
        }
    };
    report_end(&trace);
    if let Some(path) = &a.trace {
        write_trace(path, &trace, extra, cfg, &inputs)?;
    }
    if let Some(path) = &a.out {
        write_state(path, trace.last(), &format!("{:?}", a.algo).to_lowercase(), cfg, &inputs)?;
    }
    Ok(())
}

fn halting(a: &HaltingArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mut inputs = Inputs::new();
    let machines = io::read_machines(&a.machines, &mut inputs)?;
    let oracle = ToyHaltingOracle::from_entries(&machines)?;
    let stages = a.stages.unwrap_or(cfg.halting_stages);
    let b = halting_coloring_build(&oracle, stages)?;
    let n = a.n.unwrap_or(stages + 1);
    let c = b.coloring(n)?;
    b.verify_coloring(&c).map_err(|why| CliError::Failure(format!("built coloring rejected: {why}")))?;
    println!("stable coloring of [{n}] verified; {} flips, {} protected intervals", b.flips.len(), b.protected_intervals().len());
    if let Some(path) = &a.out {
        let extra = vec![
            ("markers", to_value(&b.markers.final_markers())),
            ("flips", to_value(&b.flips)),
            ("protected", to_value(&b.protected_intervals())),
        ];
        io::write_output(path, &c.to_file(), extra, cfg, &inputs)?;
    }
    if a.decode {
        let universe = b.recommended_universe();
        let d = intended_decomposition(&b, universe)?;
        let dec = decode(&d, &b)?;
        let finals: Vec<Option<usize>> = b.markers.final_markers().to_vec();
        let members: Vec<usize> = (0..oracle.len()).filter(|&e| dec.membership[e]).collect();
        println!("decoded over [{universe}]: markers {:?}, halting {:?}", dec.markers, members);
        let markers_ok = finals.iter().zip(&dec.markers).all(|(f, m)| *f == Some(*m));
        if !markers_ok || members != oracle.halting_set() {
            return Err(CliError::Failure(format!(
                "decoding disagrees with the construction: markers {finals:?}, halting set {:?}",
                oracle.halting_set()
            )));
        }
    }
    Ok(())
}

fn diag(a: &DiagArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mut inputs = Inputs::new();
    let cands = match &a.candidates {
        Some(path) => io::read_candidates(path, &mut inputs)?,
        None => CandidateDecomposer::reference_set(),
    };
    let stages = a.stages.unwrap_or(cfg.diag_stages);
    let b = diagonal_build(&cands, stages)?;
    // Staged arrivals may legitimately lower t_j, so only arrival-free runs are held to it.
    let monotone = match check_monotone(&b.log) {
        Ok(()) => json!({ "holds": true }),
        Err((s, j)) => json!({ "holds": false, "stage": s, "level": j }),
    };
    let staged = cands.iter().any(|c| c.arrival > 0);
    let rep = cfg.pool()?.install(|| verify_defeat(&b, &cands));
    for c in &rep.candidates {
        println!("{}: {}", c.id, serde_json::to_string(&c.verdict).expect("verdicts serialize"));
    }
    if let Some(path) = &a.report {
        let extra = vec![("monotone", monotone.clone()), ("staged_arrivals", json!(staged))];
        io::write_output(path, &rep, extra, cfg, &inputs)?;
    }
    if let Some(path) = &a.out {
        io::write_output(path, &b.coloring.to_file(), vec![], cfg, &inputs)?;
    }
    if !staged && monotone["holds"] == json!(false) {
        return Err(CliError::Failure(format!("stability times decreased: {monotone}")));
    }
    Ok(())
}

fn harness(a: &HarnessArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let names: Vec<&str> = match a.suite.as_str() {
        "all" => crate::harness::SUITES.to_vec(),
        name if crate::harness::SUITES.contains(&name) => vec![name],
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite {other:?}; expected one of {} or all",
                crate::harness::SUITES.join(", ")
            )))
        }
    };
    let opts = crate::harness::Options { inject_fault: a.inject_fault };
    let reports: Vec<_> = names.iter().map(|n| crate::harness::run_suite(n, cfg, opts)).collect::<Result<_, _>>()?;
    for r in &reports {
        println!("{}", r.line());
    }
    if let Some(path) = &a.report {
        io::write_output(path, &json!({ "v": 1, "suites": reports }), vec![], cfg, &Inputs::new())?;
    }
    match reports.iter().all(|r| r.pass) {
        true => Ok(()),
        false => Err(CliError::Failure("some suites failed".into())),
    }
}
