//! Acceptance suite: one test per top-level engine guarantee. Each test
//! prints its own PASS line (visible with `--nocapture`); the harness line
//! per test doubles as the machine-readable verdict.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlproc::catalog::{self, FIXTURES};
use mlproc::conformance::{check_trace, parse_trace, serialize_trace, Trace};
use mlproc::dsl::{parse_model, print_model};
use mlproc::ltl::{eval, eval_via_progression, parse_formula, Formula, Pred};
use mlproc::model::{
    ActivityKind, ArtifactKind, Association, Element, ElementId, Phase, ProcessModel,
};
use mlproc::search::{enumerate, reach};
use mlproc::semantics::{
    check_step, initial_state, successors, ElementState, InstanceState, RuleCode,
};
use mlproc::simulate::{simulate, SimulationPolicy};
use mlproc::validate::validate;

fn fixture(name: &str) -> &'static str {
    FIXTURES
        .iter()
        .find(|(file, _)| *file == name)
        .map(|(_, content)| *content)
        .unwrap_or_else(|| panic!("no fixture named {name}"))
}

/// build -> binary -> review -> report: the four-element chain used for
/// oracle-equivalence checks.
fn chain() -> ProcessModel {
    let mut m = ProcessModel::new("pipeline");
    m.elements = vec![
        Element::activity(
            "build",
            Phase::Development,
            ActivityKind::AutomatedProcedure,
        ),
        Element::artifact(
            "binary",
            Phase::Development,
            ArtifactKind::FunctionalDescription,
        ),
        Element::activity("review", Phase::Development, ActivityKind::HumanTask),
        Element::artifact("report", Phase::Development, ArtifactKind::LogicalStatement),
    ];
    m.associations = vec![
        Association::produce("build", "binary"),
        Association::require("binary", "review"),
        Association::produce("review", "report"),
    ];
    m
}

/// One activity producing one artifact.
fn pair() -> ProcessModel {
    let mut m = ProcessModel::new("pair");
    m.elements = vec![
        Element::activity("work", Phase::Development, ActivityKind::HumanTask),
        Element::artifact("result", Phase::Development, ArtifactKind::Data),
    ];
    m.associations = vec![Association::produce("work", "result")];
    m
}

/// Every total state assignment over the model's elements (3^|E| states).
fn all_states(model: &ProcessModel) -> Vec<InstanceState> {
    let ids: Vec<ElementId> = model.element_ids().into_iter().collect();
    let mut out = vec![InstanceState::all_inactive()];
    for id in &ids {
        let mut next = Vec::with_capacity(out.len() * 3);
        for state in out {
            for value in ElementState::ALL {
                let mut s = state.clone();
                s.set(id.clone(), value);
                next.push(s);
            }
        }
        out = next;
    }
    out
}

#[test]
fn a1_catalog_fidelity() {
    let model = catalog::ml_dev_process();
    let report = validate(&model);
    assert!(
        report.is_well_formed(),
        "violations: {:?}",
        report.violations
    );
    assert!(report.violations.is_empty());

    let mut activities: Vec<&str> = model.activities().map(|e| e.id.as_str()).collect();
    activities.sort_unstable();
    assert_eq!(
        activities,
        vec![
            "data_selection",
            "hyperparameter_selection",
            "model_definition",
            "monitoring",
            "onboarding",
            "onsite_adaptation",
            "onsite_target_definition",
            "production_target_definition",
            "target_definition",
            "testing",
            "training",
            "use_case_analysis",
            "validation",
        ],
        "the thirteen lifecycle activities, verbatim"
    );
    assert_eq!(model.artifacts().count(), 19);
    assert!(model.contains(&ElementId::new("factory_quality_seal")));
    assert!(model.contains(&ElementId::new("onsite_quality_seal")));
    println!("A1 catalog fidelity: PASS");
}

#[test]
fn a2_formalization_conformance() {
    let model = catalog::ml_dev_process();

    for name in ["happy_path", "feedback_retune"] {
        let trace = parse_trace(fixture(&format!("{name}.trace"))).unwrap();
        let report = check_trace(&model, &trace).unwrap();
        assert!(report.is_conforming(), "{name}: {:?}", report.violations);
    }

    let expectations = [
        ("mutant_r1", RuleCode::R1Init, 0),
        ("mutant_r2", RuleCode::R2Act, 1),
        ("mutant_r3", RuleCode::R3Done, 1),
        ("mutant_r4", RuleCode::R4Reset, 14),
        ("mutant_r5", RuleCode::R5Inv, 13),
        ("mutant_r6", RuleCode::R6Time, 1),
    ];
    for (name, rule, t) in expectations {
        let trace = parse_trace(fixture(&format!("{name}.trace"))).unwrap();
        let report = check_trace(&model, &trace).unwrap();
        assert!(!report.is_conforming(), "{name} must not conform");
        assert_eq!(
            report.rules(),
            vec![rule],
            "{name} triggers exactly one rule code"
        );
        assert_eq!(
            report.first_time_of(rule),
            Some(t),
            "{name} first fires at t={t}"
        );
    }
    println!("A2 formalization conformance: PASS");
}

#[test]
fn a3_lifecycle_properties_hold() {
    let model = catalog::ml_dev_process();
    let happy = parse_trace(fixture("happy_path.trace")).unwrap();
    let prefix = happy.prefix(11); // states t=0..=10

    let adapted = parse_formula("F done(adapted_ml_model)").unwrap();
    assert!(eval(&model, &adapted, &happy).unwrap());
    assert!(!eval(&model, &adapted, &prefix).unwrap());

    let sealed = parse_formula("F[<=100] done(factory_quality_seal)").unwrap();
    assert!(eval(&model, &sealed, &happy).unwrap());
    assert!(!eval(&model, &sealed, &prefix).unwrap());
    println!("A3 lifecycle properties hold: PASS");
}

#[test]
fn a4_oracle_equivalence_on_small_instances() {
    // Exhaustive trace enumeration vs brute force over the step relation.
    // Conformance violations are per-step, so a non-conforming prefix can
    // never extend into a conforming trace — depth-first extension of
    // legal prefixes enumerates exactly the conforming fixed-length traces.
    let model = chain();
    let depth = 3;
    let states = all_states(&model);

    let mut brute: BTreeSet<Vec<InstanceState>> = BTreeSet::new();
    let mut frontier: Vec<Vec<InstanceState>> = vec![vec![initial_state(&model)]];
    for _ in 0..depth {
        let mut next_frontier = Vec::new();
        for path in frontier {
            let cur = path.last().unwrap();
            for cand in &states {
                if check_step(&model, cur, cand).unwrap().is_empty() {
                    let mut extended = path.clone();
                    extended.push(cand.clone());
                    next_frontier.push(extended);
                }
            }
        }
        frontier = next_frontier;
    }
    brute.extend(frontier);

    let enumerated: BTreeSet<Vec<InstanceState>> = enumerate(&model, depth, false)
        .unwrap()
        .map(|t| t.states().to_vec())
        .collect();
    assert_eq!(enumerated.len(), brute.len(), "same trace count");
    assert_eq!(enumerated, brute, "identical trace sets");

    // Successor generation vs brute-force filtering of all 3^|E|
    // candidate states, from every possible source state.
    for model in [pair(), chain()] {
        let states = all_states(&model);
        for s in &states {
            let fast: BTreeSet<InstanceState> = successors(&model, s).unwrap().collect();
            let slow: BTreeSet<InstanceState> = states
                .iter()
                .filter(|cand| check_step(&model, s, cand).unwrap().is_empty())
                .cloned()
                .collect();
            assert_eq!(fast, slow, "successors of {s:?}");
        }
    }
    println!("A4 oracle equivalence on small instances: PASS");
}

fn random_formula(rng: &mut ChaCha8Rng, ids: &[&str], depth: u32) -> Formula {
    if depth == 0 || rng.gen_range(0..10) < 2 {
        return match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            _ => {
                let pred = Pred::ALL[rng.gen_range(0..Pred::ALL.len())];
                let id = ids[rng.gen_range(0..ids.len())];
                Formula::atom(pred, id)
            }
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..10) {
        0 => Formula::not(random_formula(rng, ids, d)),
        1 => Formula::and(random_formula(rng, ids, d), random_formula(rng, ids, d)),
        2 => Formula::or(random_formula(rng, ids, d), random_formula(rng, ids, d)),
        3 => Formula::implies(random_formula(rng, ids, d), random_formula(rng, ids, d)),
        4 => Formula::next(random_formula(rng, ids, d)),
        5 => Formula::eventually(random_formula(rng, ids, d)),
        6 => Formula::always(random_formula(rng, ids, d)),
        7 => Formula::until(random_formula(rng, ids, d), random_formula(rng, ids, d)),
        8 => Formula::bounded_eventually(rng.gen_range(0..=9), random_formula(rng, ids, d)),
        _ => Formula::bounded_always(rng.gen_range(0..=9), random_formula(rng, ids, d)),
    }
}

fn random_trace(rng: &mut ChaCha8Rng, model: &ProcessModel, max_len: usize) -> Trace {
    let len = rng.gen_range(1..=max_len);
    let ids: Vec<ElementId> = model.element_ids().into_iter().collect();
    let states = (0..len)
        .map(|_| {
            let mut s = InstanceState::all_inactive();
            for id in &ids {
                s.set(
                    id.clone(),
                    ElementState::ALL[rng.gen_range(0..ElementState::ALL.len())],
                );
            }
            s
        })
        .collect();
    Trace::new(model.name.clone(), states)
}

#[test]
fn a5_ltl_engine_consistency() {
    let model = chain();
    let ids = ["build", "binary", "review", "report"];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_17F1);

    for round in 0..1200 {
        let f = random_formula(&mut rng, &ids, 4);
        let trace = random_trace(&mut rng, &model, 8);

        // Direct semantics vs progression + finish.
        let direct = eval(&model, &f, &trace).unwrap();
        let progressed = eval_via_progression(&model, &f, &trace).unwrap();
        assert_eq!(direct, progressed, "round {round}: {f} on {trace:?}");

        // Duality: ¬F φ ≡ G ¬φ and ¬G φ ≡ F ¬φ.
        let not_f = eval(
            &model,
            &Formula::not(Formula::eventually(f.clone())),
            &trace,
        )
        .unwrap();
        let g_not = eval(&model, &Formula::always(Formula::not(f.clone())), &trace).unwrap();
        assert_eq!(not_f, g_not, "round {round}: F duality for {f}");
        let not_g = eval(&model, &Formula::not(Formula::always(f.clone())), &trace).unwrap();
        let f_not = eval(
            &model,
            &Formula::eventually(Formula::not(f.clone())),
            &trace,
        )
        .unwrap();
        assert_eq!(not_g, f_not, "round {round}: G duality for {f}");

        // Strong next: ¬X φ ≡ ¬X true ∨ X ¬φ (the first disjunct is "this
        // is the final state").
        let lhs = eval(&model, &Formula::not(Formula::next(f.clone())), &trace).unwrap();
        let rhs = eval(
            &model,
            &Formula::or(
                Formula::not(Formula::next(Formula::True)),
                Formula::next(Formula::not(f.clone())),
            ),
            &trace,
        )
        .unwrap();
        assert_eq!(lhs, rhs, "round {round}: strong-next identity for {f}");

        // Bound collapse: a bound covering the whole trace is no bound.
        let k = trace.len() as u64 + rng.gen_range(0..4);
        let bounded_f = eval(&model, &Formula::bounded_eventually(k, f.clone()), &trace).unwrap();
        let plain_f = eval(&model, &Formula::eventually(f.clone()), &trace).unwrap();
        assert_eq!(
            bounded_f, plain_f,
            "round {round}: F[<={k}] collapse for {f}"
        );
        let bounded_g = eval(&model, &Formula::bounded_always(k, f.clone()), &trace).unwrap();
        let plain_g = eval(&model, &Formula::always(f.clone()), &trace).unwrap();
        assert_eq!(
            bounded_g, plain_g,
            "round {round}: G[<={k}] collapse for {f}"
        );
    }
    println!("A5 LTL engine consistency: PASS (1200 random formula/trace pairs)");
}

#[test]
fn a6_reachability_bounds() {
    let model = catalog::ml_dev_process();
    let goal = parse_formula("done(factory_quality_seal)").unwrap();

    let witness = reach(&model, &goal, 20)
        .unwrap()
        .expect("reachable at depth 20");
    assert_eq!(
        witness.t_end(),
        13,
        "witness takes exactly 13 steps: level 12 to activate, one more to finish"
    );
    let report = check_trace(&model, &witness).unwrap();
    assert!(
        report.is_conforming(),
        "witness conforms: {:?}",
        report.violations
    );
    assert_eq!(
        witness
            .last_state()
            .get(&ElementId::new("factory_quality_seal")),
        ElementState::Done
    );

    assert_eq!(
        reach(&model, &goal, 11).unwrap(),
        None,
        "absent below the bound"
    );
    println!("A6 reachability bounds: PASS");
}

#[test]
fn a7_determinism_and_round_trips() {
    // Fixed-seed simulation is byte-reproducible.
    for model in [catalog::ml_dev_process(), catalog::marl_process()] {
        for seed in [0u64, 0xC0FFEE] {
            let policy = SimulationPolicy::UniformRandom { seed };
            let a = simulate(&model, &policy, 30, None).unwrap();
            let b = simulate(&model, &policy, 30, None).unwrap();
            assert_eq!(
                serialize_trace(&a),
                serialize_trace(&b),
                "seed {seed} reproducible"
            );
        }
    }

    // parse ∘ print is the identity on models; printing is a one-pass
    // fixpoint.
    for model in [
        catalog::ml_dev_process(),
        catalog::marl_process(),
        chain(),
        pair(),
    ] {
        let text = print_model(&model);
        let reparsed = parse_model(&text).unwrap();
        assert_eq!(reparsed, model);
        assert_eq!(print_model(&reparsed), text);
    }

    // parse ∘ serialize is the identity on traces, and serialization is a
    // one-pass fixpoint too.
    for (name, trace) in catalog::example_traces() {
        let text = serialize_trace(&trace);
        let reparsed = parse_trace(&text).unwrap();
        assert_eq!(reparsed, trace, "{name} round-trips");
        assert_eq!(
            serialize_trace(&reparsed),
            text,
            "{name} serialization fixpoint"
        );
    }
    println!("A7 determinism and round-trips: PASS");
}

#[test]
fn a8_simulator_soundness() {
    let models = [catalog::ml_dev_process(), catalog::marl_process()];
    let mut runs = 0;
    for (i, model) in models.iter().enumerate() {
        for round in 0..50u64 {
            let seed = round * 2 + i as u64;
            let steps = 1 + (seed * 7 + 3) % 50;
            let policy = SimulationPolicy::UniformRandom { seed };
            let trace = simulate(model, &policy, steps, None).unwrap();
            assert_eq!(trace.len() as u64, steps + 1);
            let report = check_trace(model, &trace).unwrap();
            assert!(
                report.is_conforming(),
                "{} seed {seed} steps {steps}: {:?}",
                model.name,
                report.violations
            );
            runs += 1;
        }
    }
    assert_eq!(runs, 100);
    println!("A8 simulator soundness: PASS (100 random simulations)");
}
