//! Built-in example processes and recorded instance traces.
//!
//! Two ready-made models ship with the engine: `ml_dev`, an end-to-end ML
//! development process from use-case analysis through production
//! monitoring, and `marl`, a compact multi-agent reinforcement-learning
//! loop. Both validate cleanly. Alongside them come recorded traces — an
//! eager happy path, a feedback/rework scenario per model, and six
//! deliberately corrupted mutants, one per conformance rule code.
//!
//! The same content is embedded as fixture files (model and trace text
//! formats) for the CLI's `init-example` command; tests pin the embedded
//! bytes to the constructors so files and code cannot drift apart.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::conformance::Trace;
use crate::model::{
    ActivityKind, ArtifactKind, Association, Element, ElementId, FeedbackAnnotation, Phase,
    ProcessModel,
};
use crate::semantics::ElementState;
use crate::simulate::{simulate, ScriptedDeltas, SimulationPolicy};

/// The ML development process: 13 activities and 19 artifacts spanning all
/// four phases. Development produces a trained, tested and validated model
/// ending in a factory quality seal; deployment adapts it on-site; the
/// operations phase watches it in production. Feedback loops run from the
/// test verdict back into model definition and hyper-parameter selection,
/// and from the monitoring report back into data selection.
pub fn ml_dev_process() -> ProcessModel {
    use ActivityKind::{AutomatedProcedure as Auto, HumanTask as Human};
    use ArtifactKind::{Data, FunctionalDescription as Functional, LogicalStatement as Logical};
    use Phase::{Deployment, Development, Operations, Planning};

    // (id, display name, phase, kind, requires, produces)
    #[allow(clippy::type_complexity)]
    let activities: &[(&str, &str, Phase, ActivityKind, &[&str], &[&str])] = &[
        (
            "use_case_analysis",
            "Use case analysis",
            Planning,
            Human,
            &[],
            &["development_specification"],
        ),
        (
            "data_selection",
            "Data selection",
            Development,
            Human,
            &["development_specification"],
            &["training_data", "test_data", "validation_data"],
        ),
        (
            "target_definition",
            "Target definition",
            Development,
            Human,
            &["development_specification"],
            &["dev_performance_indicators"],
        ),
        (
            "model_definition",
            "Model definition",
            Development,
            Human,
            &["training_data", "dev_performance_indicators"],
            &["initial_ml_model"],
        ),
        (
            "hyperparameter_selection",
            "Hyper-parameter selection",
            Development,
            Human,
            &["initial_ml_model"],
            &["hyper_parameters"],
        ),
        (
            "training",
            "Training",
            Development,
            Auto,
            &["initial_ml_model", "hyper_parameters", "training_data"],
            &["trained_ml_model"],
        ),
        (
            "testing",
            "Testing",
            Development,
            Auto,
            &[
                "trained_ml_model",
                "dev_performance_indicators",
                "test_data",
            ],
            &["test_verdict"],
        ),
        (
            "validation",
            "Validation",
            Development,
            Human,
            &[
                "trained_ml_model",
                "development_specification",
                "validation_data",
            ],
            &["factory_quality_seal"],
        ),
        (
            "onsite_target_definition",
            "On-site target definition",
            Deployment,
            Human,
            &["on_site_contract", "factory_quality_seal"],
            &["onsite_performance_indicators"],
        ),
        (
            "onsite_adaptation",
            "On-site adaptation",
            Deployment,
            Auto,
            &[
                "trained_ml_model",
                "onsite_performance_indicators",
                "customer_data",
            ],
            &["adapted_ml_model"],
        ),
        (
            "onboarding",
            "Onboarding",
            Deployment,
            Human,
            &["adapted_ml_model", "on_site_contract", "customer_data"],
            &["onsite_quality_seal"],
        ),
        (
            "production_target_definition",
            "Production target definition",
            Operations,
            Human,
            &["sla", "onsite_quality_seal"],
            &["production_performance_indicators"],
        ),
        (
            "monitoring",
            "Monitoring",
            Operations,
            Auto,
            &[
                "adapted_ml_model",
                "production_performance_indicators",
                "production_data",
            ],
            &["monitoring_report"],
        ),
    ];

    let artifacts: &[(&str, Phase, ArtifactKind, bool)] = &[
        ("development_specification", Planning, Logical, false),
        ("training_data", Development, Data, false),
        ("test_data", Development, Data, false),
        ("validation_data", Development, Data, false),
        ("dev_performance_indicators", Development, Logical, false),
        ("initial_ml_model", Development, Functional, false),
        ("hyper_parameters", Development, Logical, false),
        ("trained_ml_model", Development, Functional, false),
        ("test_verdict", Development, Logical, false),
        ("factory_quality_seal", Development, Logical, false),
        ("on_site_contract", Deployment, Logical, true),
        ("customer_data", Deployment, Data, true),
        ("onsite_performance_indicators", Deployment, Logical, false),
        ("adapted_ml_model", Deployment, Functional, false),
        ("onsite_quality_seal", Deployment, Logical, false),
        ("sla", Operations, Logical, true),
        ("production_data", Operations, Data, true),
        (
            "production_performance_indicators",
            Operations,
            Logical,
            false,
        ),
        ("monitoring_report", Operations, Logical, false),
    ];

    let mut m = ProcessModel::new("ml_dev");
    for (id, name, phase, kind, _, _) in activities {
        m.elements
            .push(Element::activity(*id, *phase, *kind).with_name(*name));
    }
    for (id, phase, kind, external) in artifacts {
        m.elements.push(if *external {
            Element::external_artifact(*id, *phase, *kind)
        } else {
            Element::artifact(*id, *phase, *kind)
        });
    }
    for (id, _, _, _, requires, produces) in activities {
        for r in *requires {
            m.associations.push(Association::require(*r, *id));
        }
        for p in *produces {
            m.associations.push(Association::produce(*id, *p));
        }
    }
    m.feedback = vec![
        FeedbackAnnotation::new("test_verdict", "model_definition").with_label("revise model"),
        FeedbackAnnotation::new("test_verdict", "hyperparameter_selection")
            .with_label("retune hyper-parameters"),
        FeedbackAnnotation::new("monitoring_report", "data_selection")
            .with_label("extend data sets"),
    ];
    m
}

/// A multi-agent reinforcement-learning development loop: training target,
/// reward and environment are derived from an externally given
/// specification, agents are trained and the resulting policy evaluated.
/// Three feedback loops run from the evaluation verdict back to the
/// training target, the reward and the environment.
pub fn marl_process() -> ProcessModel {
    use ActivityKind::{AutomatedProcedure as Auto, HumanTask as Human};
    use ArtifactKind::{FunctionalDescription as Functional, LogicalStatement as Logical};
    use Phase::{Development, Planning};

    #[allow(clippy::type_complexity)]
    let activities: &[(&str, ActivityKind, &[&str], &[&str])] = &[
        (
            "define_training_target",
            Human,
            &["development_specification"],
            &["training_target"],
        ),
        (
            "derive_reward",
            Human,
            &["training_target"],
            &["reward_function"],
        ),
        (
            "configure_environment",
            Human,
            &["development_specification"],
            &["environment_simulation"],
        ),
        (
            "train_agents",
            Auto,
            &["reward_function", "environment_simulation"],
            &["policy_model"],
        ),
        (
            "evaluate",
            Human,
            &["policy_model", "training_target"],
            &["evaluation_verdict"],
        ),
    ];
    let artifacts: &[(&str, ArtifactKind)] = &[
        ("training_target", Logical),
        ("reward_function", Functional),
        ("environment_simulation", Functional),
        ("policy_model", Functional),
        ("evaluation_verdict", Logical),
    ];

    let mut m = ProcessModel::new("marl");
    m.elements.push(Element::external_artifact(
        "development_specification",
        Planning,
        Logical,
    ));
    for (id, kind, _, _) in activities {
        m.elements.push(Element::activity(*id, Development, *kind));
    }
    for (id, kind) in artifacts {
        m.elements.push(Element::artifact(*id, Development, *kind));
    }
    for (id, _, requires, produces) in activities {
        for r in *requires {
            m.associations.push(Association::require(*r, *id));
        }
        for p in *produces {
            m.associations.push(Association::produce(*id, *p));
        }
    }
    m.feedback = vec![
        FeedbackAnnotation::new("evaluation_verdict", "derive_reward").with_label("adjust reward"),
        FeedbackAnnotation::new("evaluation_verdict", "define_training_target")
            .with_label("adjust training target"),
        FeedbackAnnotation::new("evaluation_verdict", "configure_environment")
            .with_label("adjust environment"),
    ];
    m
}

/// The rework set for `feedback_retune`, reset in one synchronized step at
/// t=14: hyper-parameters are retuned, so training and everything built on
/// the old trained model is redone. A backward move is only legal when
/// every dependent leaves Done in the same step, so the set is closed
/// downstream — resetting trained_ml_model drags testing, validation and
/// their verdicts along, and resetting factory_quality_seal drags
/// onsite_target_definition. onsite_performance_indicators has not started
/// yet at t=14; it is pinned Inactive so the reset step does not start it.
const RETUNE_RESET: [&str; 9] = [
    "hyper_parameters",
    "training",
    "trained_ml_model",
    "test_verdict",
    "testing",
    "validation",
    "factory_quality_seal",
    "onsite_target_definition",
    "onsite_performance_indicators",
];

/// The rework set for `marl_feedback`, reset at t=11 after the first
/// evaluation verdict: target, reward and environment artifacts are
/// re-produced (their defining activities stay Done), which drags the
/// downstream training and evaluation work along.
const MARL_RESET: [&str; 8] = [
    "training_target",
    "reward_function",
    "environment_simulation",
    "derive_reward",
    "train_agents",
    "policy_model",
    "evaluate",
    "evaluation_verdict",
];

/// Copy of `trace` with `id` forced to `state` over the given state-vector
/// positions (equal to time indexes for traces starting at t=0).
fn patched(
    trace: &Trace,
    positions: RangeInclusive<usize>,
    id: &str,
    state: ElementState,
) -> Trace {
    let mut states = trace.states().to_vec();
    for pos in positions {
        states[pos].set(ElementId::new(id), state);
    }
    Trace::new(trace.model_name.clone(), states)
}

/// All shipped example traces, keyed by fixture name.
///
/// - `happy_path`: eager run of `ml_dev` for 20 steps (conforming).
/// - `feedback_retune`: happy path until the test verdict is done, then a
///   synchronized reset of the hyper-parameter/training pipeline followed
///   by its re-execution (conforming).
/// - `mutant_r1` … `mutant_r6`: the happy path corrupted so that exactly
///   one conformance rule fires, at a known time.
/// - `marl_feedback`: eager run of `marl` with one full rework loop after
///   the first evaluation verdict (conforming).
pub fn example_traces() -> BTreeMap<String, Trace> {
    let ml_dev = ml_dev_process();
    let marl = marl_process();
    let eager = SimulationPolicy::Eager { dwell: 1 };

    let happy = simulate(&ml_dev, &eager, 20, None).expect("eager run is legal");

    let mut retune_script = ScriptedDeltas::new();
    for id in RETUNE_RESET {
        retune_script.set(14, id, ElementState::Inactive);
    }
    let retune = simulate(&ml_dev, &eager, 20, Some(&retune_script))
        .expect("synchronized reset keeps every step legal");

    // use_case_analysis already active at t=0: breaks only the
    // all-inactive start (R1).
    let mutant_r1 = patched(&happy, 0..=0, "use_case_analysis", ElementState::Active);
    // development_specification activates one step early, before its
    // producer has started (R2); by t=1 the producer is active, so the
    // support invariant still holds.
    let mutant_r2 = patched(
        &happy,
        1..=1,
        "development_specification",
        ElementState::Active,
    );
    // development_specification jumps straight from inactive to done (R3);
    // done elements need no support, so nothing else fires.
    let mutant_r3 = patched(
        &happy,
        1..=2,
        "development_specification",
        ElementState::Done,
    );
    // hyper_parameters is wiped after the run while training stays done:
    // an unsynchronized reset (R4).
    let mutant_r4 = patched(&happy, 14..=20, "hyper_parameters", ElementState::Inactive);
    // testing is wiped while its verdict stays active: the verdict keeps
    // running without support (R5). The reset itself is legal because the
    // verdict leaves Done in the same step.
    let mutant_r5 = patched(
        &patched(&happy, 13..=20, "testing", ElementState::Inactive),
        13..=20,
        "test_verdict",
        ElementState::Active,
    );
    // The happy path shifted to start at t=1 (R6).
    let mutant_r6 = Trace::with_start(happy.model_name.clone(), 1, happy.states().to_vec());

    let mut marl_script = ScriptedDeltas::new();
    for id in MARL_RESET {
        marl_script.set(11, id, ElementState::Inactive);
    }
    let marl_feedback =
        simulate(&marl, &eager, 19, Some(&marl_script)).expect("synchronized reset is legal");

    BTreeMap::from([
        ("happy_path".to_string(), happy),
        ("feedback_retune".to_string(), retune),
        ("mutant_r1".to_string(), mutant_r1),
        ("mutant_r2".to_string(), mutant_r2),
        ("mutant_r3".to_string(), mutant_r3),
        ("mutant_r4".to_string(), mutant_r4),
        ("mutant_r5".to_string(), mutant_r5),
        ("mutant_r6".to_string(), mutant_r6),
        ("marl_feedback".to_string(), marl_feedback),
    ])
}

/// Embedded fixture files as `(file name, contents)`: the canonical print
/// of both catalog models plus every example trace. Regenerate with
/// `cargo run --example gen_fixtures` after changing the constructors;
/// tests assert byte equality between files and constructors.
pub const FIXTURES: [(&str, &str); 11] = [
    ("ml_dev.proc", include_str!("../fixtures/ml_dev.proc")),
    ("marl.proc", include_str!("../fixtures/marl.proc")),
    (
        "happy_path.trace",
        include_str!("../fixtures/happy_path.trace"),
    ),
    (
        "feedback_retune.trace",
        include_str!("../fixtures/feedback_retune.trace"),
    ),
    (
        "mutant_r1.trace",
        include_str!("../fixtures/mutant_r1.trace"),
    ),
    (
        "mutant_r2.trace",
        include_str!("../fixtures/mutant_r2.trace"),
    ),
    (
        "mutant_r3.trace",
        include_str!("../fixtures/mutant_r3.trace"),
    ),
    (
        "mutant_r4.trace",
        include_str!("../fixtures/mutant_r4.trace"),
    ),
    (
        "mutant_r5.trace",
        include_str!("../fixtures/mutant_r5.trace"),
    ),
    (
        "mutant_r6.trace",
        include_str!("../fixtures/mutant_r6.trace"),
    ),
    (
        "marl_feedback.trace",
        include_str!("../fixtures/marl_feedback.trace"),
    ),
];

/// Fixture bundle for a named example: the model file plus the traces
/// recorded against it, ready to be written into a working directory.
/// Known names: `ml_dev`, `marl`.
pub fn example_files(example: &str) -> Option<Vec<(&'static str, &'static str)>> {
    let names: &[&str] = match example {
        "ml_dev" => &[
            "ml_dev.proc",
            "happy_path.trace",
            "feedback_retune.trace",
            "mutant_r1.trace",
            "mutant_r2.trace",
            "mutant_r3.trace",
            "mutant_r4.trace",
            "mutant_r5.trace",
            "mutant_r6.trace",
        ],
        "marl" => &["marl.proc", "marl_feedback.trace"],
        _ => return None,
    };
    Some(
        names
            .iter()
            .map(|n| {
                *FIXTURES
                    .iter()
                    .find(|(file, _)| file == n)
                    .expect("example listings only name embedded fixtures")
            })
            .collect(),
    )
}
