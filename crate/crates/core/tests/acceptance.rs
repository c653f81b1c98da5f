//! Acceptance suite. Each test implements one release criterion at its
//! stated tolerance and prints a `[PASS]` line; a failed assertion marks
//! the criterion red. Run with `--nocapture` to see the lines.

mod common;

use cockpit_core::executor::{execute_fc, execute_sfc, StatePatch};
use cockpit_core::harness::{oracle_agent, run_session, Mode, Role, SessionConfig};
use cockpit_core::harness::actions::STATE_FENCE;
use cockpit_core::harness::agents::NullAgent;
use cockpit_core::metrics::{
    accuracy, compute_change_sets, error_rate, f1_negative, f1_positive, jsd, rule_based_evaluate,
    Distribution, MetricCounters,
};
use cockpit_core::registry::ApiCall;
use cockpit_core::scenario::{execute_truth, save_record, validate_scenario};
use cockpit_core::state::{
    diff_snapshots, serialize_snapshot, AttrPath, AttributeDescriptor, DeviceState, RenderMode,
    WorldSnapshot,
};
use cockpit_core::value::{AttrValue, TypeTag};
use cockpit_core::world::World;
use common::{load_seeds, random_valid_call, randomized_world, registry, seeded_rng, setter_specs};
use rand::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

#[test]
fn criterion_01_metric_formula_fidelity() {
    let start = Instant::now();

    let positive = MetricCounters {
        tp: 1,
        fp: 0,
        total_should_changed: 2,
        ..Default::default()
    };
    assert!((f1_positive(&positive) - 2.0 / 3.0).abs() <= 1e-12);

    let negative = MetricCounters {
        negative_tp: 1,
        negative_fp: 1,
        total_should_unchanged: 1,
        ..Default::default()
    };
    assert!((f1_negative(&negative) - 2.0 / 3.0).abs() <= 1e-12);

    let acc = MetricCounters {
        n_correct: 1,
        n_total: 2,
        ..Default::default()
    };
    assert!((accuracy(&acc) - 0.5).abs() <= 1e-12);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[PASS] criterion 1: metric formulas reproduce the hand-computed goldens ({elapsed:?})");
}

// --- criterion 2: independent brute-force enumerator -----------------

/// Everything below recomputes the metrics from scratch, sharing no code
/// with the metrics module: straight value comparison over every path.
struct BruteForce {
    f1_positive: f64,
    f1_negative: f64,
    accuracy: f64,
}

fn brute_force_metrics(
    truth_prev: &WorldSnapshot,
    truth_next: &WorldSnapshot,
    model_prev: &WorldSnapshot,
    model_next: &WorldSnapshot,
    trend_scored: &BTreeSet<AttrPath>,
) -> BruteForce {
    let paths: Vec<AttrPath> = truth_prev.paths().into_iter().collect();
    let mut tp = 0.0f64;
    let mut fp = 0.0f64;
    let mut ntp = 0.0f64;
    let mut total_changed = 0.0f64;
    let mut total_unchanged = 0.0f64;
    let mut n_correct = 0.0f64;

    let direction = |a: &AttrValue, b: &AttrValue| -> Option<i8> {
        let (x, y) = (a.as_number()?, b.as_number()?);
        Some(if y > x {
            1
        } else if y < x {
            -1
        } else {
            0
        })
    };

    for path in &paths {
        let tb = truth_prev.value_at(path).unwrap();
        let ta = truth_next.value_at(path).unwrap();
        let mb = model_prev.value_at(path).unwrap();
        let ma = model_next.value_at(path).unwrap();
        let truth_changed = tb != ta;
        let model_changed = mb != ma;
        if truth_changed {
            total_changed += 1.0;
            if model_changed {
                tp += 1.0;
                let correct = if trend_scored.contains(path) {
                    match (direction(tb, ta), direction(mb, ma)) {
                        (Some(t), Some(m)) => t == m,
                        _ => ma == ta,
                    }
                } else {
                    ma == ta
                };
                if correct {
                    n_correct += 1.0;
                }
            }
        } else {
            total_unchanged += 1.0;
            if model_changed {
                fp += 1.0;
            } else {
                ntp += 1.0;
            }
        }
    }

    let precision_pos = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall_pos = if total_changed > 0.0 { tp / total_changed } else { 0.0 };
    let f1_pos = if precision_pos + recall_pos > 0.0 {
        2.0 * precision_pos * recall_pos / (precision_pos + recall_pos)
    } else {
        0.0
    };
    let nfp = fp;
    let precision_neg = if ntp + nfp > 0.0 { ntp / (ntp + nfp) } else { 0.0 };
    let recall_neg = if total_unchanged > 0.0 { ntp / total_unchanged } else { 0.0 };
    let f1_neg = if precision_neg + recall_neg > 0.0 {
        2.0 * precision_neg * recall_neg / (precision_neg + recall_neg)
    } else {
        0.0
    };
    let acc = if total_changed > 0.0 { n_correct / total_changed } else { 0.0 };

    BruteForce {
        f1_positive: f1_pos,
        f1_negative: f1_neg,
        accuracy: acc,
    }
}

/// Tiny snapshot over one toy device with the given attribute values.
fn toy_snapshot(values: &[AttrValue]) -> WorldSnapshot {
    let mut device = DeviceState::new("box");
    for (index, value) in values.iter().enumerate() {
        let tag = value.kind().unwrap_or(TypeTag::String);
        let name = format!("attr_{index}");
        device
            .attributes
            .insert(name.clone(), AttributeDescriptor::new(name, value.clone(), tag, "toy"));
    }
    WorldSnapshot {
        environment: DeviceState::new("environment"),
        devices: BTreeMap::from([("box".to_string(), device)]),
        timestamp_label: String::new(),
    }
}

fn random_toy_value(rng: &mut rand_chacha::ChaCha8Rng) -> AttrValue {
    match rng.random_range(0..4u8) {
        0 => AttrValue::Int(rng.random_range(0..4)),
        1 => AttrValue::Bool(rng.random_bool(0.5)),
        2 => AttrValue::text(["a", "b", "c"][rng.random_range(0..3usize)]),
        _ => AttrValue::Real(rng.random_range(0..40) as f64 / 10.0),
    }
}

#[test]
fn criterion_02_oracle_equivalence_fuzz() {
    let start = Instant::now();
    let mut rng = seeded_rng(2024);
    let mut checked = 0usize;

    while checked < 1000 {
        let width = rng.random_range(1..=6usize);
        let truth_prev: Vec<AttrValue> = (0..width).map(|_| random_toy_value(&mut rng)).collect();
        let mutate = |rng: &mut rand_chacha::ChaCha8Rng, base: &[AttrValue]| -> Vec<AttrValue> {
            base.iter()
                .map(|v| {
                    if rng.random_bool(0.5) {
                        random_toy_value(rng)
                    } else {
                        v.clone()
                    }
                })
                .collect()
        };
        let truth_next = mutate(&mut rng, &truth_prev);
        if truth_next == truth_prev {
            continue; // a valid turn changes at least one attribute
        }
        let model_prev = truth_prev.clone();
        let model_next = mutate(&mut rng, &truth_prev);

        let tp = toy_snapshot(&truth_prev);
        let tn = toy_snapshot(&truth_next);
        let mp = toy_snapshot(&model_prev);
        let mn = toy_snapshot(&model_next);

        let trend_scored: BTreeSet<AttrPath> = (0..width)
            .filter(|_| rng.random_bool(0.3))
            .map(|i| AttrPath::from(format!("box.attr_{i}").as_str()))
            .collect();

        let sets = compute_change_sets(&tp, &tn, &mp, &mn).expect("shared device set");
        let counters = sets.counters(&trend_scored).expect("has changes");
        let brute = brute_force_metrics(&tp, &tn, &mp, &mn, &trend_scored);

        assert_eq!(f1_positive(&counters), brute.f1_positive, "tuple {checked}");
        assert_eq!(f1_negative(&counters), brute.f1_negative, "tuple {checked}");
        assert_eq!(accuracy(&counters), brute.accuracy, "tuple {checked}");
        checked += 1;
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("[PASS] criterion 2: module metrics match the brute-force enumerator on {checked} tuples ({elapsed:?})");
}

#[test]
fn criterion_03_perfect_and_null_fixpoints() {
    let start = Instant::now();
    let registry = registry();
    let seeds = load_seeds(&registry);
    assert!(seeds.len() >= 12);

    for (_, scenario) in &seeds {
        let mut world = World::new(registry.clone());
        let record = execute_truth(scenario, &mut world).expect("seed executes");

        for mode in [Mode::Fc, Mode::Sfc, Mode::Hybrid] {
            let mut oracle = oracle_agent(&record, mode);
            let outcome =
                run_session(&record, &mut oracle, &SessionConfig::new(mode), &registry).unwrap();
            let overall = &outcome.report.overall;
            assert_eq!(
                (overall.accuracy, overall.f1_positive, overall.f1_negative),
                (1.0, 1.0, 1.0),
                "oracle on {} in {mode:?}",
                scenario.id
            );
        }

        let mut null = NullAgent;
        let outcome =
            run_session(&record, &mut null, &SessionConfig::new(Mode::Fc), &registry).unwrap();
        let overall = &outcome.report.overall;
        assert_eq!(
            (overall.f1_positive, overall.f1_negative, overall.accuracy),
            (0.0, 1.0, 0.0),
            "null agent on {}",
            scenario.id
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 3: oracle scores 1.0 and the null agent hits the floor on {} scenarios x 3 modes ({elapsed:?})",
        seeds.len()
    );
}

#[test]
fn criterion_04_call_patch_commutation() {
    let start = Instant::now();
    let registry = registry();
    let specs = setter_specs(&registry);
    let mut rng = seeded_rng(4242);
    let mut successes = 0usize;
    let mut mismatches = 0usize;

    for spec in &specs {
        for _ in 0..6 {
            let base = randomized_world(&mut rng, &registry);
            let call = random_valid_call(&mut rng, spec);

            let mut via_call = base.clone();
            let feedback = execute_fc(&mut via_call, std::slice::from_ref(&call));
            if !feedback.all_succeeded() {
                continue; // preconditions such as an empty call history
            }
            successes += 1;

            let diff = diff_snapshots(&base.snapshot("t"), &via_call.snapshot("t")).unwrap();
            let mut patch = StatePatch::new();
            for (path, (_, after)) in &diff.changed {
                patch.assignments.insert(path.clone(), after.clone());
            }
            let mut via_patch = base.clone();
            let patch_feedback = execute_sfc(&mut via_patch, &patch);
            if !patch_feedback.all_succeeded()
                || via_patch.snapshot("t") != via_call.snapshot("t")
            {
                mismatches += 1;
                eprintln!("commutation mismatch on {}", call.render());
            }
        }
    }

    assert!(successes >= 200, "only {successes} successful cases");
    assert_eq!(mismatches, 0);
    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 4: {} setter APIs, {successes} call/patch pairs, zero mismatches ({elapsed:?})",
        specs.len()
    );
}

#[test]
fn criterion_05_sound_channel_exclusivity() {
    let start = Instant::now();
    let registry = registry();
    let actions: Vec<ApiCall> = vec![
        ApiCall::new("music_playback_play").with_arg("song", "Take Five"),
        ApiCall::new("music_playback_pause"),
        ApiCall::new("navigation_route_start").with_arg("destination", "Shanghai"),
        ApiCall::new("navigation_route_stop"),
        ApiCall::new("radio_playback_switch").with_arg("switch", true),
        ApiCall::new("radio_playback_switch").with_arg("switch", false),
        ApiCall::new("conversation_phone_call").with_arg("contact", "Alice"),
        ApiCall::new("conversation_phone_answer"),
        ApiCall::new("conversation_phone_hangup"),
    ];
    let flags = [
        ("music", AttrPath::from("music.is_playing")),
        ("navigation", AttrPath::from("navigation.is_active")),
        ("radio", AttrPath::from("radio.is_playing")),
        ("conversation", AttrPath::from("conversation.in_call")),
    ];

    let mut rng = seeded_rng(5005);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let mut world = World::new(registry.clone());
        for _ in 0..100 {
            let call = actions.choose(&mut rng).unwrap();
            world.invoke(call);
            world.take_logs();

            let owner = world.environment().channel_owner().map(str::to_string);
            let mut active = 0usize;
            for (device, flag) in &flags {
                if world.value_at(flag) == Some(AttrValue::Bool(true)) {
                    active += 1;
                    if owner.as_deref() != Some(*device) {
                        violations += 1;
                    }
                }
            }
            if active > 1 {
                violations += 1;
            }
        }
    }

    assert_eq!(violations, 0);
    let elapsed = start.elapsed();
    println!("[PASS] criterion 5: 1000 sequences x 100 audio actions, single ownership held ({elapsed:?})");
}

#[test]
fn criterion_06_scenario_determinism_and_replay() {
    let start = Instant::now();
    let registry = registry();
    let seeds = load_seeds(&registry);

    let serialize_record = |record: &cockpit_core::scenario::ScenarioRecord| -> String {
        record
            .truth_states
            .iter()
            .map(|s| serialize_snapshot(s, RenderMode::Full))
            .collect::<Vec<_>>()
            .join("\n")
    };

    let store = tempfile::tempdir().unwrap();
    for (text, scenario) in &seeds {
        let mut world = World::new(registry.clone());
        let report = validate_scenario(scenario, &mut world);
        assert!(report.passed(), "{}: {:?}", scenario.id, report.diagnostics);

        let run = || {
            let mut world = World::new(registry.clone());
            execute_truth(scenario, &mut world).expect("seed executes")
        };
        let first = run();
        let second = run();
        assert_eq!(
            serialize_record(&first),
            serialize_record(&second),
            "{} not deterministic",
            scenario.id
        );

        let dir = store.path().join(&scenario.id);
        save_record(&first, text, &dir).unwrap();
        let drift = cockpit_core::scenario::replay_record(&dir, &registry).unwrap();
        assert!(drift.is_empty(), "{}: {drift:?}", scenario.id);
    }

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 6: {} scenarios execute byte-identically twice and replay with zero drift ({elapsed:?})",
        seeds.len()
    );
}

#[test]
fn criterion_07_rule_vs_state_divergence_and_error_rate() {
    let start = Instant::now();
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "cc_sm_cool_and_close")
        .expect("fixture scenario present");

    let mut world = World::new(registry.clone());
    let record = execute_truth(scenario, &mut world).unwrap();
    let expected = &scenario.turns[0].truth_calls;

    // Reordered but state-equivalent call sequence.
    let produced = vec![expected[1].clone(), expected[0].clone(), expected[2].clone()];
    assert_ne!(expected[0], expected[1], "fixture needs distinct calls");

    // Model trace: execute the reordered sequence on a fresh world.
    let mut model_world = World::new(registry.clone());
    let reordered_scenario = {
        let mut s = scenario.clone();
        s.turns[0].truth_calls = produced.clone();
        s
    };
    let model_record = execute_truth(&reordered_scenario, &mut model_world).unwrap();

    let sets = compute_change_sets(
        &record.truth_states[0],
        &record.truth_states[1],
        &model_record.truth_states[0],
        &model_record.truth_states[1],
    )
    .unwrap();
    let counters = sets.counters(&scenario.turns[0].trend_scored).unwrap();
    assert_eq!(accuracy(&counters), 1.0, "state-based evaluation must accept");
    assert!(
        !rule_based_evaluate(expected, &produced),
        "rule-based evaluation must reject the reordering"
    );

    // Hand-labeled 10-item agreement vector with 3 disagreements.
    let auto = [true, false, true, true, false, true, true, true, false, true];
    let mut expert = auto;
    expert[0] = false;
    expert[4] = true;
    expert[7] = false;
    let rate = error_rate(&auto, &expert).unwrap();
    assert!((rate - 0.30).abs() <= 1e-12);

    let elapsed = start.elapsed();
    println!("[PASS] criterion 7: reordered calls score 1.0 state-based but fail rule-based; error rate 0.30 ({elapsed:?})");
}

#[test]
fn criterion_08_jsd_checks() {
    let start = Instant::now();
    let p = Distribution::new(vec![1.0, 0.0]).unwrap();
    let q = Distribution::new(vec![0.0, 1.0]).unwrap();
    assert_eq!(jsd(&p, &p).unwrap(), 0.0);
    assert!((jsd(&p, &q).unwrap() - std::f64::consts::LN_2).abs() <= 1e-9);

    let mut rng = seeded_rng(8080);
    for _ in 0..1000 {
        let width = rng.random_range(2..=8usize);
        let raw: Vec<f64> = (0..width).map(|_| rng.random_range(0.0..1.0) + 1e-6).collect();
        let sum: f64 = raw.iter().sum();
        let a = Distribution::new(raw.iter().map(|x| x / sum).collect()).unwrap();
        let raw: Vec<f64> = (0..width).map(|_| rng.random_range(0.0..1.0) + 1e-6).collect();
        let sum: f64 = raw.iter().sum();
        let b = Distribution::new(raw.iter().map(|x| x / sum).collect()).unwrap();

        let forward = jsd(&a, &b).unwrap();
        let backward = jsd(&b, &a).unwrap();
        assert!((forward - backward).abs() < 1e-12);
        assert!(forward >= 0.0);
        assert!(forward <= std::f64::consts::LN_2 + 1e-12);
    }

    let elapsed = start.elapsed();
    println!("[PASS] criterion 8: divergence identities, symmetry, and the ln 2 bound hold on 1000 pairs ({elapsed:?})");
}

#[test]
fn criterion_09_distractor_neutrality() {
    let start = Instant::now();
    let registry = registry();
    let seeds = load_seeds(&registry);

    for (_, scenario) in &seeds {
        let mut world = World::new(registry.clone());
        let record = execute_truth(scenario, &mut world).unwrap();

        let mut baseline: Option<String> = None;
        for count in [0usize, 2, 4, 6] {
            let mut oracle = oracle_agent(&record, Mode::Sfc);
            let mut config = SessionConfig::new(Mode::Sfc);
            config.distractor_count = count;
            let outcome = run_session(&record, &mut oracle, &config, &registry).unwrap();
            let report = outcome.report.to_json();
            match &baseline {
                None => baseline = Some(report),
                Some(expected) => {
                    assert_eq!(expected, &report, "{} with {count} distractors", scenario.id)
                }
            }

            // Agent-visible snapshot (the selection prompt) grows by
            // exactly `count` device blocks.
            let prompt = outcome
                .transcript
                .log
                .iter()
                .find(|m| m.role == Role::User && m.content.contains(STATE_FENCE))
                .expect("selection prompt");
            let body = prompt
                .content
                .split(STATE_FENCE)
                .nth(1)
                .unwrap()
                .split("```")
                .next()
                .unwrap();
            let parsed: serde_json::Value = serde_json::from_str(body.trim()).unwrap();
            assert_eq!(
                parsed.as_object().unwrap().len(),
                1 + record.relevant_devices.len() + count,
                "{} with {count} distractors",
                scenario.id
            );
        }
    }

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 9: oracle reports byte-identical across distractor counts 0/2/4/6 on {} scenarios ({elapsed:?})",
        seeds.len()
    );
}
