//! End-to-end session tests over the seed corpus: oracle and null
//! agents across all three execution modes, context management bounds,
//! reflection budgets, and distractor behavior.

mod common;

use cockpit_core::harness::actions::STATE_FENCE;
use cockpit_core::harness::agents::{NullAgent, ScriptedAgent};
use cockpit_core::harness::{
    inject_distractors, oracle_agent, run_session, Mode, SessionConfig, Strategy,
};
use cockpit_core::scenario::execute_truth;
use cockpit_core::world::World;
use common::{load_seeds, registry, truth_record};

#[test]
fn oracle_scores_perfectly_in_all_modes() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    for (_, scenario) in &seeds {
        let record = truth_record(scenario, &registry);
        for mode in [Mode::Fc, Mode::Sfc, Mode::Hybrid] {
            let mut agent = oracle_agent(&record, mode);
            let config = SessionConfig::new(mode);
            let outcome = run_session(&record, &mut agent, &config, &registry)
                .unwrap_or_else(|e| panic!("{} [{:?}]: {e}", scenario.id, mode));
            let report = &outcome.report;
            assert_eq!(
                (report.overall.f1_positive, report.overall.f1_negative, report.overall.accuracy),
                (1.0, 1.0, 1.0),
                "{} in {mode:?}: {report:?}",
                scenario.id
            );
            for turn in &outcome.transcript.turn_outcomes {
                assert!(turn.completed, "{} turn {} incomplete", scenario.id, turn.turn);
            }
        }
    }
}

#[test]
fn null_agent_hits_the_floor() {
    let registry = registry();
    for (_, scenario) in load_seeds(&registry) {
        let record = truth_record(&scenario, &registry);
        let mut agent = NullAgent;
        let config = SessionConfig::new(Mode::Fc);
        let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
        let report = &outcome.report;
        assert_eq!(report.overall.f1_positive, 0.0, "{}", scenario.id);
        assert_eq!(report.overall.f1_negative, 1.0, "{}", scenario.id);
        assert_eq!(report.overall.accuracy, 0.0, "{}", scenario.id);
    }
}

#[test]
fn oracle_sessions_are_deterministic() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);
    let run = |mode: Mode| {
        let mut agent = oracle_agent(&record, mode);
        let outcome = run_session(&record, &mut agent, &SessionConfig::new(mode), &registry).unwrap();
        (
            outcome.transcript.to_text(),
            outcome.report.to_json(),
        )
    };
    for mode in [Mode::Fc, Mode::Sfc, Mode::Hybrid] {
        assert_eq!(run(mode), run(mode));
    }
}

#[test]
fn context_keeps_at_most_one_state_block() {
    let registry = registry();
    // Multi-turn SFC session accumulates state blocks; the manager must
    // keep only the newest in the live history.
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.turns.len() >= 2)
        .expect("multi-turn seed exists");
    let record = truth_record(scenario, &registry);
    let mut agent = oracle_agent(&record, Mode::Sfc);
    let config = SessionConfig::new(Mode::Sfc);
    let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
    let state_blocks: usize = outcome
        .transcript
        .final_history
        .iter()
        .map(|m| m.content.matches(STATE_FENCE).count())
        .sum();
    assert!(state_blocks <= 1, "history holds {state_blocks} state blocks");
    // The append-only log retains everything.
    let logged: usize = outcome
        .transcript
        .log
        .iter()
        .map(|m| m.content.matches(STATE_FENCE).count())
        .sum();
    assert!(logged >= scenario.turns.len());
}

#[test]
fn reflection_budget_bounds_exchanges() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);
    let mut agent = oracle_agent(&record, Mode::Fc);
    let mut config = SessionConfig::new(Mode::Fc);
    config.strategy = Strategy::ReactReflection;
    let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
    for turn in &outcome.transcript.turn_outcomes {
        assert!(turn.reflection_exchanges >= 1);
        assert!(turn.reflection_exchanges <= config.reflection_budget);
    }
}

#[test]
fn distractors_grow_visible_snapshot_and_leave_metrics_alone() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);

    let mut baseline = None;
    for count in [0usize, 2, 4, 6] {
        let mut agent = oracle_agent(&record, Mode::Sfc);
        let mut config = SessionConfig::new(Mode::Sfc);
        config.distractor_count = count;
        let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
        let report_json = outcome.report.to_json();
        match &baseline {
            None => baseline = Some(report_json),
            Some(expected) => assert_eq!(expected, &report_json, "distractors {count}"),
        }

        // The selection-stage snapshot is the agent-visible one: it must
        // contain exactly relevant + distractors device blocks.
        let selection_prompt = outcome
            .transcript
            .log
            .iter()
            .find(|m| {
                m.role == cockpit_core::harness::Role::User && m.content.contains(STATE_FENCE)
            })
            .expect("selection prompt with state block");
        let body = selection_prompt
            .content
            .split(STATE_FENCE)
            .nth(1)
            .unwrap()
            .split("```")
            .next()
            .unwrap();
        let parsed: serde_json::Value = serde_json::from_str(body.trim()).unwrap();
        let blocks = parsed.as_object().unwrap().len();
        // environment + relevant devices + distractors (+ _turn absent).
        assert_eq!(blocks, 1 + record.relevant_devices.len() + count);
    }
}

#[test]
fn distractor_injection_validates_counts() {
    let registry = registry();
    let relevant = std::collections::BTreeSet::from(["door".to_string()]);
    assert_eq!(inject_distractors(&registry, &relevant, 0).unwrap().len(), 0);
    let two = inject_distractors(&registry, &relevant, 2).unwrap();
    assert_eq!(two.len(), 2);
    assert!(!two.contains(&"door".to_string()));
    assert!(!two.contains(&"environment".to_string()));
    assert!(inject_distractors(&registry, &relevant, 3).is_err());

    // Nearly everything relevant: not enough spares for six.
    let all_but_two: std::collections::BTreeSet<String> = registry
        .device_ids()
        .into_iter()
        .filter(|d| d != "environment")
        .take(9)
        .collect();
    assert!(matches!(
        inject_distractors(&registry, &all_but_two, 6),
        Err(cockpit_core::harness::HarnessError::NotEnoughDistractors { .. })
    ));
}

#[test]
fn scripted_agent_survives_parse_retries() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);

    // First reply is garbage, second is a valid action, third closes.
    let mut agent = ScriptedAgent::new([
        "let me think about this".to_string(),
        "```action\nfc: [music_playback_play(song=\"Hotel California\")]\n```".to_string(),
        "done".to_string(),
    ]);
    let config = SessionConfig::new(Mode::Fc);
    let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
    assert_eq!(outcome.report.overall.accuracy, 1.0);
    let turn = &outcome.transcript.turn_outcomes[0];
    assert!(turn.completed);
    assert_eq!(turn.actions_executed, 1);
}

#[test]
fn unparseable_agent_fails_turn_without_mutation() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);

    let mut agent = ScriptedAgent::new(vec!["gibberish".to_string(); 10]);
    let config = SessionConfig::new(Mode::Fc);
    let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
    let turn = &outcome.transcript.turn_outcomes[0];
    assert!(!turn.completed);
    assert!(turn.failure.as_deref().unwrap_or("").contains("unparseable"));
    // World untouched: model snapshot equals the initial state.
    assert_eq!(
        outcome.transcript.model_snapshots[1].devices,
        outcome.transcript.model_snapshots[0].devices
    );
    assert_eq!(outcome.report.overall.f1_negative, 1.0);
}

#[test]
fn endpoint_failure_marks_turn_failed() {
    struct FlakyAgent;
    impl cockpit_core::harness::agents::Agent for FlakyAgent {
        fn name(&self) -> &str {
            "flaky"
        }
        fn reply(
            &mut self,
            _history: &[cockpit_core::harness::ChatMessage],
        ) -> Result<String, cockpit_core::harness::HarnessError> {
            Err(cockpit_core::harness::HarnessError::Endpoint(
                "connection refused".into(),
            ))
        }
    }

    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);
    let mut agent = FlakyAgent;
    let outcome = run_session(&record, &mut agent, &SessionConfig::new(Mode::Fc), &registry).unwrap();
    let turn = &outcome.transcript.turn_outcomes[0];
    assert!(!turn.completed);
    assert!(turn.failure.as_deref().unwrap().contains("endpoint failure"));
    assert_eq!(outcome.report.overall.f1_negative, 1.0);
}

#[test]
fn action_budget_exhaustion_fails_the_turn() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);

    // Valid actions forever, never "done".
    let action = "```action\nfc: [search_module()]\n```".to_string();
    let mut agent = ScriptedAgent::new(vec![action; 64]);
    let config = SessionConfig::new(Mode::Fc);
    let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
    let turn = &outcome.transcript.turn_outcomes[0];
    assert!(!turn.completed);
    assert_eq!(turn.failure.as_deref(), Some("action budget exhausted"));
    assert_eq!(turn.exchanges, config.max_turns_per_query);
}

#[test]
fn sfc_patch_in_fc_mode_is_rejected() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    let (_, scenario) = seeds
        .iter()
        .find(|(_, s)| s.id == "mm_ss_play_song")
        .expect("seed present");
    let record = truth_record(scenario, &registry);

    let mut agent = ScriptedAgent::new([
        "```action\nsfc: {environment.volume: 80}\n```".to_string(),
        "```action\nsfc: {environment.volume: 80}\n```".to_string(),
        "```action\nsfc: {environment.volume: 80}\n```".to_string(),
        "```action\nsfc: {environment.volume: 80}\n```".to_string(),
    ]);
    let config = SessionConfig::new(Mode::Fc);
    let outcome = run_session(&record, &mut agent, &config, &registry).unwrap();
    let turn = &outcome.transcript.turn_outcomes[0];
    assert!(!turn.completed);
    assert!(turn.failure.as_deref().unwrap().contains("mode mismatch"));
}

#[test]
fn seed_corpus_covers_domains_and_grid() {
    let registry = registry();
    let seeds = load_seeds(&registry);
    assert!(seeds.len() >= 12);

    let mut domains = std::collections::BTreeSet::new();
    let mut grid = std::collections::BTreeSet::new();
    for (_, scenario) in &seeds {
        domains.insert(scenario.domain_label());
        let multi_turn = scenario.turns.len() > 1;
        let multi_intent = scenario.turns.iter().any(|t| t.truth_calls.len() > 1);
        grid.insert((multi_turn, multi_intent));

        // Each seed validates and executes.
        let mut world = World::new(registry.clone());
        let record = execute_truth(scenario, &mut world).expect("seed executes");
        assert_eq!(record.truth_states.len(), scenario.turns.len() + 1);
    }
    for domain in ["Multimedia", "Touch Control", "Car Control", "Light"] {
        assert!(domains.contains(domain), "missing domain {domain}");
    }
    assert_eq!(grid.len(), 4, "S-S/S-M/M-S/M-M grid not fully covered");
}
