//! Multi-turn evaluation sessions: prompting, action extraction,
//! execution feedback, context management, distractor injection, and
//! scoring against the truth trace.
//!
//! A session owns one world initialized exactly like the truth run. Per
//! query turn the agent acts through the mode's paradigm until it
//! replies "done" or exhausts its budget; the world snapshot after each
//! turn is scored against the corresponding truth states. Sessions are
//! independent, so a pool of worker threads can run many in parallel.

pub mod actions;
pub mod agents;
pub mod client;
pub mod prompts;

use crate::executor::{execute_fc, execute_hybrid, execute_sfc, Action};
use crate::metrics::{aggregate, MetricReport, MetricsError, TurnMetrics, TurnReport};
use crate::registry::{Registry, RegistryError};
use crate::scenario::{ScenarioError, ScenarioRecord};
use crate::state::{RenderMode, WorldSnapshot};
use crate::world::World;
use actions::{compose_feedback, extract_action, is_done_reply, manage_context, state_block, ActionExpectation};
use agents::Agent;
use prompts::{QUERY_PREFIX, REFLECTION_PREFIX};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// Execution paradigm for a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fc,
    Sfc,
    Hybrid,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fc => "fc",
            Mode::Sfc => "sfc",
            Mode::Hybrid => "hybrid",
        }
    }
}

/// Prompting strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    React,
    ReactReflection,
    ReactNoExamples,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::React => "react",
            Strategy::ReactReflection => "react_reflection",
            Strategy::ReactNoExamples => "react_no_examples",
        }
    }
}

pub const DISTRACTOR_COUNTS: [usize; 4] = [0, 2, 4, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub mode: Mode,
    pub strategy: Strategy,
    pub temperature: f64,
    pub max_turns_per_query: usize,
    pub reflection_budget: usize,
    pub distractor_count: usize,
    /// Re-asks granted after an unparseable action before the turn fails.
    pub retry_budget: usize,
    /// Prepend the plan-first preamble to the system prompt.
    pub plan_first: bool,
}

impl SessionConfig {
    pub fn new(mode: Mode) -> Self {
        SessionConfig {
            mode,
            strategy: Strategy::React,
            temperature: 0.7,
            max_turns_per_query: 8,
            reflection_budget: 3,
            distractor_count: 0,
            retry_budget: 2,
            plan_first: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !DISTRACTOR_COUNTS.contains(&self.distractor_count) {
            return Err(HarnessError::Config(format!(
                "distractor count must be one of {DISTRACTOR_COUNTS:?}, got {}",
                self.distractor_count
            )));
        }
        if self.max_turns_per_query == 0 {
            return Err(HarnessError::Config(
                "max_turns_per_query must be at least 1".into(),
            ));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(HarnessError::Config(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid session config: {0}")]
    Config(String),
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("not enough spare devices for {needed} distractors (have {available})")]
    NotEnoughDistractors { needed: usize, available: usize },
    #[error("harness invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// How one query turn ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnOutcome {
    pub turn: usize,
    pub completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub actions_executed: usize,
    /// Assistant replies consumed in the main conversation this turn.
    pub exchanges: usize,
    /// Assistant replies consumed in reflection this turn.
    pub reflection_exchanges: usize,
}

/// Complete record of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTranscript {
    pub scenario_id: String,
    pub agent: String,
    pub mode: Mode,
    pub strategy: Strategy,
    pub distractor_count: usize,
    /// Append-only log of every exchanged message, selection stages
    /// included.
    pub log: Vec<ChatMessage>,
    /// The live main conversation as the agent last saw it (state blocks
    /// trimmed to the newest).
    pub final_history: Vec<ChatMessage>,
    pub model_snapshots: Vec<WorldSnapshot>,
    pub turn_outcomes: Vec<TurnOutcome>,
}

impl AgentTranscript {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# scenario: {}\n# agent: {}\n# mode: {}\n# strategy: {}\n# distractors: {}\n\n",
            self.scenario_id,
            self.agent,
            self.mode.as_str(),
            self.strategy.as_str(),
            self.distractor_count
        );
        for message in &self.log {
            let role = match message.role {
                Role::System => "system",
                Role::User => "user",
                Role::Assistant => "assistant",
                Role::Tool => "tool",
            };
            out.push_str(&format!("--- {role} ---\n{}\n\n", message.content));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub transcript: AgentTranscript,
    pub report: MetricReport,
}

/// Pick `count` devices disjoint from the scenario's relevant set, in
/// stable (alphabetical) order, to pad the agent-visible snapshot.
pub fn inject_distractors(
    registry: &Registry,
    relevant: &BTreeSet<String>,
    count: usize,
) -> Result<Vec<String>, HarnessError> {
    if !DISTRACTOR_COUNTS.contains(&count) {
        return Err(HarnessError::Config(format!(
            "distractor count must be one of {DISTRACTOR_COUNTS:?}, got {count}"
        )));
    }
    let spare: Vec<String> = registry
        .device_ids()
        .into_iter()
        .filter(|id| id != "environment" && !relevant.contains(id))
        .collect();
    if spare.len() < count {
        return Err(HarnessError::NotEnoughDistractors {
            needed: count,
            available: spare.len(),
        });
    }
    Ok(spare.into_iter().take(count).collect())
}

struct Session<'a> {
    record: &'a ScenarioRecord,
    agent: &'a mut dyn Agent,
    config: &'a SessionConfig,
    world: World,
    relevant: BTreeSet<String>,
    visible: BTreeSet<String>,
    history: Vec<ChatMessage>,
    log: Vec<ChatMessage>,
}

impl<'a> Session<'a> {
    fn push_main(&mut self, message: ChatMessage) {
        self.history.push(message.clone());
        self.log.push(message);
    }

    fn visible_snapshot(&self, label: &str) -> Result<WorldSnapshot, HarnessError> {
        Ok(self.world.snapshot_of(&self.visible, label)?)
    }

    fn projected_state_block(&self, devices: &[String]) -> Result<String, HarnessError> {
        let ids: BTreeSet<String> = devices.iter().cloned().collect();
        let snapshot = self.world.snapshot_of(&ids, "")?;
        Ok(state_block(&snapshot, RenderMode::Full))
    }

    /// Independent device-selection exchange (no shared context with the
    /// main conversation). Returns the validated selection, or the
    /// failure text once the retry budget is exhausted.
    fn selection_exchange(&mut self, query: &str) -> Result<Result<Vec<String>, String>, HarnessError> {
        let visible = self.visible_snapshot("")?;
        let mut messages = vec![
            ChatMessage::system(prompts::selection_system(self.config)),
            ChatMessage::user(format!(
                "{QUERY_PREFIX} {query}\n{}",
                state_block(&visible, RenderMode::Compact)
            )),
        ];
        self.log.push(ChatMessage::system(format!(
            "[device-selection exchange for: {query}]"
        )));
        self.log.extend(messages.iter().cloned());

        let mut retries = self.config.retry_budget;
        loop {
            let reply = match self.agent.reply_selection(&messages) {
                Ok(reply) => reply,
                Err(HarnessError::Endpoint(e)) => return Ok(Err(format!("endpoint failure: {e}"))),
                Err(other) => return Err(other),
            };
            messages.push(ChatMessage::assistant(reply.clone()));
            self.log.push(ChatMessage::assistant(reply.clone()));

            let problem = match extract_action(&reply, ActionExpectation::Selection) {
                Ok(Action::DeviceSelection { devices }) => {
                    let unknown: Vec<&String> = devices
                        .iter()
                        .filter(|d| !self.world.registry().contains(d))
                        .collect();
                    if unknown.is_empty() {
                        let mut unique: Vec<String> = Vec::new();
                        for device in devices {
                            if !unique.contains(&device) {
                                unique.push(device);
                            }
                        }
                        return Ok(Ok(unique));
                    }
                    format!("unknown devices in selection: {unknown:?}")
                }
                Ok(_) => "expected a select action".to_string(),
                Err(e) => e.to_string(),
            };
            if retries == 0 {
                return Ok(Err(format!("device selection failed: {problem}")));
            }
            retries -= 1;
            let re_ask = ChatMessage::user(format!(
                "Could not use that reply ({problem}). Reply with a fenced action block \
                 containing `select: [device, ...]`."
            ));
            messages.push(re_ask.clone());
            self.log.push(re_ask);
        }
    }

    fn execute(&mut self, action: Action, selection: Option<&[String]>) -> Result<ChatMessage, HarnessError> {
        let feedback = match (self.config.mode, action) {
            (Mode::Fc, Action::Fc { calls }) => execute_fc(&mut self.world, &calls),
            (Mode::Sfc, Action::Sfc { patch }) => execute_sfc(&mut self.world, &patch),
            (Mode::Hybrid, Action::Fc { calls }) => {
                let scope = selection.unwrap_or(&[]);
                execute_hybrid(&mut self.world, scope, &calls)
                    .map_err(|e| HarnessError::Internal(e.to_string()))?
            }
            (_, other) => {
                return Err(HarnessError::Internal(format!(
                    "extractor let through a mismatched action: {other:?}"
                )))
            }
        };
        Ok(compose_feedback(&feedback, self.config.mode))
    }

    /// Drive one query turn. Returns the outcome; the world is left at
    /// whatever state the agent reached.
    fn run_turn(&mut self, turn_index: usize) -> Result<TurnOutcome, HarnessError> {
        let turn = &self.record.scenario.turns[turn_index];
        let query = turn.query.clone();
        let mut outcome = TurnOutcome {
            turn: turn_index + 1,
            completed: false,
            failure: None,
            actions_executed: 0,
            exchanges: 0,
            reflection_exchanges: 0,
        };

        // Stage one for the state-aware modes: pick the devices.
        let selection: Option<Vec<String>> = match self.config.mode {
            Mode::Fc => None,
            Mode::Sfc | Mode::Hybrid => match self.selection_exchange(&query)? {
                Ok(devices) => Some(devices),
                Err(failure) => {
                    outcome.failure = Some(failure);
                    return Ok(outcome);
                }
            },
        };

        // Compose the query message for the main conversation.
        let content = match self.config.mode {
            Mode::Fc => format!("{QUERY_PREFIX} {query}"),
            Mode::Sfc => {
                let devices = selection.as_deref().unwrap_or(&[]);
                format!(
                    "{QUERY_PREFIX} {query}\n{}",
                    self.projected_state_block(devices)?
                )
            }
            Mode::Hybrid => {
                let devices = selection.as_deref().unwrap_or(&[]);
                let mut docs = String::new();
                for device in devices {
                    for spec in self.world.registry().search_api(device)? {
                        docs.push_str(&spec.render());
                    }
                }
                format!(
                    "{QUERY_PREFIX} {query}\nAvailable APIs:\n{docs}{}",
                    self.projected_state_block(devices)?
                )
            }
        };
        self.push_main(ChatMessage::user(content));
        manage_context(&mut self.history);

        let expectation = ActionExpectation::for_mode(self.config.mode);
        let mut retries = self.config.retry_budget;
        for _ in 0..self.config.max_turns_per_query {
            let reply = match self.agent.reply(&self.history) {
                Ok(reply) => reply,
                Err(HarnessError::Endpoint(e)) => {
                    outcome.failure = Some(format!("endpoint failure: {e}"));
                    break;
                }
                Err(other) => return Err(other),
            };
            outcome.exchanges += 1;
            self.push_main(ChatMessage::assistant(reply.clone()));

            if is_done_reply(&reply) {
                outcome.completed = true;
                break;
            }
            match extract_action(&reply, expectation) {
                Ok(action) => {
                    let feedback = self.execute(action, selection.as_deref())?;
                    outcome.actions_executed += 1;
                    self.push_main(feedback);
                }
                Err(e) => {
                    if retries == 0 {
                        outcome.failure = Some(format!("unparseable action: {e}"));
                        break;
                    }
                    retries -= 1;
                    self.push_main(ChatMessage::user(format!(
                        "Could not parse your action ({e}). Reply with a fenced ```action \
                         block or the word done."
                    )));
                }
            }
        }
        if !outcome.completed && outcome.failure.is_none() {
            outcome.failure = Some("action budget exhausted".to_string());
        }

        // Reflection opportunities, offered only after an orderly turn.
        if self.config.strategy == Strategy::ReactReflection && outcome.failure.is_none() {
            let budget = self.config.reflection_budget;
            for opportunity in 1..=budget {
                let mut content = format!(
                    "{REFLECTION_PREFIX} {opportunity}/{budget}: verify the request is fully \
                     satisfied; take corrective action or reply done."
                );
                if self.config.mode == Mode::Sfc {
                    let devices = selection.as_deref().unwrap_or(&[]);
                    content.push('\n');
                    content.push_str(&self.projected_state_block(devices)?);
                }
                self.push_main(ChatMessage::user(content));
                manage_context(&mut self.history);

                let reply = match self.agent.reply(&self.history) {
                    Ok(reply) => reply,
                    Err(HarnessError::Endpoint(_)) => break,
                    Err(other) => return Err(other),
                };
                outcome.reflection_exchanges += 1;
                self.push_main(ChatMessage::assistant(reply.clone()));
                if is_done_reply(&reply) {
                    break;
                }
                if let Ok(action) = extract_action(&reply, expectation) {
                    let feedback = self.execute(action, selection.as_deref())?;
                    outcome.actions_executed += 1;
                    self.push_main(feedback);
                }
            }
        }

        Ok(outcome)
    }
}

/// Run one evaluation session: initialize a world from the record, drive
/// each query turn through the agent, and score the per-turn model
/// states against the truth trace.
pub fn run_session(
    record: &ScenarioRecord,
    agent: &mut dyn Agent,
    config: &SessionConfig,
    registry: &Arc<Registry>,
) -> Result<SessionOutcome, HarnessError> {
    config.validate()?;

    let relevant = record.relevant_devices.clone();
    let distractors = inject_distractors(registry, &relevant, config.distractor_count)?;
    let mut visible = relevant.clone();
    visible.extend(distractors.iter().cloned());

    let mut world = World::new(registry.clone());
    crate::scenario::apply_inits(&mut world, &record.scenario)?;

    let initial = world.snapshot_of(&relevant, "init")?;
    let Some(truth_initial) = record.truth_states.first() else {
        return Err(HarnessError::Internal("record has no truth states".into()));
    };
    if &initial != truth_initial {
        return Err(HarnessError::Internal(
            "fresh initialization does not reproduce the record's initial state".into(),
        ));
    }

    let system = match config.mode {
        Mode::Fc => prompts::fc_system(config),
        Mode::Sfc => prompts::sfc_system(config),
        Mode::Hybrid => prompts::hybrid_system(config),
    };
    let mut session = Session {
        record,
        agent,
        config,
        world,
        relevant,
        visible,
        history: Vec::new(),
        log: Vec::new(),
    };
    session.push_main(ChatMessage::system(system));

    let mut model_snapshots = vec![initial];
    let mut turn_outcomes = Vec::new();
    for turn_index in 0..record.turn_count() {
        let outcome = session.run_turn(turn_index)?;
        turn_outcomes.push(outcome);
        let label = format!("turn_{}", turn_index + 1);
        model_snapshots.push(session.world.snapshot_of(&session.relevant, label)?);
    }
    manage_context(&mut session.history);

    let domain = record.scenario.domain_label();
    let mut turn_reports = Vec::new();
    for (index, turn) in record.scenario.turns.iter().enumerate() {
        let metrics = TurnMetrics::evaluate(
            &record.truth_states[index],
            &record.truth_states[index + 1],
            &model_snapshots[index],
            &model_snapshots[index + 1],
            &turn.trend_scored,
        )?;
        turn_reports.push(TurnReport {
            scenario_id: record.scenario.id.clone(),
            domain: domain.clone(),
            turn: index + 1,
            metrics,
        });
    }
    let report = aggregate(turn_reports)?;

    let transcript = AgentTranscript {
        scenario_id: record.scenario.id.clone(),
        agent: session.agent.name().to_string(),
        mode: config.mode,
        strategy: config.strategy,
        distractor_count: config.distractor_count,
        log: session.log,
        final_history: session.history,
        model_snapshots,
        turn_outcomes,
    };
    Ok(SessionOutcome { transcript, report })
}

/// The oracle agent for a record and mode.
pub fn oracle_agent(record: &ScenarioRecord, mode: Mode) -> agents::OracleAgent {
    agents::OracleAgent::new(record.clone(), mode)
}
