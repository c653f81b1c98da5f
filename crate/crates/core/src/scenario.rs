//! Scenario pipeline: the tagged task DSL, validation by execution, and
//! persisted truth-state traces.
//!
//! A scenario file wraps one `<scenario>` element containing an optional
//! `<inits>` block and one or more turns, each a `<query>` followed by
//! `<api_call>` blocks and an optional `<trend>` annotation listing the
//! attribute paths scored by change direction instead of exact value.
//! Executing the ground truth yields a [`ScenarioRecord`]: the initial
//! snapshot plus one snapshot per turn, restricted to the devices the
//! scenario touches.

use crate::parse::{parse_call_block, ParseError};
use crate::registry::{ApiCall, Registry, RegistryError};
use crate::state::{
    diff_snapshots, parse_snapshot, serialize_snapshot, AttrPath, RenderMode, StateError,
    WorldSnapshot,
};
use crate::world::World;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// One initialization step: a named preset or a raw API call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitStep {
    Preset { device_id: String, preset: String },
    Call { call: ApiCall },
}

/// One user turn with its ground-truth calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub query: String,
    pub truth_calls: Vec<ApiCall>,
    /// Paths whose numeric target is ambiguous in the query; scored by
    /// trend rather than exact value.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub trend_scored: BTreeSet<AttrPath>,
}

/// A parsed task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub inits: Vec<InitStep>,
    pub turns: Vec<Turn>,
}

impl Scenario {
    pub fn domain_label(&self) -> String {
        self.domain.clone().unwrap_or_else(|| "general".to_string())
    }

    /// Devices the scenario touches: init targets plus truth-call
    /// devices, environment excluded.
    pub fn relevant_devices(&self, registry: &Registry) -> BTreeSet<String> {
        let mut devices = BTreeSet::new();
        let add_call = |call: &ApiCall, devices: &mut BTreeSet<String>| {
            if let Some(device) = registry.device_of_api(&call.api_name) {
                if device != "environment" {
                    devices.insert(device.to_string());
                }
            }
        };
        for init in &self.inits {
            match init {
                InitStep::Preset { device_id, .. } => {
                    if device_id != "environment" {
                        devices.insert(device_id.clone());
                    }
                }
                InitStep::Call { call } => add_call(call, &mut devices),
            }
        }
        for turn in &self.turns {
            for call in &turn.truth_calls {
                add_call(call, &mut devices);
            }
        }
        devices
    }

    pub fn api_calls(&self) -> impl Iterator<Item = &ApiCall> {
        let init_calls = self.inits.iter().filter_map(|init| match init {
            InitStep::Call { call } => Some(call),
            InitStep::Preset { .. } => None,
        });
        init_calls.chain(self.turns.iter().flat_map(|t| t.truth_calls.iter()))
    }
}

/// Executed ground truth: the scenario plus its truth-state trace
/// (initial state, then one snapshot per turn).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRecord {
    pub scenario: Scenario,
    pub truth_states: Vec<WorldSnapshot>,
    pub relevant_devices: BTreeSet<String>,
}

impl ScenarioRecord {
    pub fn turn_count(&self) -> usize {
        self.scenario.turns.len()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("init step {index} failed: {message}")]
    InitFailure { index: usize, message: String },
    #[error("turn {turn} call `{call}` failed: {message}")]
    TurnCallFailure {
        turn: usize,
        call: String,
        message: String,
    },
    #[error("turn {turn} produced no meaningful modification of the state")]
    NoOpTurn { turn: usize },
    #[error("stored record is malformed: {0}")]
    Record(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    State(#[from] StateError),
}

impl From<ParseError> for ScenarioError {
    fn from(e: ParseError) -> Self {
        ScenarioError::Parse {
            line: e.line,
            message: e.message,
        }
    }
}

// --- DSL scanning ---------------------------------------------------

#[derive(Debug)]
struct RawTag {
    name: String,
    attrs: BTreeMap<String, String>,
    closing: bool,
    /// Byte offsets of the tag itself.
    start: usize,
    end: usize,
    line: usize,
}

fn scan_tags(text: &str) -> Result<Vec<RawTag>, ScenarioError> {
    let bytes = text.as_bytes();
    let mut tags = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c != b'<' {
            i += 1;
            continue;
        }
        // Only `</name` or `<name` starts a tag; a bare `<` is text.
        let next = bytes.get(i + 1).copied();
        let closing = next == Some(b'/');
        let name_start = if closing { i + 2 } else { i + 1 };
        match bytes.get(name_start) {
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => {
                i += 1;
                continue;
            }
        }
        let Some(rel_end) = text[i..].find('>') else {
            return Err(ScenarioError::Parse {
                line,
                message: "unterminated tag".into(),
            });
        };
        let end = i + rel_end + 1;
        let inner = &text[name_start..end - 1];
        let mut parts = inner.splitn(2, char::is_whitespace);
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let attrs = parse_tag_attrs(parts.next().unwrap_or(""), line)?;
        if closing && !attrs.is_empty() {
            return Err(ScenarioError::Parse {
                line,
                message: format!("closing tag `</{name}>` must not carry attributes"),
            });
        }
        tags.push(RawTag {
            name,
            attrs,
            closing,
            start: i,
            end,
            line,
        });
        line += text[i..end].matches('\n').count();
        i = end;
    }
    Ok(tags)
}

fn parse_tag_attrs(text: &str, line: usize) -> Result<BTreeMap<String, String>, ScenarioError> {
    let mut attrs = BTreeMap::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let Some(eq) = rest.find('=') else {
            return Err(ScenarioError::Parse {
                line,
                message: format!("malformed tag attribute near `{rest}`"),
            });
        };
        let key = rest[..eq].trim().to_string();
        let after = rest[eq + 1..].trim_start();
        let Some(stripped) = after.strip_prefix('"') else {
            return Err(ScenarioError::Parse {
                line,
                message: format!("attribute `{key}` must use double quotes"),
            });
        };
        let Some(close) = stripped.find('"') else {
            return Err(ScenarioError::Parse {
                line,
                message: format!("unterminated attribute `{key}`"),
            });
        };
        attrs.insert(key, stripped[..close].to_string());
        rest = stripped[close + 1..].trim_start();
    }
    Ok(attrs)
}

const CHILD_TAGS: [&str; 4] = ["inits", "query", "api_call", "trend"];

/// Parse a scenario document. When a registry is supplied, API names,
/// init targets, and trend paths are resolved against it.
pub fn parse_scenario(
    text: &str,
    registry: Option<&Registry>,
) -> Result<Scenario, ScenarioError> {
    let tags = scan_tags(text)?;
    let parse_err = |line: usize, message: String| ScenarioError::Parse { line, message };

    let Some(first) = tags.first() else {
        return Err(parse_err(1, "missing <scenario> tag".into()));
    };
    if first.name != "scenario" || first.closing {
        return Err(parse_err(
            first.line,
            "document must start with <scenario>".into(),
        ));
    }
    let Some(last) = tags.last() else {
        unreachable!("first tag exists");
    };
    if last.name != "scenario" || !last.closing || tags.len() < 2 {
        return Err(parse_err(
            last.line,
            "document must end with </scenario>".into(),
        ));
    }
    if tags[1..tags.len() - 1].iter().any(|t| t.name == "scenario") {
        return Err(parse_err(
            first.line,
            "nested or repeated <scenario> tags".into(),
        ));
    }

    let id = first
        .attrs
        .get("id")
        .cloned()
        .ok_or_else(|| parse_err(first.line, "<scenario> requires an id attribute".into()))?;
    let domain = first.attrs.get("domain").cloned();

    let mut inits: Vec<InitStep> = Vec::new();
    let mut seen_inits = false;
    let mut turns: Vec<Turn> = Vec::new();
    let mut open_turn: Option<Turn> = None;

    let inner = &tags[1..tags.len() - 1];
    let mut idx = 0;
    while idx < inner.len() {
        let open = &inner[idx];
        if open.closing {
            return Err(parse_err(
                open.line,
                format!("unexpected closing tag `</{}>`", open.name),
            ));
        }
        if !CHILD_TAGS.contains(&open.name.as_str()) {
            return Err(parse_err(open.line, format!("unknown tag `<{}>`", open.name)));
        }
        let Some(close) = inner.get(idx + 1) else {
            return Err(parse_err(open.line, format!("unclosed tag `<{}>`", open.name)));
        };
        if !close.closing || close.name != open.name {
            return Err(parse_err(
                close.line,
                format!(
                    "malformed nesting: expected `</{}>`, found `<{}{}>`",
                    open.name,
                    if close.closing { "/" } else { "" },
                    close.name
                ),
            ));
        }
        let content = &text[open.end..close.start];
        let content_line = open.line;

        match open.name.as_str() {
            "inits" => {
                if seen_inits {
                    return Err(parse_err(open.line, "duplicate <inits> block".into()));
                }
                if !turns.is_empty() || open_turn.is_some() {
                    return Err(parse_err(
                        open.line,
                        "<inits> must precede the first <query>".into(),
                    ));
                }
                seen_inits = true;
                inits = parse_inits(content, content_line)?;
            }
            "query" => {
                if let Some(turn) = open_turn.take() {
                    if turn.truth_calls.is_empty() {
                        return Err(parse_err(
                            open.line,
                            "query without a matching <api_call> block".into(),
                        ));
                    }
                    turns.push(turn);
                }
                let query = content.trim().to_string();
                if query.is_empty() {
                    return Err(parse_err(open.line, "<query> must not be empty".into()));
                }
                open_turn = Some(Turn {
                    query,
                    truth_calls: Vec::new(),
                    trend_scored: BTreeSet::new(),
                });
            }
            "api_call" => {
                let Some(turn) = open_turn.as_mut() else {
                    return Err(parse_err(
                        open.line,
                        "<api_call> before any <query>".into(),
                    ));
                };
                let calls = parse_call_block(content).map_err(|e| ScenarioError::Parse {
                    line: content_line + e.line - 1,
                    message: e.message,
                })?;
                if calls.is_empty() {
                    return Err(parse_err(open.line, "<api_call> block is empty".into()));
                }
                turn.truth_calls.extend(calls);
            }
            "trend" => {
                let Some(turn) = open_turn.as_mut() else {
                    return Err(parse_err(open.line, "<trend> before any <query>".into()));
                };
                for token in content.split([',', '\n', ' ', '\t']) {
                    let token = token.trim();
                    if !token.is_empty() {
                        turn.trend_scored.insert(AttrPath(token.to_string()));
                    }
                }
            }
            _ => unreachable!("tag name checked above"),
        }
        idx += 2;
    }

    if let Some(turn) = open_turn.take() {
        if turn.truth_calls.is_empty() {
            return Err(parse_err(
                last.line,
                "query without a matching <api_call> block".into(),
            ));
        }
        turns.push(turn);
    }
    if turns.is_empty() {
        return Err(parse_err(last.line, "scenario declares no turns".into()));
    }

    let scenario = Scenario {
        id,
        domain,
        inits,
        turns,
    };
    if let Some(registry) = registry {
        resolve_against_registry(&scenario, registry)
            .map_err(|message| parse_err(first.line, message))?;
    }
    Ok(scenario)
}

fn parse_inits(content: &str, base_line: usize) -> Result<Vec<InitStep>, ScenarioError> {
    let mut steps = Vec::new();
    for (offset, raw_line) in content.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.contains('(') {
            let call = crate::parse::parse_call(line).map_err(|e| ScenarioError::Parse {
                line: base_line + offset,
                message: e.message,
            })?;
            steps.push(InitStep::Call { call });
        } else if let Some((device, preset)) = line.split_once(':') {
            steps.push(InitStep::Preset {
                device_id: device.trim().to_string(),
                preset: preset.trim().to_string(),
            });
        } else {
            steps.push(InitStep::Preset {
                device_id: line.to_string(),
                preset: "default".to_string(),
            });
        }
    }
    Ok(steps)
}

/// Check that every referenced API, device, preset, and trend path
/// exists in the registry.
pub fn resolve_against_registry(
    scenario: &Scenario,
    registry: &Registry,
) -> Result<(), String> {
    for init in &scenario.inits {
        match init {
            InitStep::Preset { device_id, preset } => {
                let device = registry
                    .device(device_id)
                    .map_err(|_| format!("init references unknown device `{device_id}`"))?;
                if preset != "default" && !device.init_presets.contains_key(preset) {
                    return Err(format!(
                        "init references unknown preset `{preset}` for `{device_id}`"
                    ));
                }
            }
            InitStep::Call { call } => {
                if !registry.resolves(&call.api_name) {
                    return Err(format!("init references unknown API `{}`", call.api_name));
                }
            }
        }
    }
    for (index, turn) in scenario.turns.iter().enumerate() {
        for call in &turn.truth_calls {
            if !registry.resolves(&call.api_name) {
                return Err(format!(
                    "turn {} references unknown API `{}`",
                    index + 1,
                    call.api_name
                ));
            }
        }
        for path in &turn.trend_scored {
            let Some((device, attr)) = path.split() else {
                return Err(format!("trend path `{path}` has no device segment"));
            };
            if crate::state::StateSchema::attribute_schema(registry, device, attr).is_none() {
                return Err(format!("trend path `{path}` is not a declared attribute"));
            }
        }
    }
    Ok(())
}

/// Apply the scenario inits to a fresh world.
pub(crate) fn apply_inits(world: &mut World, scenario: &Scenario) -> Result<(), ScenarioError> {
    for (index, init) in scenario.inits.iter().enumerate() {
        match init {
            InitStep::Preset { device_id, preset } => {
                world
                    .init_device(device_id, preset)
                    .map_err(|e| ScenarioError::InitFailure {
                        index: index + 1,
                        message: e.to_string(),
                    })?;
            }
            InitStep::Call { call } => {
                let result = world.invoke(call);
                if !result.success {
                    return Err(ScenarioError::InitFailure {
                        index: index + 1,
                        message: format!("{} -> {}", call.render(), result.message),
                    });
                }
            }
        }
    }
    world.take_logs();
    Ok(())
}

/// Execute the ground truth on a fresh world, persisting a snapshot
/// after initialization and after every turn. Any failed call aborts;
/// a turn that changes nothing is rejected.
pub fn execute_truth(
    scenario: &Scenario,
    world: &mut World,
) -> Result<ScenarioRecord, ScenarioError> {
    let relevant = scenario.relevant_devices(world.registry());
    apply_inits(world, scenario)?;
    let mut truth_states = vec![world.snapshot_of(&relevant, "init")?];

    for (index, turn) in scenario.turns.iter().enumerate() {
        let turn_no = index + 1;
        for call in &turn.truth_calls {
            let result = world.invoke(call);
            if !result.success {
                return Err(ScenarioError::TurnCallFailure {
                    turn: turn_no,
                    call: call.render(),
                    message: result.message,
                });
            }
        }
        world.take_logs();
        let snapshot = world.snapshot_of(&relevant, format!("turn_{turn_no}"))?;
        let previous = truth_states.last().expect("init snapshot present");
        if diff_snapshots(previous, &snapshot)?.is_empty() {
            return Err(ScenarioError::NoOpTurn { turn: turn_no });
        }
        truth_states.push(snapshot);
    }

    Ok(ScenarioRecord {
        scenario: scenario.clone(),
        truth_states,
        relevant_devices: relevant,
    })
}

/// Result of the automatic validation checks. Semantic alignment with
/// the query needs a human judge and is reported as such.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub executable: bool,
    pub state_changing: bool,
    pub resolvable: bool,
    pub semantic_alignment: String,
    pub diagnostics: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.executable && self.state_changing && self.resolvable
    }
}

/// Validate a scenario by executing it on a fresh world.
pub fn validate_scenario(scenario: &Scenario, world: &mut World) -> ValidationReport {
    let mut report = ValidationReport {
        executable: true,
        state_changing: true,
        resolvable: true,
        semantic_alignment: "requires human review".to_string(),
        diagnostics: Vec::new(),
    };

    if let Err(message) = resolve_against_registry(scenario, world.registry()) {
        report.resolvable = false;
        report.executable = false;
        report.diagnostics.push(message);
        return report;
    }

    if let Err(e) = apply_inits(world, scenario) {
        report.executable = false;
        report.diagnostics.push(e.to_string());
        return report;
    }
    let relevant = scenario.relevant_devices(world.registry());
    let mut previous = match world.snapshot_of(&relevant, "init") {
        Ok(snap) => snap,
        Err(e) => {
            report.executable = false;
            report.diagnostics.push(e.to_string());
            return report;
        }
    };

    for (index, turn) in scenario.turns.iter().enumerate() {
        let turn_no = index + 1;
        for call in &turn.truth_calls {
            let result = world.invoke(call);
            if !result.success {
                report.executable = false;
                report
                    .diagnostics
                    .push(format!("turn {turn_no}: {} -> {}", call.render(), result.message));
                return report;
            }
        }
        world.take_logs();
        let snapshot = world
            .snapshot_of(&relevant, "init")
            .expect("relevant devices are registered");
        match diff_snapshots(&previous, &snapshot) {
            Ok(diff) if diff.is_empty() => {
                report.state_changing = false;
                report
                    .diagnostics
                    .push(format!("turn {turn_no}: no meaningful modification"));
            }
            Ok(_) => {}
            Err(e) => report.diagnostics.push(e.to_string()),
        }
        previous = snapshot;
    }

    report
}

// --- record persistence ----------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordManifest {
    id: String,
    domain: String,
    relevant_devices: Vec<String>,
    turns: Vec<ManifestTurn>,
    snapshots: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestTurn {
    query: String,
    truth_calls: Vec<String>,
    #[serde(default)]
    trend_scored: Vec<String>,
}

fn snapshot_file_name(index: usize, label: &str) -> String {
    format!("state_{index:03}_{label}.json")
}

/// Persist a record as a directory of canonical snapshot documents plus
/// a manifest and the original scenario text.
pub fn save_record(
    record: &ScenarioRecord,
    source_text: &str,
    dir: &Path,
) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("scenario.txt"), source_text)?;

    let mut snapshot_files = Vec::new();
    for (index, snapshot) in record.truth_states.iter().enumerate() {
        let name = snapshot_file_name(index, &snapshot.timestamp_label);
        std::fs::write(
            dir.join(&name),
            serialize_snapshot(snapshot, RenderMode::Full),
        )?;
        snapshot_files.push(name);
    }

    let manifest = RecordManifest {
        id: record.scenario.id.clone(),
        domain: record.scenario.domain_label(),
        relevant_devices: record.relevant_devices.iter().cloned().collect(),
        turns: record
            .scenario
            .turns
            .iter()
            .map(|t| ManifestTurn {
                query: t.query.clone(),
                truth_calls: t.truth_calls.iter().map(ApiCall::render).collect(),
                trend_scored: t.trend_scored.iter().map(|p| p.0.clone()).collect(),
            })
            .collect(),
        snapshots: snapshot_files,
    };
    let mut manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_text.push('\n');
    std::fs::write(dir.join("manifest.json"), manifest_text)?;
    Ok(())
}

/// Re-execute a stored record and report drift against the stored
/// snapshots. An empty vector means the replay is byte-identical.
pub fn replay_record(dir: &Path, registry: &std::sync::Arc<Registry>) -> Result<Vec<String>, ScenarioError> {
    let manifest_text = std::fs::read_to_string(dir.join("manifest.json"))
        .map_err(|e| ScenarioError::Record(format!("missing manifest.json: {e}")))?;
    let manifest: RecordManifest = serde_json::from_str(&manifest_text)
        .map_err(|e| ScenarioError::Record(format!("manifest.json: {e}")))?;
    let source = std::fs::read_to_string(dir.join("scenario.txt"))
        .map_err(|e| ScenarioError::Record(format!("missing scenario.txt: {e}")))?;

    let scenario = parse_scenario(&source, Some(registry))?;
    let mut world = World::new(registry.clone());
    let record = execute_truth(&scenario, &mut world)?;

    let mut drift = Vec::new();
    if record.truth_states.len() != manifest.snapshots.len() {
        drift.push(format!(
            "snapshot count changed: stored {}, replayed {}",
            manifest.snapshots.len(),
            record.truth_states.len()
        ));
    }
    for (index, name) in manifest.snapshots.iter().enumerate() {
        let stored = std::fs::read_to_string(dir.join(name))
            .map_err(|e| ScenarioError::Record(format!("missing {name}: {e}")))?;
        // Stored documents must still parse against the current schema.
        parse_snapshot(&stored, registry.as_ref())?;
        let Some(replayed) = record.truth_states.get(index) else {
            continue;
        };
        let replayed_text = serialize_snapshot(replayed, RenderMode::Full);
        if replayed_text != stored {
            drift.push(format!("{name}: replayed snapshot differs from stored"));
        }
    }
    Ok(drift)
}
