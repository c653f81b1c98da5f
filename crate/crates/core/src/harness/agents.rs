//! Deceptively simple test agents: a ground-truth oracle, a do-nothing
//! agent, and a scripted reply player. All of them speak the same fenced
//! action grammar a live model would, so sessions exercise the full
//! extraction and execution path.

use super::prompts::QUERY_PREFIX;
use super::{ChatMessage, HarnessError, Mode, Role};
use crate::registry::ApiCall;
use crate::scenario::ScenarioRecord;
use crate::state::diff_snapshots;
use std::collections::{BTreeSet, VecDeque};

/// A decision-maker driven by the harness. `reply` continues the main
/// conversation; `reply_selection` answers the independent
/// device-selection exchange (same pathway by default, as for a live
/// endpoint).
pub trait Agent {
    fn name(&self) -> &str;

    fn reply(&mut self, history: &[ChatMessage]) -> Result<String, HarnessError>;

    fn reply_selection(&mut self, messages: &[ChatMessage]) -> Result<String, HarnessError> {
        self.reply(messages)
    }
}

/// Replays the ground truth: API calls in FC mode, the truth-state diff
/// as a patch in SFC mode, and truth-derived selections plus calls in
/// hybrid mode.
pub struct OracleAgent {
    record: ScenarioRecord,
    mode: Mode,
    acted_turns: BTreeSet<usize>,
    selection_exchanges: usize,
}

impl OracleAgent {
    pub fn new(record: ScenarioRecord, mode: Mode) -> Self {
        OracleAgent {
            record,
            mode,
            acted_turns: BTreeSet::new(),
            selection_exchanges: 0,
        }
    }

    fn render_fc(calls: &[ApiCall]) -> String {
        let rendered: Vec<String> = calls.iter().map(ApiCall::render).collect();
        format!("```action\nfc: [{}]\n```", rendered.join(", "))
    }

    fn render_sfc(&self, turn: usize) -> Result<String, HarnessError> {
        let before = &self.record.truth_states[turn];
        let after = &self.record.truth_states[turn + 1];
        let diff = diff_snapshots(before, after)
            .map_err(|e| HarnessError::Internal(e.to_string()))?;
        let assignments: Vec<String> = diff
            .changed
            .iter()
            .map(|(path, (_, target))| format!("\"{path}\": {}", target.render()))
            .collect();
        Ok(format!("```action\nsfc: {{{}}}\n```", assignments.join(", ")))
    }

    /// Devices the turn touches: truth-call devices plus devices whose
    /// attributes change in the truth diff.
    fn selection_for(&self, turn: usize) -> Result<Vec<String>, HarnessError> {
        let mut devices = BTreeSet::new();
        if let Some(t) = self.record.scenario.turns.get(turn) {
            for call in &t.truth_calls {
                // The oracle knows its own registry-free mapping: calls
                // are named `device_function_action`.
                if let Some(device) = self
                    .record
                    .relevant_devices
                    .iter()
                    .find(|d| call.api_name.starts_with(&format!("{d}_")))
                {
                    devices.insert(device.clone());
                }
            }
        }
        let before = &self.record.truth_states[turn];
        let after = &self.record.truth_states[turn + 1];
        let diff = diff_snapshots(before, after)
            .map_err(|e| HarnessError::Internal(e.to_string()))?;
        for path in diff.changed.keys() {
            let device = path.device();
            if device != "environment" {
                devices.insert(device.to_string());
            }
        }
        Ok(devices.into_iter().collect())
    }

    /// The current turn is the number of query prompts seen so far.
    fn current_turn(history: &[ChatMessage]) -> Option<usize> {
        let queries = history
            .iter()
            .filter(|m| m.role == Role::User && m.content.starts_with(QUERY_PREFIX))
            .count();
        queries.checked_sub(1)
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> &str {
        "oracle"
    }

    fn reply(&mut self, history: &[ChatMessage]) -> Result<String, HarnessError> {
        let Some(turn) = Self::current_turn(history) else {
            return Ok("done".to_string());
        };
        if turn >= self.record.turn_count() || self.acted_turns.contains(&turn) {
            return Ok("done".to_string());
        }
        self.acted_turns.insert(turn);
        match self.mode {
            Mode::Fc | Mode::Hybrid => Ok(Self::render_fc(
                &self.record.scenario.turns[turn].truth_calls,
            )),
            Mode::Sfc => self.render_sfc(turn),
        }
    }

    fn reply_selection(&mut self, _messages: &[ChatMessage]) -> Result<String, HarnessError> {
        let turn = self.selection_exchanges.min(self.record.turn_count().saturating_sub(1));
        self.selection_exchanges += 1;
        let devices = self.selection_for(turn)?;
        Ok(format!("```action\nselect: [{}]\n```", devices.join(", ")))
    }
}

/// Declines every request.
pub struct NullAgent;

impl Agent for NullAgent {
    fn name(&self) -> &str {
        "null"
    }

    fn reply(&mut self, _history: &[ChatMessage]) -> Result<String, HarnessError> {
        Ok("done".to_string())
    }
}

/// Plays back a fixed queue of replies, then keeps answering "done".
pub struct ScriptedAgent {
    name: String,
    replies: VecDeque<String>,
    selections: VecDeque<String>,
}

impl ScriptedAgent {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(replies: I) -> Self {
        ScriptedAgent {
            name: "scripted".to_string(),
            replies: replies.into_iter().map(Into::into).collect(),
            selections: VecDeque::new(),
        }
    }

    pub fn with_selections<I: IntoIterator<Item = S>, S: Into<String>>(
        mut self,
        selections: I,
    ) -> Self {
        self.selections = selections.into_iter().map(Into::into).collect();
        self
    }
}

impl Agent for ScriptedAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn reply(&mut self, _history: &[ChatMessage]) -> Result<String, HarnessError> {
        Ok(self.replies.pop_front().unwrap_or_else(|| "done".to_string()))
    }

    fn reply_selection(&mut self, _messages: &[ChatMessage]) -> Result<String, HarnessError> {
        Ok(self
            .selections
            .pop_front()
            .unwrap_or_else(|| "done".to_string()))
    }
}
