//! Action extraction from agent replies, feedback composition, and
//! conversation context management.

use super::{ChatMessage, Mode, Role};
use crate::executor::{ExecutionFeedback, StepOutcome};
use crate::executor::Action;
use crate::parse::{parse_bracketed_calls, parse_patch, parse_selection};
use crate::state::{serialize_snapshot, DeviceState, RenderMode, WorldSnapshot};
use std::collections::BTreeMap;

pub const ACTION_FENCE: &str = "```action";
pub const STATE_FENCE: &str = "```state";
const STALE_STATE_PLACEHOLDER: &str = "[stale device states omitted]";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ActionError {
    #[error("reply contains no ```action block")]
    NoActionBlock,
    #[error("unterminated ```action block")]
    UnterminatedBlock,
    #[error("action block must start with `fc:`, `sfc:`, or `select:`")]
    MissingKeyword,
    #[error("{0}")]
    Grammar(String),
    #[error("mode mismatch: expected {expected}, found `{found}:` payload")]
    ModeMismatch { expected: String, found: String },
}

/// What kind of action the current exchange may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionExpectation {
    FcCalls,
    SfcPatch,
    Selection,
}

impl ActionExpectation {
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Fc | Mode::Hybrid => ActionExpectation::FcCalls,
            Mode::Sfc => ActionExpectation::SfcPatch,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            ActionExpectation::FcCalls => "fc",
            ActionExpectation::SfcPatch => "sfc",
            ActionExpectation::Selection => "select",
        }
    }
}

/// Locate the first fenced `action` block.
fn action_block(reply: &str) -> Result<&str, ActionError> {
    let Some(start) = reply.find(ACTION_FENCE) else {
        return Err(ActionError::NoActionBlock);
    };
    let body_start = start + ACTION_FENCE.len();
    let body = &reply[body_start..];
    let Some(end) = body.find("```") else {
        return Err(ActionError::UnterminatedBlock);
    };
    Ok(body[..end].trim())
}

/// Whether the reply signals the turn is complete: no action block and
/// the word "done" somewhere.
pub fn is_done_reply(reply: &str) -> bool {
    !reply.contains(ACTION_FENCE) && reply.to_lowercase().contains("done")
}

/// Extract the action from the first fenced `action` block, enforcing
/// the expected action kind for the current mode and stage.
pub fn extract_action(reply: &str, expect: ActionExpectation) -> Result<Action, ActionError> {
    let block = action_block(reply)?;
    let Some((keyword, payload)) = block.split_once(':') else {
        return Err(ActionError::MissingKeyword);
    };
    let keyword = keyword.trim();
    if !matches!(keyword, "fc" | "sfc" | "select") {
        return Err(ActionError::MissingKeyword);
    }
    if keyword != expect.keyword() {
        return Err(ActionError::ModeMismatch {
            expected: expect.keyword().to_string(),
            found: keyword.to_string(),
        });
    }
    match expect {
        ActionExpectation::FcCalls => {
            let calls = parse_bracketed_calls(payload).map_err(|e| ActionError::Grammar(e.to_string()))?;
            if calls.is_empty() {
                return Err(ActionError::Grammar("fc action lists no calls".into()));
            }
            Ok(Action::Fc { calls })
        }
        ActionExpectation::SfcPatch => {
            let patch = parse_patch(payload).map_err(|e| ActionError::Grammar(e.to_string()))?;
            if patch.is_empty() {
                return Err(ActionError::Grammar("sfc patch is empty".into()));
            }
            Ok(Action::Sfc { patch })
        }
        ActionExpectation::Selection => {
            let devices = parse_selection(payload).map_err(|e| ActionError::Grammar(e.to_string()))?;
            if devices.is_empty() {
                return Err(ActionError::Grammar("selection lists no devices".into()));
            }
            Ok(Action::DeviceSelection { devices })
        }
    }
}

/// Render a snapshot as a fenced state block.
pub fn state_block(snapshot: &WorldSnapshot, mode: RenderMode) -> String {
    format!("{STATE_FENCE}\n{}```", serialize_snapshot(snapshot, mode))
}

fn device_states_block(states: &[DeviceState]) -> String {
    let mut environment = None;
    let mut devices = BTreeMap::new();
    for state in states {
        if state.device_id == "environment" {
            environment = Some(state.clone());
        } else {
            devices.insert(state.device_id.clone(), state.clone());
        }
    }
    let snapshot = WorldSnapshot {
        environment: environment.unwrap_or_else(|| DeviceState::new("environment")),
        devices,
        timestamp_label: String::new(),
    };
    state_block(&snapshot, RenderMode::Full)
}

/// Compose the feedback message an agent sees after executing an action.
/// In state-patch mode the refreshed device states are appended.
pub fn compose_feedback(feedback: &ExecutionFeedback, mode: Mode) -> ChatMessage {
    let mut content = String::from("Execution feedback:\n");
    for (index, outcome) in feedback.results.iter().enumerate() {
        match outcome {
            StepOutcome::Call { call, result } => {
                let status = if result.success { "ok" } else { "error" };
                content.push_str(&format!("{}. {call} -> {status}: {}\n", index + 1, result.message));
                if let Some(payload) = &result.payload {
                    content.push_str(&format!("   payload: {payload}\n"));
                }
            }
            StepOutcome::Patch {
                path,
                applied,
                message,
            } => {
                let status = if *applied { "applied" } else { "rejected" };
                content.push_str(&format!("{}. {path} -> {status}: {message}\n", index + 1));
            }
        }
    }
    if !feedback.logs.is_empty() {
        content.push_str("logs:\n");
        content.push_str(&feedback.logs);
        content.push('\n');
    }
    if mode == Mode::Sfc {
        if let Some(states) = &feedback.post_state {
            content.push_str("Current device states:\n");
            content.push_str(&device_states_block(states));
            content.push('\n');
        }
    }
    ChatMessage {
        role: Role::User,
        content,
    }
}

/// Drop every fenced state block except the newest one, keeping all
/// prose. Idempotent.
pub fn manage_context(history: &mut [ChatMessage]) {
    let total: usize = history
        .iter()
        .map(|m| count_state_blocks(&m.content))
        .sum();
    if total <= 1 {
        return;
    }
    let mut to_strip = total - 1;
    for message in history.iter_mut() {
        if to_strip == 0 {
            break;
        }
        let (stripped, remaining) = strip_state_blocks(&message.content, to_strip);
        message.content = stripped;
        to_strip = remaining;
    }
}

fn count_state_blocks(content: &str) -> usize {
    let mut count = 0;
    let mut rest = content;
    while let Some(start) = rest.find(STATE_FENCE) {
        let after = &rest[start + STATE_FENCE.len()..];
        match after.find("```") {
            Some(end) => {
                count += 1;
                rest = &after[end + 3..];
            }
            None => break,
        }
    }
    count
}

/// Replace up to `limit` state blocks with a placeholder, front to back.
/// Returns the rewritten content and the remaining strip budget.
fn strip_state_blocks(content: &str, mut limit: usize) -> (String, usize) {
    let mut out = String::with_capacity(content.len());
    let mut rest = content;
    while limit > 0 {
        let Some(start) = rest.find(STATE_FENCE) else {
            break;
        };
        let after = &rest[start + STATE_FENCE.len()..];
        let Some(end) = after.find("```") else {
            break;
        };
        out.push_str(&rest[..start]);
        out.push_str(STALE_STATE_PLACEHOLDER);
        rest = &after[end + 3..];
        limit -= 1;
    }
    out.push_str(rest);
    (out, limit)
}
