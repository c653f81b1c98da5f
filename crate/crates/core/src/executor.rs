//! Agent execution paradigms over a live world.
//!
//! Function calls dispatch named APIs in order, continuing past
//! failures. State patches assign target values per attribute path
//! through the same setter layer the APIs use, so environment couplings
//! and channel arbitration fire either way. Hybrid execution scopes
//! function calls to a previously selected device set.

use crate::registry::{ApiCall, ApiResult};
use crate::state::{AttrPath, DeviceState, RenderMode, WorldSnapshot};
use crate::value::AttrValue;
use crate::world::World;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Target-state assignment: attribute path to desired value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatePatch {
    pub assignments: BTreeMap<AttrPath, AttrValue>,
}

impl StatePatch {
    pub fn new() -> Self {
        StatePatch::default()
    }

    pub fn assign(mut self, path: impl Into<AttrPath>, value: impl Into<AttrValue>) -> Self {
        self.assignments.insert(path.into(), value.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Devices referenced by the patch, environment excluded.
    pub fn devices(&self) -> BTreeSet<String> {
        self.assignments
            .keys()
            .map(|p| p.device().to_string())
            .filter(|d| d != "environment")
            .collect()
    }

    /// Canonical single-line rendering `{path: value, ...}`.
    pub fn render(&self) -> String {
        let inner: Vec<String> = self
            .assignments
            .iter()
            .map(|(path, value)| format!("\"{path}\": {}", value.render()))
            .collect();
        format!("{{{}}}", inner.join(", "))
    }
}

/// One action an agent can take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Fc { calls: Vec<ApiCall> },
    Sfc { patch: StatePatch },
    DeviceSelection { devices: Vec<String> },
}

/// Outcome of one executed step: an API call result or a patch path
/// outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum StepOutcome {
    Call { call: String, result: ApiResult },
    Patch {
        path: AttrPath,
        applied: bool,
        message: String,
    },
}

impl StepOutcome {
    pub fn succeeded(&self) -> bool {
        match self {
            StepOutcome::Call { result, .. } => result.success,
            StepOutcome::Patch { applied, .. } => *applied,
        }
    }
}

/// What the agent learns from executing an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionFeedback {
    pub results: Vec<StepOutcome>,
    pub logs: String,
    /// Present in SFC mode: states of the devices the patch touched,
    /// environment included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_state: Option<Vec<DeviceState>>,
}

impl ExecutionFeedback {
    pub fn all_succeeded(&self) -> bool {
        self.results.iter().all(StepOutcome::succeeded)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExecutorError {
    #[error("unknown device `{device_id}` in selection")]
    UnknownDevice { device_id: String },
    #[error("selection must not be empty")]
    EmptySelection,
}

/// Execute a call sequence. Execution continues past failed calls; each
/// failure is captured in the feedback so the agent can recover.
pub fn execute_fc(world: &mut World, calls: &[ApiCall]) -> ExecutionFeedback {
    let mut results = Vec::new();
    for call in calls {
        let result = world.invoke(call);
        results.push(StepOutcome::Call {
            call: call.render(),
            result,
        });
    }
    ExecutionFeedback {
        results,
        logs: world.take_logs().join("\n"),
        post_state: None,
    }
}

/// Apply a state patch path by path. Each path is all-or-nothing with a
/// per-path outcome; a rejected path leaves the other assignments
/// applied. The resulting device states are attached as post state.
pub fn execute_sfc(world: &mut World, patch: &StatePatch) -> ExecutionFeedback {
    let mut results = Vec::new();
    for (path, value) in &patch.assignments {
        let outcome = world.set_attribute_path(path, value);
        results.push(match outcome {
            Ok(()) => StepOutcome::Patch {
                path: path.clone(),
                applied: true,
                message: format!("{path} = {}", value.render()),
            },
            Err(message) => StepOutcome::Patch {
                path: path.clone(),
                applied: false,
                message,
            },
        });
    }

    let devices = patch.devices();
    let post_state = world
        .snapshot_of(&devices, "")
        .map(|snap| snap.blocks().cloned().collect::<Vec<DeviceState>>())
        .unwrap_or_else(|_| vec![world.snapshot("").environment]);

    ExecutionFeedback {
        results,
        logs: world.take_logs().join("\n"),
        post_state: Some(post_state),
    }
}

/// Snapshot restricted to the listed devices plus the environment.
pub fn project_snapshot(
    world: &World,
    device_ids: &[String],
    label: &str,
) -> Result<WorldSnapshot, ExecutorError> {
    let mut ids = BTreeSet::new();
    for id in device_ids {
        if id != "environment" && !world.registry().contains(id) {
            return Err(ExecutorError::UnknownDevice {
                device_id: id.clone(),
            });
        }
        ids.insert(id.clone());
    }
    world
        .snapshot_of(&ids, label)
        .map_err(|_| ExecutorError::UnknownDevice {
            device_id: device_ids.join(","),
        })
}

pub fn project_snapshot_text(
    world: &World,
    device_ids: &[String],
    mode: RenderMode,
    label: &str,
) -> Result<String, ExecutorError> {
    Ok(crate::state::serialize_snapshot(
        &project_snapshot(world, device_ids, label)?,
        mode,
    ))
}

/// Execute calls under a device-selection scope. Calls referencing
/// devices outside the selection are rejected without mutation; the
/// remainder executes as plain function calls. `search_module` is always
/// in scope, `search_api` only for selected devices.
pub fn execute_hybrid(
    world: &mut World,
    selection: &[String],
    calls: &[ApiCall],
) -> Result<ExecutionFeedback, ExecutorError> {
    if selection.is_empty() {
        return Err(ExecutorError::EmptySelection);
    }
    let mut scope = BTreeSet::new();
    for id in selection {
        if !world.registry().contains(id) {
            return Err(ExecutorError::UnknownDevice {
                device_id: id.clone(),
            });
        }
        scope.insert(id.as_str());
    }

    let mut results = Vec::new();
    for call in calls {
        let target: Option<String> = if call.api_name == "search_module" {
            None
        } else if call.api_name == "search_api" {
            call.args
                .get("device_id")
                .and_then(|v| v.as_text())
                .map(str::to_string)
        } else {
            world
                .registry()
                .device_of_api(&call.api_name)
                .map(str::to_string)
        };

        if let Some(device) = &target {
            if !scope.contains(device.as_str()) {
                results.push(StepOutcome::Call {
                    call: call.render(),
                    result: ApiResult::failure(format!(
                        "device `{device}` is outside the selected scope"
                    )),
                });
                continue;
            }
        }
        let result = world.invoke(call);
        results.push(StepOutcome::Call {
            call: call.render(),
            result,
        });
    }

    Ok(ExecutionFeedback {
        results,
        logs: world.take_logs().join("\n"),
        post_state: None,
    })
}
