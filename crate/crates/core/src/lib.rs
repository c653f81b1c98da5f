//! Executable intelligent-cockpit simulation and evaluation toolkit.
//!
//! The crate models a vehicle cockpit as a set of typed device modules
//! coupled through a shared global environment, drives it with three
//! agent execution paradigms (function calls, state patches, and a
//! hybrid of the two), and scores agent behavior with state-diff
//! metrics. A scenario pipeline parses tagged task files, executes their
//! ground truth, and replays stored traces deterministically.

pub mod devices;
pub mod harness;
pub mod environment;
pub mod executor;
pub mod metrics;
pub mod parse;
pub mod registry;
pub mod scenario;
pub mod state;
pub mod value;
pub mod world;

pub use devices::builtin_registry;
pub use environment::{AcquireResult, GlobalEnvironment, VolumeCommand};
pub use executor::{execute_fc, execute_hybrid, execute_sfc, project_snapshot, Action, ExecutionFeedback, StatePatch};
pub use metrics::{
    accuracy, aggregate, compute_change_sets, error_rate, f1_negative, f1_positive, jsd,
    rule_based_evaluate, ChangeSets, Distribution, MetricCounters, MetricReport, TurnMetrics,
    TurnReport,
};
pub use registry::{ApiCall, ApiResult, ApiSpec, DeviceDefinition, ParamSpec, Registry};
pub use scenario::{
    execute_truth, parse_scenario, replay_record, save_record, validate_scenario, Scenario,
    ScenarioRecord, Turn, ValidationReport,
};
pub use state::{
    classify_trend, diff_snapshots, parse_snapshot, serialize_snapshot, AttrPath,
    AttributeDescriptor, DeviceState, RenderMode, StateDiff, TrendDirection, WorldSnapshot,
};
pub use value::{AttrValue, TypeTag};
pub use world::World;
