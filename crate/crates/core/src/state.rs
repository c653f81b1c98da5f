//! World-state document model: snapshots, canonical serialization,
//! state diffing, and trend classification.
//!
//! A [`WorldSnapshot`] is the complete serialized state of a set of
//! devices plus the global environment at one instant. Snapshots render
//! to canonical JSON (sorted keys, stable number formatting) so that
//! identical snapshots always produce byte-identical text, and they
//! parse back to structurally identical values.

use crate::value::{AttrValue, TypeTag};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Reserved top-level key carrying the snapshot's turn label.
const TURN_KEY: &str = "_turn";

/// Flat identity of one attribute: `device_id.attr_name`.
/// Nested sub-attributes are flattened into the name (`route.midway`),
/// so the path has exactly one device segment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttrPath(pub String);

impl AttrPath {
    pub fn new(device_id: &str, attr: &str) -> Self {
        AttrPath(format!("{device_id}.{attr}"))
    }

    /// Split into (device_id, attribute name). The device segment is
    /// everything before the first `.`.
    pub fn split(&self) -> Option<(&str, &str)> {
        self.0.split_once('.')
    }

    pub fn device(&self) -> &str {
        self.split().map(|(d, _)| d).unwrap_or(&self.0)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AttrPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AttrPath {
    fn from(s: &str) -> Self {
        AttrPath(s.to_string())
    }
}

/// One device attribute: current value, declared type, human description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDescriptor {
    pub name: String,
    pub value: AttrValue,
    #[serde(rename = "type")]
    pub type_tag: TypeTag,
    pub description: String,
}

impl AttributeDescriptor {
    pub fn new(
        name: impl Into<String>,
        value: impl Into<AttrValue>,
        type_tag: TypeTag,
        description: impl Into<String>,
    ) -> Self {
        AttributeDescriptor {
            name: name.into(),
            value: value.into(),
            type_tag,
            description: description.into(),
        }
    }
}

/// State of one device: its id and the ordered attribute map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    pub device_id: String,
    pub attributes: BTreeMap<String, AttributeDescriptor>,
}

impl DeviceState {
    pub fn new(device_id: impl Into<String>) -> Self {
        DeviceState {
            device_id: device_id.into(),
            attributes: BTreeMap::new(),
        }
    }

    pub fn get(&self, attr: &str) -> Option<&AttrValue> {
        self.attributes.get(attr).map(|d| &d.value)
    }
}

/// Rendering mode for snapshot documents.
///
/// `Full` renders each attribute as `{value, type, description}`; this is
/// the default representation shown to agents. `Compact` renders bare
/// `name: value` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    #[default]
    Full,
    Compact,
}

/// Complete serialized state: global environment plus devices, labeled
/// with a turn identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub environment: DeviceState,
    pub devices: BTreeMap<String, DeviceState>,
    pub timestamp_label: String,
}

impl WorldSnapshot {
    /// All attribute paths in this snapshot (environment included).
    pub fn paths(&self) -> BTreeSet<AttrPath> {
        self.blocks()
            .flat_map(|dev| {
                dev.attributes
                    .keys()
                    .map(|a| AttrPath::new(&dev.device_id, a))
            })
            .collect()
    }

    /// Environment block followed by device blocks.
    pub fn blocks(&self) -> impl Iterator<Item = &DeviceState> {
        std::iter::once(&self.environment).chain(self.devices.values())
    }

    pub fn device_ids(&self) -> BTreeSet<String> {
        self.devices.keys().cloned().collect()
    }

    pub fn value_at(&self, path: &AttrPath) -> Option<&AttrValue> {
        let (device, attr) = path.split()?;
        let block = if device == self.environment.device_id {
            &self.environment
        } else {
            self.devices.get(device)?
        };
        block.get(attr)
    }

    /// Restrict to a device subset. The environment block is always kept.
    pub fn project(&self, ids: &BTreeSet<String>) -> WorldSnapshot {
        WorldSnapshot {
            environment: self.environment.clone(),
            devices: self
                .devices
                .iter()
                .filter(|(id, _)| ids.contains(*id))
                .map(|(id, st)| (id.clone(), st.clone()))
                .collect(),
            timestamp_label: self.timestamp_label.clone(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> WorldSnapshot {
        self.timestamp_label = label.into();
        self
    }
}

/// Direction of a numeric attribute change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendDirection {
    Increase,
    Decrease,
    Maintain,
}

impl fmt::Display for TrendDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TrendDirection::Increase => "increase",
            TrendDirection::Decrease => "decrease",
            TrendDirection::Maintain => "maintain",
        };
        f.write_str(s)
    }
}

/// Classify the direction of change between two numeric values.
pub fn classify_trend(before: &AttrValue, after: &AttrValue) -> Result<TrendDirection, StateError> {
    let (b, a) = match (before.as_number(), after.as_number()) {
        (Some(b), Some(a)) => (b, a),
        _ => {
            return Err(StateError::NonNumericTrend {
                before: before.render(),
                after: after.render(),
            })
        }
    };
    Ok(if a > b {
        TrendDirection::Increase
    } else if a < b {
        TrendDirection::Decrease
    } else {
        TrendDirection::Maintain
    })
}

/// Difference between two snapshots over their shared attribute paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDiff {
    /// Paths whose values differ, with (before, after).
    pub changed: BTreeMap<AttrPath, (AttrValue, AttrValue)>,
    /// Paths whose values are identical.
    pub unchanged: BTreeSet<AttrPath>,
    /// Trend per changed path, present only where both sides are numeric.
    pub trend_per_changed: BTreeMap<AttrPath, TrendDirection>,
}

impl StateDiff {
    pub fn changed_paths(&self) -> BTreeSet<AttrPath> {
        self.changed.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.changed.is_empty()
    }
}

/// Compute the diff of two snapshots covering the same device set.
pub fn diff_snapshots(before: &WorldSnapshot, after: &WorldSnapshot) -> Result<StateDiff, StateError> {
    let before_ids = before.device_ids();
    let after_ids = after.device_ids();
    if before_ids != after_ids {
        return Err(StateError::DeviceSetMismatch {
            left: before_ids.into_iter().collect::<Vec<_>>().join(", "),
            right: after_ids.into_iter().collect::<Vec<_>>().join(", "),
        });
    }

    let mut changed = BTreeMap::new();
    let mut unchanged = BTreeSet::new();
    let mut trend_per_changed = BTreeMap::new();

    let shared: BTreeSet<AttrPath> = before
        .paths()
        .intersection(&after.paths())
        .cloned()
        .collect();
    for path in shared {
        let b = before.value_at(&path).expect("path from shared set");
        let a = after.value_at(&path).expect("path from shared set");
        if b == a {
            unchanged.insert(path);
        } else {
            if let Ok(trend) = classify_trend(b, a) {
                trend_per_changed.insert(path.clone(), trend);
            }
            changed.insert(path, (b.clone(), a.clone()));
        }
    }

    Ok(StateDiff {
        changed,
        unchanged,
        trend_per_changed,
    })
}

/// Errors from snapshot serialization, parsing, and diffing.
#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error("document syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("environment required: document has no `environment` block")]
    EnvironmentMissing,
    #[error("device sets differ: [{left}] vs [{right}]")]
    DeviceSetMismatch { left: String, right: String },
    #[error("trend requires numeric values, got {before} -> {after}")]
    NonNumericTrend { before: String, after: String },
}

/// Schema lookup used when parsing snapshot documents: declared type and
/// description for every attribute of every known device.
pub trait StateSchema {
    fn is_known_device(&self, device_id: &str) -> bool;
    /// Declared (type tag, description) for `device_id.attr`, if any.
    fn attribute_schema(&self, device_id: &str, attr: &str) -> Option<(TypeTag, String)>;
    /// Declared attribute names for a device, in canonical order.
    fn attribute_names(&self, device_id: &str) -> Vec<String>;
}

/// Serialize a snapshot to its canonical document form.
///
/// Keys are sorted within every block, integers carry no decimal point,
/// reals use the shortest round-trippable representation. Identical
/// snapshots therefore always serialize to byte-identical text.
pub fn serialize_snapshot(snapshot: &WorldSnapshot, mode: RenderMode) -> String {
    let mut root = serde_json::Map::new();
    if !snapshot.timestamp_label.is_empty() {
        root.insert(
            TURN_KEY.to_string(),
            serde_json::Value::String(snapshot.timestamp_label.clone()),
        );
    }
    for block in snapshot.blocks() {
        root.insert(block.device_id.clone(), render_block(block, mode));
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(root))
        .expect("snapshot serialization cannot fail");
    text.push('\n');
    text
}

fn render_block(device: &DeviceState, mode: RenderMode) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (name, descriptor) in &device.attributes {
        let rendered = match mode {
            RenderMode::Compact => descriptor.value.to_json(),
            RenderMode::Full => {
                let mut attr = serde_json::Map::new();
                attr.insert("value".into(), descriptor.value.to_json());
                attr.insert(
                    "type".into(),
                    serde_json::Value::String(descriptor.type_tag.to_string()),
                );
                attr.insert(
                    "description".into(),
                    serde_json::Value::String(descriptor.description.clone()),
                );
                serde_json::Value::Object(attr)
            }
        };
        map.insert(name.clone(), rendered);
    }
    serde_json::Value::Object(map)
}

/// Parse a snapshot document, validating device ids, attribute sets, and
/// type tags against `schema`. Accepts both full and compact renderings.
pub fn parse_snapshot(text: &str, schema: &dyn StateSchema) -> Result<WorldSnapshot, StateError> {
    let root: serde_json::Value =
        serde_json::from_str(text).map_err(|e| StateError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let root = root.as_object().ok_or_else(|| StateError::Schema {
        path: "<root>".into(),
        message: "document root must be an object of device blocks".into(),
    })?;

    let mut label = String::new();
    let mut environment = None;
    let mut devices = BTreeMap::new();

    for (key, value) in root {
        if key == TURN_KEY {
            label = value
                .as_str()
                .ok_or_else(|| StateError::Schema {
                    path: TURN_KEY.into(),
                    message: "turn label must be a string".into(),
                })?
                .to_string();
            continue;
        }
        if !schema.is_known_device(key) {
            return Err(StateError::Schema {
                path: key.clone(),
                message: format!("unknown device id `{key}`"),
            });
        }
        let block = parse_block(key, value, schema)?;
        if key == "environment" {
            environment = Some(block);
        } else {
            devices.insert(key.clone(), block);
        }
    }

    let environment = environment.ok_or(StateError::EnvironmentMissing)?;
    Ok(WorldSnapshot {
        environment,
        devices,
        timestamp_label: label,
    })
}

fn parse_block(
    device_id: &str,
    value: &serde_json::Value,
    schema: &dyn StateSchema,
) -> Result<DeviceState, StateError> {
    let obj = value.as_object().ok_or_else(|| StateError::Schema {
        path: device_id.to_string(),
        message: "device block must be an object".into(),
    })?;

    let mut state = DeviceState::new(device_id);
    for (attr, raw) in obj {
        let path = format!("{device_id}.{attr}");
        let (tag, description) =
            schema
                .attribute_schema(device_id, attr)
                .ok_or_else(|| StateError::Schema {
                    path: path.clone(),
                    message: format!("attribute `{attr}` is not declared for `{device_id}`"),
                })?;
        let (value_json, doc_description) = match raw {
            serde_json::Value::Object(fields) => {
                // Full rendering: {value, type, description}.
                let declared = fields.get("type").and_then(|t| t.as_str());
                if let Some(declared) = declared {
                    if declared != tag.to_string() {
                        return Err(StateError::Schema {
                            path: path.clone(),
                            message: format!(
                                "type tag `{declared}` does not match declared `{tag}`"
                            ),
                        });
                    }
                }
                let value = fields.get("value").ok_or_else(|| StateError::Schema {
                    path: path.clone(),
                    message: "full-mode attribute object requires a `value` field".into(),
                })?;
                let doc = fields
                    .get("description")
                    .and_then(|d| d.as_str())
                    .map(str::to_string);
                (value, doc)
            }
            other => (other, None),
        };
        let value = AttrValue::from_json(value_json, tag).ok_or_else(|| StateError::Schema {
            path: path.clone(),
            message: format!("value {value_json} does not match declared type `{tag}`"),
        })?;
        state.attributes.insert(
            attr.clone(),
            AttributeDescriptor {
                name: attr.clone(),
                value,
                type_tag: tag,
                description: doc_description.unwrap_or(description),
            },
        );
    }

    // A block must cover exactly the declared attribute set.
    for declared in schema.attribute_names(device_id) {
        if !state.attributes.contains_key(&declared) {
            return Err(StateError::Schema {
                path: format!("{device_id}.{declared}"),
                message: "declared attribute missing from block".into(),
            });
        }
    }

    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FixedSchema;

    impl StateSchema for FixedSchema {
        fn is_known_device(&self, device_id: &str) -> bool {
            matches!(device_id, "environment" | "navigation" | "video")
        }

        fn attribute_schema(&self, device_id: &str, attr: &str) -> Option<(TypeTag, String)> {
            let tag = match (device_id, attr) {
                ("environment", "volume") => TypeTag::Integer,
                ("navigation", "is_active") => TypeTag::Boolean,
                ("navigation", "destination") | ("navigation", "midway") => TypeTag::String,
                ("video", "is_playing") => TypeTag::Boolean,
                ("video", "quality") | ("video", "current_video") => TypeTag::String,
                _ => return None,
            };
            Some((tag, format!("{device_id} {attr}")))
        }

        fn attribute_names(&self, device_id: &str) -> Vec<String> {
            match device_id {
                "environment" => vec!["volume".into()],
                "navigation" => vec!["is_active".into(), "destination".into(), "midway".into()],
                "video" => vec![
                    "current_video".into(),
                    "is_playing".into(),
                    "quality".into(),
                ],
                _ => vec![],
            }
        }
    }

    fn descriptor(device: &str, name: &str, value: AttrValue, tag: TypeTag) -> AttributeDescriptor {
        AttributeDescriptor::new(name, value, tag, format!("{device} {name}"))
    }

    fn env_block(volume: i64) -> DeviceState {
        let mut env = DeviceState::new("environment");
        env.attributes.insert(
            "volume".into(),
            descriptor("environment", "volume", AttrValue::Int(volume), TypeTag::Integer),
        );
        env
    }

    fn navigation_block(active: bool, destination: AttrValue, midway: AttrValue) -> DeviceState {
        let mut nav = DeviceState::new("navigation");
        nav.attributes.insert(
            "is_active".into(),
            descriptor("navigation", "is_active", AttrValue::Bool(active), TypeTag::Boolean),
        );
        nav.attributes.insert(
            "destination".into(),
            descriptor("navigation", "destination", destination, TypeTag::String),
        );
        nav.attributes.insert(
            "midway".into(),
            descriptor("navigation", "midway", midway, TypeTag::String),
        );
        nav
    }

    fn snapshot(volume: i64) -> WorldSnapshot {
        let mut devices = BTreeMap::new();
        devices.insert(
            "navigation".to_string(),
            navigation_block(true, "Shanghai".into(), "Nanjing".into()),
        );
        WorldSnapshot {
            environment: env_block(volume),
            devices,
            timestamp_label: "turn_1".into(),
        }
    }

    #[test]
    fn serialize_contains_navigation_fields() {
        let text = serialize_snapshot(&snapshot(80), RenderMode::Compact);
        assert!(text.contains("\"is_active\": true"));
        assert!(text.contains("\"destination\": \"Shanghai\""));
        assert!(text.contains("\"midway\": \"Nanjing\""));
    }

    #[test]
    fn empty_world_serializes_environment_only() {
        let snap = WorldSnapshot {
            environment: env_block(50),
            devices: BTreeMap::new(),
            timestamp_label: String::new(),
        };
        let text = serialize_snapshot(&snap, RenderMode::Compact);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = parsed.as_object().unwrap().keys().collect();
        assert_eq!(keys, vec!["environment"]);
    }

    #[test]
    fn round_trip_identity_both_modes() {
        for mode in [RenderMode::Full, RenderMode::Compact] {
            let snap = snapshot(80);
            let text = serialize_snapshot(&snap, mode);
            let reparsed = parse_snapshot(&text, &FixedSchema).unwrap();
            assert_eq!(reparsed, snap);
            assert_eq!(serialize_snapshot(&reparsed, mode), text);
        }
    }

    #[test]
    fn parse_rejects_type_mismatch() {
        let text = r#"{"environment": {"volume": 50}, "navigation": {"is_active": "true", "destination": null, "midway": null}}"#;
        let err = parse_snapshot(text, &FixedSchema).unwrap_err();
        match err {
            StateError::Schema { path, .. } => assert_eq!(path, "navigation.is_active"),
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn parse_requires_environment() {
        let text = r#"{"navigation": {"is_active": true, "destination": null, "midway": null}}"#;
        let err = parse_snapshot(text, &FixedSchema).unwrap_err();
        assert!(matches!(err, StateError::EnvironmentMissing));
    }

    #[test]
    fn parse_reports_syntax_position() {
        let err = parse_snapshot("{\n  \"environment\": {,}\n}", &FixedSchema).unwrap_err();
        match err {
            StateError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn diff_volume_change() {
        let diff = diff_snapshots(&snapshot(50), &snapshot(80)).unwrap();
        let path = AttrPath::from("environment.volume");
        assert_eq!(diff.changed.len(), 1);
        assert_eq!(
            diff.changed.get(&path),
            Some(&(AttrValue::Int(50), AttrValue::Int(80)))
        );
        assert_eq!(
            diff.trend_per_changed.get(&path),
            Some(&TrendDirection::Increase)
        );
    }

    #[test]
    fn diff_identity() {
        let diff = diff_snapshots(&snapshot(50), &snapshot(50)).unwrap();
        assert!(diff.changed.is_empty());
        assert_eq!(diff.unchanged.len(), 4);
    }

    #[test]
    fn diff_null_to_value_has_no_trend() {
        let before = {
            let mut s = snapshot(50);
            s.devices.get_mut("navigation").unwrap().attributes.get_mut("midway").unwrap().value =
                AttrValue::Null;
            s
        };
        let diff = diff_snapshots(&before, &snapshot(50)).unwrap();
        let path = AttrPath::from("navigation.midway");
        assert!(diff.changed.contains_key(&path));
        assert!(!diff.trend_per_changed.contains_key(&path));
    }

    #[test]
    fn trend_classification() {
        let inc = classify_trend(&AttrValue::Int(50), &AttrValue::Int(80)).unwrap();
        let dec = classify_trend(&AttrValue::Real(24.0), &AttrValue::Real(20.0)).unwrap();
        let eq = classify_trend(&AttrValue::Int(20), &AttrValue::Int(20)).unwrap();
        assert_eq!(inc, TrendDirection::Increase);
        assert_eq!(dec, TrendDirection::Decrease);
        assert_eq!(eq, TrendDirection::Maintain);
        assert!(classify_trend(&AttrValue::Bool(true), &AttrValue::Bool(false)).is_err());
    }
}
