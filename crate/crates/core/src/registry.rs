//! Declarative device definition framework.
//!
//! A device is described by data, not code: attribute templates, API
//! specs with validated parameters, behavior bindings expressed as
//! [`Effect`] primitives, and named init presets. The same definition
//! schema loads from JSON files, so new devices need no code changes.

use crate::environment::GlobalEnvironment;
use crate::state::{AttrPath, StateSchema};
use crate::value::{AttrValue, TypeTag};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Parameter kind accepted by an API.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Integer,
    Real,
    Boolean,
    String,
    Enum,
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParamKind::Integer => "integer",
            ParamKind::Real => "real",
            ParamKind::Boolean => "boolean",
            ParamKind::String => "string",
            ParamKind::Enum => "enum",
        };
        f.write_str(s)
    }
}

/// One declared API parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    /// Legal values for enum params.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_values: Option<Vec<String>>,
    #[serde(default)]
    pub required: bool,
    /// Params sharing a group are mutually exclusive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusive_group: Option<String>,
    /// Inclusive numeric bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, kind: ParamKind) -> Self {
        ParamSpec {
            name: name.into(),
            kind,
            allowed_values: None,
            required: false,
            exclusive_group: None,
            range: None,
        }
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }

    pub fn with_values<I: IntoIterator<Item = S>, S: Into<String>>(mut self, values: I) -> Self {
        self.allowed_values = Some(values.into_iter().map(Into::into).collect());
        self
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.exclusive_group = Some(group.into());
        self
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }
}

/// Declared API surface of one device method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSpec {
    pub api_name: String,
    pub device_id: String,
    pub description: String,
    pub params: Vec<ParamSpec>,
    /// Each entry is a set of alternatives of which at least one must be
    /// supplied (rendered as "One of: value, degree").
    #[serde(default)]
    pub required_sets: Vec<Vec<String>>,
}

impl ApiSpec {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Human rendering used by the CLI and handed to FC agents as API
    /// documentation.
    pub fn render(&self) -> String {
        let mut out = format!("{}\n  device: {}\n  description: {}\n", self.api_name, self.device_id, self.description);
        if self.params.is_empty() {
            out.push_str("  arguments: none\n");
        } else {
            out.push_str("  arguments:\n");
            for p in &self.params {
                let mut line = format!("    {} ({})", p.name, p.kind);
                if let Some(values) = &p.allowed_values {
                    line.push_str(&format!(": {{{}}}", values.join(", ")));
                }
                if let Some((lo, hi)) = p.range {
                    line.push_str(&format!(", range {lo}-{hi}"));
                }
                if let Some(group) = &p.exclusive_group {
                    let others: Vec<&str> = self
                        .params
                        .iter()
                        .filter(|q| q.exclusive_group.as_deref() == Some(group) && q.name != p.name)
                        .map(|q| q.name.as_str())
                        .collect();
                    if !others.is_empty() {
                        line.push_str(&format!("; exclusive with {}", others.join(", ")));
                    }
                }
                line.push('\n');
                out.push_str(&line);
            }
        }
        let mut required: Vec<String> = self
            .params
            .iter()
            .filter(|p| p.required)
            .map(|p| format!("{{{}}}", p.name))
            .collect();
        for set in &self.required_sets {
            required.push(format!("One of: {}", set.join(", ")));
        }
        if required.is_empty() {
            out.push_str("  required: none\n");
        } else {
            out.push_str(&format!("  required: {}\n", required.join("; ")));
        }
        out
    }
}

/// Where an effect takes its value from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ValueSource {
    /// Call argument; the effect is skipped when the argument is absent.
    Arg { arg: String },
    /// Call argument with a fallback applied when absent.
    ArgOr { arg: String, default: AttrValue },
    /// Fixed value.
    Const { value: AttrValue },
}

pub fn arg(name: &str) -> ValueSource {
    ValueSource::Arg { arg: name.into() }
}

pub fn arg_or(name: &str, default: impl Into<AttrValue>) -> ValueSource {
    ValueSource::ArgOr {
        arg: name.into(),
        default: default.into(),
    }
}

pub fn constant(value: impl Into<AttrValue>) -> ValueSource {
    ValueSource::Const {
        value: value.into(),
    }
}

/// Declarative behavior primitives an API is composed of. Every
/// primitive reads or writes only the owning device's attributes and the
/// global environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Effect {
    /// Write a device attribute through its validated setter.
    SetAttr { attr: String, value: ValueSource },
    /// Shift a numeric attribute by `value` or a delta `degree`
    /// (large/little/tiny = 20/10/5), clamped to the attribute's range.
    ShiftAttr { attr: String, sign: i64 },
    /// Set the global volume from `value` or a set `degree`.
    VolumeSet,
    /// Shift the global volume by `value` or a delta `degree`.
    VolumeShift { sign: i64 },
    /// Take exclusive ownership of the sound channel.
    AcquireChannel,
    /// Release the sound channel if this device holds it.
    ReleaseChannel,
    /// Acquire when the boolean argument is true, release when false.
    ChannelBySwitch { arg: String },
    /// Append the rendered sources, joined by `sep`, to a list attribute.
    AppendJoined {
        attr: String,
        sources: Vec<ValueSource>,
        sep: String,
    },
    /// Remove a value from a list attribute; fails when absent.
    RemoveFromList { attr: String, value: ValueSource },
    /// Fail unless the list attribute is non-empty.
    RequireNonEmptyList { attr: String },
    /// Copy the last element of a list attribute into another attribute.
    SetAttrFromListLast { attr: String, from: String },
    /// Add the attribute's current value to the result payload.
    QueryAttr { attr: String },
    /// Payload entries of a list attribute starting with `"<arg>:"`;
    /// all entries when the argument is absent.
    QueryListFiltered { attr: String, prefix_arg: String },
    /// Payload whether the list attribute contains the argument value.
    QueryContains { attr: String, arg: String },
}

/// Global environment field a device attribute mirrors into when set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvField {
    Volume,
    Temperature,
    Speaker,
    UnitSystem,
    TimeFormat,
}

/// Template for one device attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeTemplate {
    pub name: String,
    #[serde(rename = "type")]
    pub type_tag: TypeTag,
    pub description: String,
    pub default: AttrValue,
    /// Inclusive numeric bounds enforced by the setter layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
    /// Legal values for string attributes with a closed vocabulary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_values: Option<Vec<String>>,
    /// Environment field updated whenever this attribute is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_mirror: Option<EnvField>,
}

impl AttributeTemplate {
    pub fn new(
        name: impl Into<String>,
        type_tag: TypeTag,
        default: impl Into<AttrValue>,
        description: impl Into<String>,
    ) -> Self {
        AttributeTemplate {
            name: name.into(),
            type_tag,
            description: description.into(),
            default: default.into(),
            range: None,
            allowed_values: None,
            env_mirror: None,
        }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    pub fn with_values<I: IntoIterator<Item = S>, S: Into<String>>(mut self, values: I) -> Self {
        self.allowed_values = Some(values.into_iter().map(Into::into).collect());
        self
    }

    pub fn mirrored_to(mut self, field: EnvField) -> Self {
        self.env_mirror = Some(field);
        self
    }
}

/// An API spec together with its behavior binding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiDefinition {
    #[serde(flatten)]
    pub spec: ApiSpec,
    pub effects: Vec<Effect>,
}

/// Functional domain a device belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    Multimedia,
    #[serde(rename = "Touch Control")]
    TouchControl,
    #[serde(rename = "Car Control")]
    CarControl,
    Light,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Multimedia => "Multimedia",
            Domain::TouchControl => "Touch Control",
            Domain::CarControl => "Car Control",
            Domain::Light => "Light",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complete declarative description of one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceDefinition {
    pub device_id: String,
    pub description: String,
    pub domain: Domain,
    pub attributes: Vec<AttributeTemplate>,
    #[serde(default)]
    pub apis: Vec<ApiDefinition>,
    /// Named presets as attribute overrides on the defaults. A "default"
    /// preset (no overrides) always exists implicitly.
    #[serde(default)]
    pub init_presets: BTreeMap<String, BTreeMap<String, AttrValue>>,
    /// Boolean attribute forced false when the device loses the sound
    /// channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_flag: Option<String>,
}

impl DeviceDefinition {
    pub fn attribute(&self, name: &str) -> Option<&AttributeTemplate> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Default attribute values.
    pub fn defaults(&self) -> BTreeMap<String, AttrValue> {
        self.attributes
            .iter()
            .map(|a| (a.name.clone(), a.default.clone()))
            .collect()
    }

    /// Resolved attribute values for a preset.
    pub fn preset_values(
        &self,
        preset: &str,
    ) -> Result<BTreeMap<String, AttrValue>, RegistryError> {
        let mut values = self.defaults();
        if preset == "default" {
            return Ok(values);
        }
        let overrides = self.init_presets.get(preset).ok_or_else(|| {
            RegistryError::UnknownPreset {
                device_id: self.device_id.clone(),
                preset: preset.to_string(),
            }
        })?;
        for (attr, value) in overrides {
            values.insert(attr.clone(), value.clone());
        }
        Ok(values)
    }

    pub fn preset_names(&self) -> Vec<String> {
        let mut names = vec!["default".to_string()];
        names.extend(self.init_presets.keys().cloned());
        names.sort();
        names.dedup();
        names
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown device `{device_id}`")]
    UnknownDevice { device_id: String },
    #[error("unknown API `{api_name}`")]
    UnknownApi { api_name: String },
    #[error("unknown preset `{preset}` for device `{device_id}`")]
    UnknownPreset { device_id: String, preset: String },
    #[error("invalid device definition `{device_id}`: {message}")]
    InvalidDefinition { device_id: String, message: String },
    #[error("device `{device_id}` is already registered")]
    DuplicateDevice { device_id: String },
    #[error("API `{api_name}` is already registered")]
    DuplicateApi { api_name: String },
    #[error("definition file is not valid JSON: {0}")]
    DefinitionSyntax(String),
}

/// A concrete API invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiCall {
    pub api_name: String,
    #[serde(default)]
    pub args: BTreeMap<String, AttrValue>,
}

impl ApiCall {
    pub fn new(api_name: impl Into<String>) -> Self {
        ApiCall {
            api_name: api_name.into(),
            args: BTreeMap::new(),
        }
    }

    pub fn with_arg(mut self, name: impl Into<String>, value: impl Into<AttrValue>) -> Self {
        self.args.insert(name.into(), value.into());
        self
    }

    /// Canonical rendering: `api_name(a=1, b="x")` with args in name order.
    pub fn render(&self) -> String {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|(k, v)| format!("{k}={}", v.render()))
            .collect();
        format!("{}({})", self.api_name, args.join(", "))
    }
}

impl fmt::Display for ApiCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Outcome of an API invocation. Failed calls never mutate state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiResult {
    pub success: bool,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<serde_json::Value>,
    #[serde(default)]
    pub touched_paths: Vec<AttrPath>,
}

impl ApiResult {
    pub fn failure(message: impl Into<String>) -> Self {
        ApiResult {
            success: false,
            message: message.into(),
            payload: None,
            touched_paths: Vec::new(),
        }
    }
}

/// Immutable collection of device definitions shared by worlds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    devices: BTreeMap<String, DeviceDefinition>,
    api_index: BTreeMap<String, String>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn register(&mut self, definition: DeviceDefinition) -> Result<(), RegistryError> {
        validate_definition(&definition)?;
        if self.devices.contains_key(&definition.device_id) {
            return Err(RegistryError::DuplicateDevice {
                device_id: definition.device_id.clone(),
            });
        }
        for api in &definition.apis {
            if self.api_index.contains_key(&api.spec.api_name) {
                return Err(RegistryError::DuplicateApi {
                    api_name: api.spec.api_name.clone(),
                });
            }
        }
        for api in &definition.apis {
            self.api_index
                .insert(api.spec.api_name.clone(), definition.device_id.clone());
        }
        self.devices
            .insert(definition.device_id.clone(), definition);
        Ok(())
    }

    /// Register a device from a JSON definition document.
    pub fn register_json(&mut self, text: &str) -> Result<String, RegistryError> {
        let definition: DeviceDefinition = serde_json::from_str(text)
            .map_err(|e| RegistryError::DefinitionSyntax(e.to_string()))?;
        let id = definition.device_id.clone();
        self.register(definition)?;
        Ok(id)
    }

    pub fn device(&self, device_id: &str) -> Result<&DeviceDefinition, RegistryError> {
        self.devices
            .get(device_id)
            .ok_or_else(|| RegistryError::UnknownDevice {
                device_id: device_id.to_string(),
            })
    }

    pub fn contains(&self, device_id: &str) -> bool {
        self.devices.contains_key(device_id)
    }

    pub fn device_ids(&self) -> Vec<String> {
        self.devices.keys().cloned().collect()
    }

    pub fn definitions(&self) -> impl Iterator<Item = &DeviceDefinition> {
        self.devices.values()
    }

    /// Device ids with one-line descriptions, stable order.
    pub fn search_module(&self) -> Vec<(String, String)> {
        self.devices
            .values()
            .map(|d| (d.device_id.clone(), d.description.clone()))
            .collect()
    }

    /// Full API specs for one device.
    pub fn search_api(&self, device_id: &str) -> Result<Vec<ApiSpec>, RegistryError> {
        let device = self.device(device_id)?;
        Ok(device.apis.iter().map(|a| a.spec.clone()).collect())
    }

    pub fn api(&self, api_name: &str) -> Result<&ApiDefinition, RegistryError> {
        let device_id = self
            .api_index
            .get(api_name)
            .ok_or_else(|| RegistryError::UnknownApi {
                api_name: api_name.to_string(),
            })?;
        let device = self.device(device_id)?;
        device
            .apis
            .iter()
            .find(|a| a.spec.api_name == api_name)
            .ok_or_else(|| RegistryError::UnknownApi {
                api_name: api_name.to_string(),
            })
    }

    /// Device an API belongs to; `None` for the registry-level utility
    /// APIs (`search_module`, `search_api`).
    pub fn device_of_api(&self, api_name: &str) -> Option<&str> {
        self.api_index.get(api_name).map(String::as_str)
    }

    pub fn is_utility_api(api_name: &str) -> bool {
        matches!(api_name, "search_module" | "search_api")
    }

    pub fn resolves(&self, api_name: &str) -> bool {
        Self::is_utility_api(api_name) || self.api_index.contains_key(api_name)
    }
}

impl StateSchema for Registry {
    fn is_known_device(&self, device_id: &str) -> bool {
        self.contains(device_id)
    }

    fn attribute_schema(&self, device_id: &str, attr: &str) -> Option<(TypeTag, String)> {
        if device_id == "environment" {
            return GlobalEnvironment::attribute_schema(attr);
        }
        self.devices
            .get(device_id)?
            .attribute(attr)
            .map(|a| (a.type_tag, a.description.clone()))
    }

    fn attribute_names(&self, device_id: &str) -> Vec<String> {
        if device_id == "environment" {
            return GlobalEnvironment::attribute_names();
        }
        self.devices
            .get(device_id)
            .map(|d| {
                let mut names: Vec<String> =
                    d.attributes.iter().map(|a| a.name.clone()).collect();
                names.sort();
                names
            })
            .unwrap_or_default()
    }
}

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn validate_definition(def: &DeviceDefinition) -> Result<(), RegistryError> {
    let fail = |message: String| RegistryError::InvalidDefinition {
        device_id: def.device_id.clone(),
        message,
    };

    if !valid_identifier(&def.device_id) {
        return Err(fail("device id must be an identifier".into()));
    }
    if def.attributes.is_empty() {
        return Err(fail("device declares no attributes".into()));
    }

    let mut attr_names = BTreeSet::new();
    for attr in &def.attributes {
        if attr.name.is_empty() {
            return Err(fail("attribute name must be non-empty".into()));
        }
        if !attr_names.insert(attr.name.clone()) {
            return Err(fail(format!("duplicate attribute `{}`", attr.name)));
        }
        if !attr.default.matches(attr.type_tag) {
            return Err(fail(format!(
                "default for `{}` does not match type `{}`",
                attr.name, attr.type_tag
            )));
        }
        if attr.range.is_some()
            && !matches!(attr.type_tag, TypeTag::Integer | TypeTag::Real)
        {
            return Err(fail(format!(
                "range declared on non-numeric attribute `{}`",
                attr.name
            )));
        }
    }

    if let Some(flag) = &def.channel_flag {
        match def.attribute(flag) {
            Some(a) if a.type_tag == TypeTag::Boolean => {}
            _ => {
                return Err(fail(format!(
                    "channel flag `{flag}` must be a declared boolean attribute"
                )))
            }
        }
    }

    for api in &def.apis {
        let spec = &api.spec;
        if spec.device_id != def.device_id {
            return Err(fail(format!(
                "API `{}` declares device `{}`",
                spec.api_name, spec.device_id
            )));
        }
        // Naming convention: device prefix plus at least function_action.
        let Some(rest) = spec.api_name.strip_prefix(&format!("{}_", def.device_id)) else {
            return Err(fail(format!(
                "API `{}` must start with `{}_`",
                spec.api_name, def.device_id
            )));
        };
        if !rest.contains('_') {
            return Err(fail(format!(
                "API `{}` must follow device_function_action naming",
                spec.api_name
            )));
        }

        let mut param_names = BTreeSet::new();
        let mut group_sizes: BTreeMap<&str, usize> = BTreeMap::new();
        for param in &spec.params {
            if !param_names.insert(param.name.clone()) {
                return Err(fail(format!(
                    "duplicate param `{}` on `{}`",
                    param.name, spec.api_name
                )));
            }
            match param.kind {
                ParamKind::Enum => {
                    if param.allowed_values.as_deref().is_none_or(|v| v.is_empty()) {
                        return Err(fail(format!(
                            "enum param `{}` on `{}` needs allowed values",
                            param.name, spec.api_name
                        )));
                    }
                }
                ParamKind::Integer | ParamKind::Real => {}
                _ => {
                    if param.range.is_some() {
                        return Err(fail(format!(
                            "range on non-numeric param `{}` of `{}`",
                            param.name, spec.api_name
                        )));
                    }
                }
            }
            if let Some(group) = &param.exclusive_group {
                if param.required {
                    return Err(fail(format!(
                        "param `{}` of `{}` cannot be both required and exclusive",
                        param.name, spec.api_name
                    )));
                }
                *group_sizes.entry(group.as_str()).or_default() += 1;
            }
        }
        for (group, size) in group_sizes {
            if size < 2 {
                return Err(fail(format!(
                    "exclusive group `{group}` on `{}` needs at least 2 members",
                    spec.api_name
                )));
            }
        }
        for set in &spec.required_sets {
            for name in set {
                if !param_names.contains(name) {
                    return Err(fail(format!(
                        "required set references undeclared param `{name}` on `{}`",
                        spec.api_name
                    )));
                }
            }
        }

        for effect in &api.effects {
            validate_effect(def, spec, effect).map_err(fail)?;
        }
    }

    for (preset, overrides) in &def.init_presets {
        for (attr, value) in overrides {
            let template = def
                .attribute(attr)
                .ok_or_else(|| fail(format!("preset `{preset}` sets unknown attribute `{attr}`")))?;
            let coerced = value.clone().coerced_to(template.type_tag);
            if !coerced.matches(template.type_tag) {
                return Err(fail(format!(
                    "preset `{preset}` sets `{attr}` to a value of the wrong type"
                )));
            }
            if let (Some((lo, hi)), Some(n)) = (template.range, coerced.as_number()) {
                if n < lo || n > hi {
                    return Err(fail(format!(
                        "preset `{preset}` sets `{attr}` outside [{lo}, {hi}]"
                    )));
                }
            }
        }
    }

    Ok(())
}

fn validate_effect(
    def: &DeviceDefinition,
    spec: &ApiSpec,
    effect: &Effect,
) -> Result<(), String> {
    let check_attr = |attr: &str, want: Option<TypeTag>| -> Result<(), String> {
        let template = def
            .attribute(attr)
            .ok_or_else(|| format!("effect on `{}` references unknown attribute `{attr}`", spec.api_name))?;
        if let Some(tag) = want {
            if template.type_tag != tag {
                return Err(format!(
                    "effect on `{}` needs `{attr}` to be {tag}",
                    spec.api_name
                ));
            }
        }
        Ok(())
    };
    let check_arg = |name: &str| -> Result<(), String> {
        if spec.param(name).is_none() {
            return Err(format!(
                "effect on `{}` references undeclared arg `{name}`",
                spec.api_name
            ));
        }
        Ok(())
    };
    let check_source = |source: &ValueSource| -> Result<(), String> {
        match source {
            ValueSource::Arg { arg } | ValueSource::ArgOr { arg, .. } => check_arg(arg),
            ValueSource::Const { .. } => Ok(()),
        }
    };

    match effect {
        Effect::SetAttr { attr, value } => {
            check_attr(attr, None)?;
            check_source(value)
        }
        Effect::ShiftAttr { attr, .. } => check_attr(attr, None),
        Effect::VolumeSet | Effect::VolumeShift { .. } => Ok(()),
        Effect::AcquireChannel | Effect::ReleaseChannel => Ok(()),
        Effect::ChannelBySwitch { arg } => check_arg(arg),
        Effect::AppendJoined { attr, sources, .. } => {
            check_attr(attr, Some(TypeTag::List))?;
            sources.iter().try_for_each(check_source)
        }
        Effect::RemoveFromList { attr, value } => {
            check_attr(attr, Some(TypeTag::List))?;
            check_source(value)
        }
        Effect::RequireNonEmptyList { attr } => check_attr(attr, Some(TypeTag::List)),
        Effect::SetAttrFromListLast { attr, from } => {
            check_attr(attr, None)?;
            check_attr(from, Some(TypeTag::List))
        }
        Effect::QueryAttr { attr } => check_attr(attr, None),
        Effect::QueryListFiltered { attr, prefix_arg } => {
            check_attr(attr, Some(TypeTag::List))?;
            check_arg(prefix_arg)
        }
        Effect::QueryContains { attr, arg } => {
            check_attr(attr, Some(TypeTag::List))?;
            check_arg(arg)
        }
    }
}

/// Validate call arguments against a spec. Returns a human-readable
/// message for the first violation found.
pub fn validate_args(spec: &ApiSpec, args: &BTreeMap<String, AttrValue>) -> Result<(), String> {
    for name in args.keys() {
        if spec.param(name).is_none() {
            return Err(format!(
                "unknown argument `{name}` for `{}`",
                spec.api_name
            ));
        }
    }

    for param in &spec.params {
        let Some(value) = args.get(&param.name) else {
            if param.required {
                return Err(format!(
                    "missing required argument `{}` for `{}`",
                    param.name, spec.api_name
                ));
            }
            continue;
        };
        if value.is_null() {
            return Err(format!(
                "argument `{}` of `{}` must not be null",
                param.name, spec.api_name
            ));
        }
        let ok = match param.kind {
            ParamKind::Integer => matches!(value, AttrValue::Int(_)),
            ParamKind::Real => matches!(value, AttrValue::Int(_) | AttrValue::Real(_)),
            ParamKind::Boolean => matches!(value, AttrValue::Bool(_)),
            ParamKind::String | ParamKind::Enum => matches!(value, AttrValue::Text(_)),
        };
        if !ok {
            return Err(format!(
                "argument `{}` of `{}` must be {}",
                param.name, spec.api_name, param.kind
            ));
        }
        if param.kind == ParamKind::Enum {
            let allowed = param.allowed_values.as_deref().unwrap_or(&[]);
            let text = value.as_text().unwrap_or_default();
            if !allowed.iter().any(|v| v == text) {
                return Err(format!(
                    "argument `{}` of `{}` must be one of {{{}}}",
                    param.name,
                    spec.api_name,
                    allowed.join(", ")
                ));
            }
        }
        if let (Some((lo, hi)), Some(n)) = (param.range, value.as_number()) {
            if n < lo || n > hi {
                return Err(format!(
                    "argument `{}` of `{}` out of range [{lo}, {hi}]",
                    param.name, spec.api_name
                ));
            }
        }
    }

    // Mutual exclusion.
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for param in &spec.params {
        if let (Some(group), true) = (&param.exclusive_group, args.contains_key(&param.name)) {
            groups.entry(group.as_str()).or_default().push(&param.name);
        }
    }
    for (_, supplied) in groups {
        if supplied.len() > 1 {
            return Err(format!(
                "exclusive params supplied together for `{}`: {}",
                spec.api_name,
                supplied.join(", ")
            ));
        }
    }

    for set in &spec.required_sets {
        if !set.iter().any(|name| args.contains_key(name)) {
            return Err(format!(
                "`{}` requires one of: {}",
                spec.api_name,
                set.join(", ")
            ));
        }
    }

    Ok(())
}
