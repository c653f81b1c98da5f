//! A live world: one global environment plus the runtime state of every
//! registered device, mutated through validated API invocations.
//!
//! Failed invocations never mutate state: effects run against a scratch
//! copy that only commits on success. A world is owned by one logical
//! thread; distinct worlds are fully independent.

use crate::environment::{DeltaDegree, GlobalEnvironment, SetDegree, VolumeCommand, CHANNEL_NONE};
use crate::registry::{
    validate_args, ApiCall, ApiResult, Effect, EnvField, Registry, RegistryError, ValueSource,
};
use crate::state::{AttrPath, DeviceState, RenderMode, WorldSnapshot};
use crate::value::{AttrValue, TypeTag};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

type DeviceValues = BTreeMap<String, BTreeMap<String, AttrValue>>;

/// Mutable world state carried separately from the registry so effects
/// can run on a scratch copy.
#[derive(Debug, Clone, PartialEq)]
struct WorldState {
    env: GlobalEnvironment,
    devices: DeviceValues,
}

#[derive(Debug, Clone)]
pub struct World {
    registry: Arc<Registry>,
    state: WorldState,
    logs: Vec<String>,
}

impl World {
    /// Fresh world with every registered device at its default values.
    pub fn new(registry: Arc<Registry>) -> Self {
        let devices = registry
            .definitions()
            .filter(|d| d.device_id != "environment")
            .map(|d| (d.device_id.clone(), d.defaults()))
            .collect();
        World {
            registry,
            state: WorldState {
                env: GlobalEnvironment::default(),
                devices,
            },
            logs: Vec::new(),
        }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn environment(&self) -> &GlobalEnvironment {
        &self.state.env
    }

    pub fn set_strict_volume(&mut self, strict: bool) {
        self.state.env.strict_volume = strict;
    }

    pub fn device_ids(&self) -> Vec<String> {
        self.state.devices.keys().cloned().collect()
    }

    /// Drain accumulated warnings and notes.
    pub fn take_logs(&mut self) -> Vec<String> {
        let mut logs = std::mem::take(&mut self.logs);
        logs.extend(self.state.env.take_warnings());
        logs
    }

    pub fn value_at(&self, path: &AttrPath) -> Option<AttrValue> {
        let (device, attr) = path.split()?;
        if device == "environment" {
            return self.state.env.as_device_state().get(attr).cloned();
        }
        self.state.devices.get(device)?.get(attr).cloned()
    }

    fn device_state(&self, device_id: &str) -> Option<DeviceState> {
        let values = self.state.devices.get(device_id)?;
        let definition = self.registry.device(device_id).ok()?;
        let mut state = DeviceState::new(device_id);
        for template in &definition.attributes {
            let value = values
                .get(&template.name)
                .cloned()
                .unwrap_or(template.default.clone());
            state.attributes.insert(
                template.name.clone(),
                crate::state::AttributeDescriptor {
                    name: template.name.clone(),
                    value,
                    type_tag: template.type_tag,
                    description: template.description.clone(),
                },
            );
        }
        Some(state)
    }

    /// Snapshot of the full world.
    pub fn snapshot(&self, label: impl Into<String>) -> WorldSnapshot {
        let ids: BTreeSet<String> = self.state.devices.keys().cloned().collect();
        self.snapshot_of(&ids, label)
            .expect("all world devices are registered")
    }

    /// Snapshot restricted to a device subset; the environment block is
    /// always included.
    pub fn snapshot_of(
        &self,
        device_ids: &BTreeSet<String>,
        label: impl Into<String>,
    ) -> Result<WorldSnapshot, RegistryError> {
        let mut devices = BTreeMap::new();
        for id in device_ids {
            if id == "environment" {
                continue;
            }
            let state = self
                .device_state(id)
                .ok_or_else(|| RegistryError::UnknownDevice {
                    device_id: id.clone(),
                })?;
            devices.insert(id.clone(), state);
        }
        Ok(WorldSnapshot {
            environment: self.state.env.as_device_state(),
            devices,
            timestamp_label: label.into(),
        })
    }

    pub fn render(&self, mode: RenderMode, label: &str) -> String {
        crate::state::serialize_snapshot(&self.snapshot(label), mode)
    }

    /// Apply a named preset to one device atomically.
    pub fn init_device(&mut self, device_id: &str, preset: &str) -> Result<(), RegistryError> {
        if device_id == "environment" {
            if preset != "default" {
                return Err(RegistryError::UnknownPreset {
                    device_id: device_id.to_string(),
                    preset: preset.to_string(),
                });
            }
            let strict = self.state.env.strict_volume;
            self.state.env = GlobalEnvironment::default();
            self.state.env.strict_volume = strict;
            return Ok(());
        }

        let definition = self.registry.device(device_id)?;
        let values = definition.preset_values(preset)?;
        let flag_attr = definition.channel_flag.clone();

        let mut scratch = self.state.clone();
        for (attr, value) in &values {
            set_device_attr(&self.registry, &mut scratch, device_id, attr, value.clone())
                .map_err(|message| RegistryError::InvalidDefinition {
                    device_id: device_id.to_string(),
                    message,
                })?;
        }
        // Environment coupling: a preset that turns the device's channel
        // flag on takes the channel; turning it off releases it.
        if let Some(flag) = flag_attr {
            match values.get(&flag).and_then(AttrValue::as_bool) {
                Some(true) => {
                    acquire_channel(&self.registry, &mut scratch, device_id);
                }
                Some(false) => {
                    release_channel(&self.registry, &mut scratch, device_id);
                }
                None => {}
            }
        }
        self.state = scratch;
        Ok(())
    }

    /// Invoke an API. Validation or execution failures are reported in
    /// the result and leave the world untouched.
    pub fn invoke(&mut self, call: &ApiCall) -> ApiResult {
        if Registry::is_utility_api(&call.api_name) {
            return self.invoke_utility(call);
        }

        let api = match self.registry.api(&call.api_name) {
            Ok(api) => api.clone(),
            Err(err) => return ApiResult::failure(err.to_string()),
        };
        if let Err(message) = validate_args(&api.spec, &call.args) {
            return ApiResult::failure(message);
        }

        let mut scratch = self.state.clone();
        let mut ctx = EffectCtx {
            registry: &self.registry,
            device_id: api.spec.device_id.clone(),
            args: &call.args,
            payload: serde_json::Map::new(),
            notes: Vec::new(),
        };
        for effect in &api.effects {
            if let Err(message) = run_effect(effect, &mut ctx, &mut scratch) {
                return ApiResult::failure(message);
            }
        }

        let touched = touched_paths(&self.state, &scratch);
        let warnings = scratch.env.take_warnings();
        self.logs.extend(warnings.iter().cloned());
        self.state = scratch;

        let mut message = format!("executed {}", call.api_name);
        if !ctx.notes.is_empty() {
            message.push_str(": ");
            message.push_str(&ctx.notes.join("; "));
        }
        for warning in &warnings {
            message.push_str("; warning: ");
            message.push_str(warning);
        }
        ApiResult {
            success: true,
            message,
            payload: if ctx.payload.is_empty() {
                None
            } else {
                Some(serde_json::Value::Object(ctx.payload))
            },
            touched_paths: touched,
        }
    }

    fn invoke_utility(&self, call: &ApiCall) -> ApiResult {
        match call.api_name.as_str() {
            "search_module" => {
                let modules = self.registry.search_module();
                let payload: Vec<serde_json::Value> = modules
                    .iter()
                    .map(|(id, description)| {
                        serde_json::json!({"device_id": id, "description": description})
                    })
                    .collect();
                ApiResult {
                    success: true,
                    message: format!("{} modules available", modules.len()),
                    payload: Some(serde_json::Value::Array(payload)),
                    touched_paths: Vec::new(),
                }
            }
            "search_api" => {
                let Some(device_id) = call.args.get("device_id").and_then(|v| v.as_text()) else {
                    return ApiResult::failure(
                        "search_api requires a string `device_id` argument",
                    );
                };
                match self.registry.search_api(device_id) {
                    Ok(specs) => ApiResult {
                        success: true,
                        message: format!("{} APIs for {device_id}", specs.len()),
                        payload: Some(
                            serde_json::to_value(&specs).expect("specs serialize"),
                        ),
                        touched_paths: Vec::new(),
                    },
                    Err(err) => ApiResult::failure(err.to_string()),
                }
            }
            other => ApiResult::failure(format!("unknown utility API `{other}`")),
        }
    }

    /// Grant the sound channel to a registered device, displacing the
    /// previous owner. The displaced device's active flag is forced
    /// false through its own setter.
    pub fn acquire_sound_channel(
        &mut self,
        requester: &str,
    ) -> Result<crate::environment::AcquireResult, RegistryError> {
        if requester == "environment" || !self.registry.contains(requester) {
            return Err(RegistryError::UnknownDevice {
                device_id: requester.to_string(),
            });
        }
        let previous_owner = self.state.env.channel_owner().map(str::to_string);
        acquire_channel(&self.registry, &mut self.state, requester);
        Ok(crate::environment::AcquireResult {
            granted: true,
            previous_owner,
        })
    }

    /// Assign one attribute path through the setter layer, firing
    /// environment couplings and channel arbitration. Used by the state
    /// patch executor.
    pub fn set_attribute_path(
        &mut self,
        path: &AttrPath,
        value: &AttrValue,
    ) -> Result<(), String> {
        let Some((device, attr)) = path.split() else {
            return Err(format!("path `{path}` has no device segment"));
        };
        let mut scratch = self.state.clone();
        if device == "environment" {
            set_environment_attr(&self.registry, &mut scratch, attr, value)?;
        } else {
            if !scratch.devices.contains_key(device) {
                return Err(format!("unknown device `{device}`"));
            }
            set_device_attr(&self.registry, &mut scratch, device, attr, value.clone())?;
        }
        self.state = scratch;
        Ok(())
    }
}

/// Paths whose values differ between two world states.
fn touched_paths(before: &WorldState, after: &WorldState) -> Vec<AttrPath> {
    let mut touched = Vec::new();
    let env_before = before.env.as_device_state();
    let env_after = after.env.as_device_state();
    for (name, descriptor) in &env_after.attributes {
        if env_before.get(name) != Some(&descriptor.value) {
            touched.push(AttrPath::new("environment", name));
        }
    }
    for (device, attrs) in &after.devices {
        let previous = before.devices.get(device);
        for (attr, value) in attrs {
            if previous.and_then(|p| p.get(attr)) != Some(value) {
                touched.push(AttrPath::new(device, attr));
            }
        }
    }
    touched
}

/// The shared attribute setter: type and range validation, closed
/// vocabularies, then the write plus any declared environment mirror.
fn set_device_attr(
    registry: &Registry,
    state: &mut WorldState,
    device_id: &str,
    attr: &str,
    value: AttrValue,
) -> Result<(), String> {
    let definition = registry
        .device(device_id)
        .map_err(|e| e.to_string())?;
    let template = definition
        .attribute(attr)
        .ok_or_else(|| format!("unknown attribute `{device_id}.{attr}`"))?;

    let value = value.coerced_to(template.type_tag);
    if !value.matches(template.type_tag) {
        return Err(format!(
            "`{device_id}.{attr}` expects {}, got {}",
            template.type_tag,
            value.render()
        ));
    }
    if let (Some((lo, hi)), Some(n)) = (template.range, value.as_number()) {
        if n < lo || n > hi {
            return Err(format!("`{device_id}.{attr}` value {n} outside [{lo}, {hi}]"));
        }
    }
    if let (Some(allowed), AttrValue::Text(text)) = (&template.allowed_values, &value) {
        if !allowed.iter().any(|v| v == text) {
            return Err(format!(
                "`{device_id}.{attr}` must be one of {{{}}}",
                allowed.join(", ")
            ));
        }
    }

    if let Some(field) = template.env_mirror {
        apply_env_mirror(&mut state.env, field, &value)?;
    }
    state
        .devices
        .get_mut(device_id)
        .ok_or_else(|| format!("device `{device_id}` not present in world"))?
        .insert(attr.to_string(), value);
    Ok(())
}

fn apply_env_mirror(
    env: &mut GlobalEnvironment,
    field: EnvField,
    value: &AttrValue,
) -> Result<(), String> {
    match field {
        EnvField::Temperature => {
            let n = value
                .as_number()
                .ok_or_else(|| "temperature mirror needs a numeric value".to_string())?;
            env.set_temperature(n).map_err(|e| e.to_string())?;
        }
        EnvField::Volume => {
            let n = value
                .as_int()
                .ok_or_else(|| "volume mirror needs an integer value".to_string())?;
            env.set_volume(VolumeCommand::Absolute { value: n })
                .map_err(|e| e.to_string())?;
        }
        EnvField::Speaker => {
            let text = value
                .as_text()
                .ok_or_else(|| "speaker mirror needs a string value".to_string())?;
            env.set_speaker(text);
        }
        EnvField::UnitSystem => {
            let text = value.as_text().unwrap_or_default();
            let parsed = crate::environment::UnitSystem::parse(text)
                .ok_or_else(|| format!("`{text}` is not a unit system"))?;
            env.set_unit_system(parsed);
        }
        EnvField::TimeFormat => {
            let text = value.as_text().unwrap_or_default();
            let parsed = crate::environment::TimeFormat::parse(text)
                .ok_or_else(|| format!("`{text}` is not a time format"))?;
            env.set_time_format(parsed);
        }
    }
    Ok(())
}

/// Grant the channel to `device_id`, forcing the displaced owner's
/// active flag false through its own setter.
fn acquire_channel(registry: &Registry, state: &mut WorldState, device_id: &str) {
    let result = state.env.acquire_sound_channel(device_id);
    if let Some(previous) = result.previous_owner {
        if previous != device_id {
            relinquish(registry, state, &previous);
        }
    }
}

fn release_channel(registry: &Registry, state: &mut WorldState, device_id: &str) {
    if state.env.release_sound_channel(device_id) {
        relinquish(registry, state, device_id);
    }
}

fn relinquish(registry: &Registry, state: &mut WorldState, device_id: &str) {
    let Ok(definition) = registry.device(device_id) else {
        return;
    };
    let Some(flag) = definition.channel_flag.clone() else {
        return;
    };
    let _ = set_device_attr(registry, state, device_id, &flag, AttrValue::Bool(false));
}

/// Route an environment attribute assignment through the environment's
/// own setters. Out-of-range targets are invariant violations and are
/// rejected rather than clamped.
fn set_environment_attr(
    registry: &Registry,
    state: &mut WorldState,
    attr: &str,
    value: &AttrValue,
) -> Result<(), String> {
    match attr {
        "volume" => {
            let n = value
                .as_int()
                .ok_or_else(|| format!("`environment.volume` expects integer, got {value}"))?;
            if !(crate::environment::VOLUME_MIN..=crate::environment::VOLUME_MAX).contains(&n) {
                return Err(format!("`environment.volume` value {n} outside [0, 100]"));
            }
            state
                .env
                .set_volume(VolumeCommand::Absolute { value: n })
                .map_err(|e| e.to_string())?;
            Ok(())
        }
        "temperature" => {
            let n = value
                .as_number()
                .ok_or_else(|| format!("`environment.temperature` expects real, got {value}"))?;
            state.env.set_temperature(n).map_err(|e| e.to_string())?;
            Ok(())
        }
        "sound_channel" => {
            let owner = value
                .as_text()
                .ok_or_else(|| format!("`environment.sound_channel` expects string, got {value}"))?
                .to_string();
            if owner == CHANNEL_NONE {
                if let Some(previous) = state.env.channel_owner().map(str::to_string) {
                    state.env.release_sound_channel(&previous);
                    relinquish(registry, state, &previous);
                }
                Ok(())
            } else if owner != "environment" && registry.contains(&owner) {
                acquire_channel(registry, state, &owner);
                Ok(())
            } else {
                Err(format!(
                    "`environment.sound_channel` must name a registered device or \"none\", got {value}"
                ))
            }
        }
        "speaker" => {
            let text = value
                .as_text()
                .ok_or_else(|| format!("`environment.speaker` expects string, got {value}"))?;
            state.env.set_speaker(text);
            Ok(())
        }
        "unit_system" => {
            let text = value.as_text().unwrap_or_default();
            let parsed = crate::environment::UnitSystem::parse(text)
                .ok_or_else(|| format!("`environment.unit_system` must be metric or imperial, got {value}"))?;
            state.env.set_unit_system(parsed);
            Ok(())
        }
        "time_format" => {
            let text = value.as_text().unwrap_or_default();
            let parsed = crate::environment::TimeFormat::parse(text)
                .ok_or_else(|| format!("`environment.time_format` must be 12h or 24h, got {value}"))?;
            state.env.set_time_format(parsed);
            Ok(())
        }
        other => Err(format!("unknown attribute `environment.{other}`")),
    }
}

struct EffectCtx<'a> {
    registry: &'a Registry,
    device_id: String,
    args: &'a BTreeMap<String, AttrValue>,
    payload: serde_json::Map<String, serde_json::Value>,
    notes: Vec<String>,
}

impl<'a> EffectCtx<'a> {
    /// Resolve a value source. `Ok(None)` means the optional argument is
    /// absent and the effect should be skipped.
    fn resolve(&self, source: &ValueSource) -> Result<Option<AttrValue>, String> {
        match source {
            ValueSource::Arg { arg } => Ok(self.args.get(arg).cloned()),
            ValueSource::ArgOr { arg, default } => {
                Ok(Some(self.args.get(arg).cloned().unwrap_or(default.clone())))
            }
            ValueSource::Const { value } => Ok(Some(value.clone())),
        }
    }

    fn current(&self, state: &WorldState, attr: &str) -> Result<AttrValue, String> {
        state
            .devices
            .get(&self.device_id)
            .and_then(|d| d.get(attr))
            .cloned()
            .ok_or_else(|| format!("unknown attribute `{}.{attr}`", self.device_id))
    }

    fn current_list(&self, state: &WorldState, attr: &str) -> Result<Vec<AttrValue>, String> {
        match self.current(state, attr)? {
            AttrValue::List(items) => Ok(items),
            other => Err(format!(
                "`{}.{attr}` expected a list, got {other}",
                self.device_id
            )),
        }
    }
}

fn run_effect(
    effect: &Effect,
    ctx: &mut EffectCtx<'_>,
    state: &mut WorldState,
) -> Result<(), String> {
    match effect {
        Effect::SetAttr { attr, value } => {
            let Some(resolved) = ctx.resolve(value)? else {
                return Ok(());
            };
            set_device_attr(ctx.registry, state, &ctx.device_id, attr, resolved)
        }
        Effect::ShiftAttr { attr, sign } => {
            let current = ctx
                .current(state, attr)?
                .as_number()
                .ok_or_else(|| format!("`{}.{attr}` is not numeric", ctx.device_id))?;
            let step = match (ctx.args.get("value"), ctx.args.get("degree")) {
                (Some(v), _) => v
                    .as_number()
                    .ok_or_else(|| "value must be numeric".to_string())?,
                (None, Some(d)) => {
                    let degree = DeltaDegree::parse(d.as_text().unwrap_or_default())
                        .ok_or_else(|| format!("degree {d} is not large/little/tiny"))?;
                    degree.magnitude() as f64
                }
                (None, None) => DeltaDegree::Little.magnitude() as f64,
            };
            let mut target = current + (*sign as f64) * step;
            let definition = ctx.registry.device(&ctx.device_id).map_err(|e| e.to_string())?;
            let template = definition
                .attribute(attr)
                .ok_or_else(|| format!("unknown attribute `{}.{attr}`", ctx.device_id))?;
            if let Some((lo, hi)) = template.range {
                target = target.clamp(lo, hi);
            }
            let value = match template.type_tag {
                TypeTag::Integer => AttrValue::Int(target.round() as i64),
                _ => AttrValue::Real(target),
            };
            ctx.notes.push(format!("{attr} is now {value}"));
            set_device_attr(ctx.registry, state, &ctx.device_id, attr, value)
        }
        Effect::VolumeSet => {
            let command = match (ctx.args.get("value"), ctx.args.get("degree")) {
                (Some(v), _) => VolumeCommand::Absolute {
                    value: v.as_int().ok_or_else(|| "value must be an integer".to_string())?,
                },
                (None, Some(d)) => VolumeCommand::SetDegree {
                    degree: SetDegree::parse(d.as_text().unwrap_or_default())
                        .ok_or_else(|| format!("degree {d} is not a volume level"))?,
                },
                (None, None) => return Err("volume set needs value or degree".to_string()),
            };
            let volume = state.env.set_volume(command).map_err(|e| e.to_string())?;
            ctx.notes.push(format!("volume is now {volume}"));
            Ok(())
        }
        Effect::VolumeShift { sign } => {
            let command = match (ctx.args.get("value"), ctx.args.get("degree")) {
                (Some(v), _) => VolumeCommand::Delta {
                    delta: sign
                        * v.as_int().ok_or_else(|| "value must be an integer".to_string())?,
                },
                (None, Some(d)) => VolumeCommand::DeltaDegree {
                    direction: *sign,
                    degree: DeltaDegree::parse(d.as_text().unwrap_or_default())
                        .ok_or_else(|| format!("degree {d} is not large/little/tiny"))?,
                },
                (None, None) => VolumeCommand::DeltaDegree {
                    direction: *sign,
                    degree: DeltaDegree::Little,
                },
            };
            let volume = state.env.set_volume(command).map_err(|e| e.to_string())?;
            ctx.notes.push(format!("volume is now {volume}"));
            Ok(())
        }
        Effect::AcquireChannel => {
            acquire_channel(ctx.registry, state, &ctx.device_id);
            Ok(())
        }
        Effect::ReleaseChannel => {
            release_channel(ctx.registry, state, &ctx.device_id);
            Ok(())
        }
        Effect::ChannelBySwitch { arg } => {
            match ctx.args.get(arg).and_then(AttrValue::as_bool) {
                Some(true) => acquire_channel(ctx.registry, state, &ctx.device_id),
                Some(false) => release_channel(ctx.registry, state, &ctx.device_id),
                None => return Err(format!("argument `{arg}` must be a boolean")),
            }
            Ok(())
        }
        Effect::AppendJoined { attr, sources, sep } => {
            let mut parts = Vec::new();
            for source in sources {
                if let Some(value) = ctx.resolve(source)? {
                    let part = match &value {
                        AttrValue::Text(s) => s.clone(),
                        other => other.render(),
                    };
                    parts.push(part);
                }
            }
            let mut items = ctx.current_list(state, attr)?;
            items.push(AttrValue::Text(parts.join(sep)));
            set_device_attr(ctx.registry, state, &ctx.device_id, attr, AttrValue::List(items))
        }
        Effect::RemoveFromList { attr, value } => {
            let Some(needle) = ctx.resolve(value)? else {
                return Err("missing value to remove".to_string());
            };
            let mut items = ctx.current_list(state, attr)?;
            let position = items.iter().position(|v| *v == needle).ok_or_else(|| {
                format!("{} not found in `{}.{attr}`", needle, ctx.device_id)
            })?;
            items.remove(position);
            set_device_attr(ctx.registry, state, &ctx.device_id, attr, AttrValue::List(items))
        }
        Effect::RequireNonEmptyList { attr } => {
            if ctx.current_list(state, attr)?.is_empty() {
                Err(format!("`{}.{attr}` is empty", ctx.device_id))
            } else {
                Ok(())
            }
        }
        Effect::SetAttrFromListLast { attr, from } => {
            let items = ctx.current_list(state, from)?;
            let last = items
                .last()
                .cloned()
                .ok_or_else(|| format!("`{}.{from}` is empty", ctx.device_id))?;
            set_device_attr(ctx.registry, state, &ctx.device_id, attr, last)
        }
        Effect::QueryAttr { attr } => {
            let value = ctx.current(state, attr)?;
            ctx.payload.insert(attr.clone(), value.to_json());
            Ok(())
        }
        Effect::QueryListFiltered { attr, prefix_arg } => {
            let items = ctx.current_list(state, attr)?;
            let filtered: Vec<serde_json::Value> = match ctx.args.get(prefix_arg) {
                Some(AttrValue::Text(prefix)) => items
                    .iter()
                    .filter(|v| {
                        v.as_text()
                            .map(|s| s.starts_with(&format!("{prefix}:")))
                            .unwrap_or(false)
                    })
                    .map(AttrValue::to_json)
                    .collect(),
                _ => items.iter().map(AttrValue::to_json).collect(),
            };
            ctx.payload
                .insert(attr.clone(), serde_json::Value::Array(filtered));
            Ok(())
        }
        Effect::QueryContains { attr, arg } => {
            let Some(needle) = ctx.args.get(arg) else {
                return Err(format!("argument `{arg}` is required"));
            };
            let found = ctx.current_list(state, attr)?.contains(needle);
            ctx.payload.insert("query".into(), needle.to_json());
            ctx.payload
                .insert("found".into(), serde_json::Value::Bool(found));
            Ok(())
        }
    }
}
