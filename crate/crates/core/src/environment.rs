//! Global shared environment: volume, sound channel, cabin temperature,
//! active speaker, unit system, and time format.
//!
//! The cockpit's contended resources live here and nowhere else. Device
//! modules never keep local copies; they read and write through this
//! interface. One environment instance belongs to exactly one world, so
//! parallel worlds stay isolated.

use crate::state::{AttributeDescriptor, DeviceState};
use crate::value::{AttrValue, TypeTag};
use serde::{Deserialize, Serialize};

pub const VOLUME_MIN: i64 = 0;
pub const VOLUME_MAX: i64 = 100;
pub const TEMPERATURE_MIN: f64 = 16.0;
pub const TEMPERATURE_MAX: f64 = 32.0;

/// Channel owner value meaning "nobody holds the channel".
pub const CHANNEL_NONE: &str = "none";

/// Named volume levels for absolute set commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetDegree {
    Max,
    High,
    Medium,
    Low,
    Min,
}

impl SetDegree {
    pub fn value(self) -> i64 {
        match self {
            SetDegree::Max => 100,
            SetDegree::High => 75,
            SetDegree::Medium => 50,
            SetDegree::Low => 25,
            SetDegree::Min => 0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max" => Some(SetDegree::Max),
            "high" => Some(SetDegree::High),
            "medium" => Some(SetDegree::Medium),
            "low" => Some(SetDegree::Low),
            "min" => Some(SetDegree::Min),
            _ => None,
        }
    }
}

/// Named step sizes for relative volume commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaDegree {
    Large,
    Little,
    Tiny,
}

impl DeltaDegree {
    pub fn magnitude(self) -> i64 {
        match self {
            DeltaDegree::Large => 20,
            DeltaDegree::Little => 10,
            DeltaDegree::Tiny => 5,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "large" => Some(DeltaDegree::Large),
            "little" => Some(DeltaDegree::Little),
            "tiny" => Some(DeltaDegree::Tiny),
            _ => None,
        }
    }
}

/// A volume mutation: absolute value, signed delta, or named degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolumeCommand {
    Absolute { value: i64 },
    Delta { delta: i64 },
    SetDegree { degree: SetDegree },
    DeltaDegree { direction: i64, degree: DeltaDegree },
}

/// Outcome of a sound-channel acquisition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcquireResult {
    pub granted: bool,
    /// Previous owner, `None` when the channel was free.
    pub previous_owner: Option<String>,
}

/// Measurement system for rendered quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    #[default]
    Metric,
    Imperial,
}

impl UnitSystem {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitSystem::Metric => "metric",
            UnitSystem::Imperial => "imperial",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "metric" => Some(UnitSystem::Metric),
            "imperial" => Some(UnitSystem::Imperial),
            _ => None,
        }
    }
}

/// Clock display format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TimeFormat {
    #[serde(rename = "12h")]
    H12,
    #[default]
    #[serde(rename = "24h")]
    H24,
}

impl TimeFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeFormat::H12 => "12h",
            TimeFormat::H24 => "24h",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "12h" => Some(TimeFormat::H12),
            "24h" => Some(TimeFormat::H24),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EnvError {
    #[error("volume {value} outside [{VOLUME_MIN}, {VOLUME_MAX}]")]
    VolumeOutOfRange { value: i64 },
    #[error("temperature {value} outside [{TEMPERATURE_MIN}, {TEMPERATURE_MAX}]")]
    TemperatureOutOfRange { value: f64 },
    #[error("sound channel requester `{requester}` is not a registered device")]
    UnregisteredRequester { requester: String },
}

/// Per-world shared state. Mutated by exactly one logical thread at a
/// time (the world's single-writer contract); `&mut` enforces that here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalEnvironment {
    volume: i64,
    sound_channel: String,
    temperature: f64,
    speaker: String,
    unit_system: UnitSystem,
    time_format: TimeFormat,
    /// Reject (instead of clamp) out-of-range absolute volume commands.
    pub strict_volume: bool,
    #[serde(skip)]
    warnings: Vec<String>,
}

impl Default for GlobalEnvironment {
    fn default() -> Self {
        GlobalEnvironment {
            volume: 50,
            sound_channel: CHANNEL_NONE.to_string(),
            temperature: 22.0,
            speaker: "driver's seat".to_string(),
            unit_system: UnitSystem::Metric,
            time_format: TimeFormat::H24,
            strict_volume: false,
            warnings: Vec::new(),
        }
    }
}

impl GlobalEnvironment {
    pub fn volume(&self) -> i64 {
        self.volume
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn speaker(&self) -> &str {
        &self.speaker
    }

    pub fn unit_system(&self) -> UnitSystem {
        self.unit_system
    }

    pub fn time_format(&self) -> TimeFormat {
        self.time_format
    }

    /// Current channel owner, or `None` when the channel is free.
    pub fn channel_owner(&self) -> Option<&str> {
        if self.sound_channel == CHANNEL_NONE {
            None
        } else {
            Some(&self.sound_channel)
        }
    }

    /// Grant the sound channel to `requester`, displacing the previous
    /// owner. The caller is responsible for notifying the displaced
    /// device (see `World::acquire_sound_channel`, which routes the
    /// relinquish callback through the loser's own setter).
    ///
    /// Re-acquiring an already-held channel is a no-op that reports the
    /// requester itself as the previous owner.
    pub fn acquire_sound_channel(&mut self, requester: &str) -> AcquireResult {
        let previous = self.channel_owner().map(str::to_string);
        self.sound_channel = requester.to_string();
        AcquireResult {
            granted: true,
            previous_owner: previous,
        }
    }

    /// Release the channel if `holder` currently owns it.
    pub fn release_sound_channel(&mut self, holder: &str) -> bool {
        if self.channel_owner() == Some(holder) {
            self.sound_channel = CHANNEL_NONE.to_string();
            true
        } else {
            false
        }
    }

    /// Apply a volume command and return the resulting volume.
    ///
    /// Absolute values outside the range clamp with a warning by default
    /// and error in strict mode. Relative commands saturate silently.
    pub fn set_volume(&mut self, command: VolumeCommand) -> Result<i64, EnvError> {
        let target = match command {
            VolumeCommand::Absolute { value } => {
                if !(VOLUME_MIN..=VOLUME_MAX).contains(&value) {
                    if self.strict_volume {
                        return Err(EnvError::VolumeOutOfRange { value });
                    }
                    self.warnings.push(format!(
                        "volume {value} outside [{VOLUME_MIN}, {VOLUME_MAX}], clamped"
                    ));
                }
                value
            }
            VolumeCommand::Delta { delta } => self.volume.saturating_add(delta),
            VolumeCommand::SetDegree { degree } => degree.value(),
            VolumeCommand::DeltaDegree { direction, degree } => self
                .volume
                .saturating_add(direction.signum() * degree.magnitude()),
        };
        self.volume = target.clamp(VOLUME_MIN, VOLUME_MAX);
        Ok(self.volume)
    }

    /// Set cabin temperature; values outside the supported band are rejected.
    pub fn set_temperature(&mut self, value: f64) -> Result<f64, EnvError> {
        if !(TEMPERATURE_MIN..=TEMPERATURE_MAX).contains(&value) || !value.is_finite() {
            return Err(EnvError::TemperatureOutOfRange { value });
        }
        self.temperature = value;
        Ok(self.temperature)
    }

    pub fn set_speaker(&mut self, zone: &str) {
        self.speaker = zone.to_string();
    }

    pub fn set_unit_system(&mut self, unit_system: UnitSystem) {
        self.unit_system = unit_system;
    }

    pub fn set_time_format(&mut self, time_format: TimeFormat) {
        self.time_format = time_format;
    }

    /// Drain warnings accumulated since the last call.
    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    /// Render the environment as a device block so it serializes
    /// uniformly with devices.
    pub fn as_device_state(&self) -> DeviceState {
        let mut state = DeviceState::new("environment");
        let attrs = [
            AttributeDescriptor::new(
                "volume",
                AttrValue::Int(self.volume),
                TypeTag::Integer,
                "System-wide audio volume, 0-100",
            ),
            AttributeDescriptor::new(
                "sound_channel",
                AttrValue::text(&self.sound_channel),
                TypeTag::String,
                "Device currently holding the exclusive audio channel, or \"none\"",
            ),
            AttributeDescriptor::new(
                "temperature",
                AttrValue::Real(self.temperature),
                TypeTag::Real,
                "Cabin temperature in degrees Celsius, 16-32",
            ),
            AttributeDescriptor::new(
                "speaker",
                AttrValue::text(&self.speaker),
                TypeTag::String,
                "Zone the active speaker output is directed to",
            ),
            AttributeDescriptor::new(
                "unit_system",
                AttrValue::text(self.unit_system.as_str()),
                TypeTag::String,
                "Measurement system: metric or imperial",
            ),
            AttributeDescriptor::new(
                "time_format",
                AttrValue::text(self.time_format.as_str()),
                TypeTag::String,
                "Clock display format: 12h or 24h",
            ),
        ];
        for attr in attrs {
            state.attributes.insert(attr.name.clone(), attr);
        }
        state
    }

    /// Names and schema of the environment attributes, used by snapshot
    /// parsing and patch routing.
    pub fn attribute_schema(attr: &str) -> Option<(TypeTag, String)> {
        let probe = GlobalEnvironment::default().as_device_state();
        probe
            .attributes
            .get(attr)
            .map(|d| (d.type_tag, d.description.clone()))
    }

    pub fn attribute_names() -> Vec<String> {
        GlobalEnvironment::default()
            .as_device_state()
            .attributes
            .keys()
            .cloned()
            .collect()
    }
}
