//! Builtin device set: the global environment pseudo-device plus eleven
//! cockpit devices spanning Multimedia, Touch Control, Car Control, and
//! Light. All of them are expressed in the declarative definition
//! framework, so custom devices defined in JSON files sit alongside
//! these on equal footing.

use crate::environment::GlobalEnvironment;
use crate::registry::{
    arg, arg_or, constant, ApiDefinition, ApiSpec, AttributeTemplate, DeviceDefinition, Domain,
    Effect, ParamKind, ParamSpec, Registry,
};
use crate::value::{AttrValue, TypeTag};
use std::collections::BTreeMap;

fn api(
    device: &str,
    name: &str,
    description: &str,
    params: Vec<ParamSpec>,
    required_sets: Vec<Vec<&str>>,
    effects: Vec<Effect>,
) -> ApiDefinition {
    ApiDefinition {
        spec: ApiSpec {
            api_name: name.into(),
            device_id: device.into(),
            description: description.into(),
            params,
            required_sets: required_sets
                .into_iter()
                .map(|set| set.into_iter().map(str::to_string).collect())
                .collect(),
        },
        effects,
    }
}

fn set_attr(attr: &str, value: crate::registry::ValueSource) -> Effect {
    Effect::SetAttr {
        attr: attr.into(),
        value,
    }
}

fn preset<const N: usize>(pairs: [(&str, AttrValue); N]) -> BTreeMap<String, AttrValue> {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Volume `value`/`degree` parameter pair for absolute set APIs.
fn volume_set_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::new("value", ParamKind::Integer).in_group("amount"),
        ParamSpec::new("degree", ParamKind::Enum)
            .with_values(["max", "high", "medium", "low", "min"])
            .in_group("amount"),
    ]
}

/// Volume `value`/`degree` parameter pair for relative shift APIs.
fn volume_shift_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::new("value", ParamKind::Integer).in_group("amount"),
        ParamSpec::new("degree", ParamKind::Enum)
            .with_values(["large", "little", "tiny"])
            .in_group("amount"),
    ]
}

fn environment_device() -> DeviceDefinition {
    let probe = GlobalEnvironment::default().as_device_state();
    let attributes = probe
        .attributes
        .values()
        .map(|d| AttributeTemplate::new(&d.name, d.type_tag, d.value.clone(), &d.description))
        .collect();
    DeviceDefinition {
        device_id: "environment".into(),
        description: "Global shared state: volume, sound channel, cabin temperature, speaker zone, units, clock format".into(),
        domain: Domain::CarControl,
        attributes,
        apis: vec![],
        init_presets: BTreeMap::new(),
        channel_flag: None,
    }
}

fn navigation() -> DeviceDefinition {
    let id = "navigation";
    DeviceDefinition {
        device_id: id.into(),
        description: "Route guidance with destination and waypoint control".into(),
        domain: Domain::TouchControl,
        attributes: vec![
            AttributeTemplate::new("is_active", TypeTag::Boolean, false, "Whether route guidance is running"),
            AttributeTemplate::new("destination", TypeTag::String, AttrValue::Null, "Current destination, null when idle"),
            AttributeTemplate::new("midway", TypeTag::String, AttrValue::Null, "Waypoint on the current route, null when none"),
        ],
        apis: vec![
            api(
                id,
                "navigation_route_start",
                "Start navigating to a destination, optionally via a waypoint",
                vec![
                    ParamSpec::new("destination", ParamKind::String).required(),
                    ParamSpec::new("midway", ParamKind::String),
                ],
                vec![],
                vec![
                    set_attr("is_active", constant(true)),
                    set_attr("destination", arg("destination")),
                    set_attr("midway", arg_or("midway", AttrValue::Null)),
                    Effect::AcquireChannel,
                ],
            ),
            api(
                id,
                "navigation_route_stop",
                "Stop route guidance and clear the route",
                vec![],
                vec![],
                vec![
                    set_attr("is_active", constant(false)),
                    set_attr("destination", constant(AttrValue::Null)),
                    set_attr("midway", constant(AttrValue::Null)),
                    Effect::ReleaseChannel,
                ],
            ),
            api(
                id,
                "navigation_route_view",
                "Query the current route",
                vec![],
                vec![],
                vec![
                    Effect::QueryAttr { attr: "is_active".into() },
                    Effect::QueryAttr { attr: "destination".into() },
                    Effect::QueryAttr { attr: "midway".into() },
                ],
            ),
            api(
                id,
                "navigation_soundVolume_set",
                "Set volume (0-100); must provide either value or degree",
                volume_set_params(),
                vec![vec!["value", "degree"]],
                vec![Effect::VolumeSet],
            ),
        ],
        init_presets: BTreeMap::from([(
            "en_route_shanghai".to_string(),
            preset([
                ("is_active", AttrValue::Bool(true)),
                ("destination", AttrValue::text("Shanghai")),
                ("midway", AttrValue::text("Nanjing")),
            ]),
        )]),
        channel_flag: Some("is_active".into()),
    }
}

fn video() -> DeviceDefinition {
    let id = "video";
    DeviceDefinition {
        device_id: id.into(),
        description: "Rear-seat video playback".into(),
        domain: Domain::Multimedia,
        attributes: vec![
            AttributeTemplate::new("is_playing", TypeTag::Boolean, false, "Whether a video is playing"),
            AttributeTemplate::new("quality", TypeTag::String, "1080P", "Playback quality")
                .with_values(["720P", "1080P", "4K"]),
            AttributeTemplate::new("current_video", TypeTag::String, AttrValue::Null, "Title of the loaded video, null when none"),
        ],
        apis: vec![
            api(
                id,
                "video_playback_play",
                "Play a video; resumes the loaded one when no title is given",
                vec![ParamSpec::new("video", ParamKind::String)],
                vec![],
                vec![
                    set_attr("is_playing", constant(true)),
                    set_attr("current_video", arg("video")),
                    Effect::AcquireChannel,
                ],
            ),
            api(
                id,
                "video_playback_pause",
                "Pause playback",
                vec![],
                vec![],
                vec![
                    set_attr("is_playing", constant(false)),
                    Effect::ReleaseChannel,
                ],
            ),
            api(
                id,
                "video_quality_set",
                "Set playback quality",
                vec![ParamSpec::new("quality", ParamKind::Enum)
                    .with_values(["720P", "1080P", "4K"])
                    .required()],
                vec![],
                vec![set_attr("quality", arg("quality"))],
            ),
        ],
        init_presets: BTreeMap::from([
            ("idle_1080p".to_string(), preset([
                ("is_playing", AttrValue::Bool(false)),
                ("quality", AttrValue::text("1080P")),
                ("current_video", AttrValue::Null),
            ])),
            ("playing_documentary".to_string(), preset([
                ("is_playing", AttrValue::Bool(true)),
                ("quality", AttrValue::text("4K")),
                ("current_video", AttrValue::text("Blue Planet")),
            ])),
        ]),
        channel_flag: Some("is_playing".into()),
    }
}

fn music() -> DeviceDefinition {
    let id = "music";
    DeviceDefinition {
        device_id: id.into(),
        description: "Music playback from the onboard library".into(),
        domain: Domain::Multimedia,
        attributes: vec![
            AttributeTemplate::new("is_playing", TypeTag::Boolean, false, "Whether music is playing"),
            AttributeTemplate::new("current_song", TypeTag::String, AttrValue::Null, "Song loaded in the player, null when none"),
            AttributeTemplate::new("play_mode", TypeTag::String, "order", "Track sequencing mode")
                .with_values(["order", "shuffle", "repeat_one"]),
            AttributeTemplate::new(
                "playlist",
                TypeTag::List,
                AttrValue::list_of_texts(["Bohemian Rhapsody", "Hotel California", "Take Five"]),
                "Queued songs",
            ),
        ],
        apis: vec![
            api(
                id,
                "music_playback_play",
                "Play music; resumes the loaded song when no title is given",
                vec![ParamSpec::new("song", ParamKind::String)],
                vec![],
                vec![
                    set_attr("is_playing", constant(true)),
                    set_attr("current_song", arg("song")),
                    Effect::AcquireChannel,
                ],
            ),
            api(
                id,
                "music_playback_pause",
                "Pause music playback",
                vec![],
                vec![],
                vec![
                    set_attr("is_playing", constant(false)),
                    Effect::ReleaseChannel,
                ],
            ),
            api(
                id,
                "music_playMode_set",
                "Set the track sequencing mode",
                vec![ParamSpec::new("mode", ParamKind::Enum)
                    .with_values(["order", "shuffle", "repeat_one"])
                    .required()],
                vec![],
                vec![set_attr("play_mode", arg("mode"))],
            ),
            api(
                id,
                "music_soundVolume_set",
                "Set volume (0-100); must provide either value or degree",
                volume_set_params(),
                vec![vec!["value", "degree"]],
                vec![Effect::VolumeSet],
            ),
            api(
                id,
                "music_soundVolume_increase",
                "Increase volume (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::VolumeShift { sign: 1 }],
            ),
            api(
                id,
                "music_soundVolume_decrease",
                "Decrease volume (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::VolumeShift { sign: -1 }],
            ),
        ],
        init_presets: BTreeMap::from([(
            "playing_jazz".to_string(),
            preset([
                ("is_playing", AttrValue::Bool(true)),
                ("current_song", AttrValue::text("Take Five")),
            ]),
        )]),
        channel_flag: Some("is_playing".into()),
    }
}

fn air_conditioner() -> DeviceDefinition {
    let id = "airConditioner";
    DeviceDefinition {
        device_id: id.into(),
        description: "Cabin climate control".into(),
        domain: Domain::CarControl,
        attributes: vec![
            AttributeTemplate::new("is_on", TypeTag::Boolean, false, "Whether the air conditioner is running"),
            AttributeTemplate::new("temperature", TypeTag::Real, 24.0, "Target temperature in degrees Celsius, 16-32")
                .with_range(16.0, 32.0)
                .mirrored_to(crate::registry::EnvField::Temperature),
            AttributeTemplate::new("mode", TypeTag::String, "auto", "Operating mode")
                .with_values(["cool", "heat", "auto", "fan"]),
            AttributeTemplate::new("fan_speed", TypeTag::Integer, 2_i64, "Fan speed level, 1-5")
                .with_range(1.0, 5.0),
        ],
        apis: vec![
            api(
                id,
                "airConditioner_power_switch",
                "Turn the air conditioner on or off",
                vec![ParamSpec::new("switch", ParamKind::Boolean).required()],
                vec![],
                vec![set_attr("is_on", arg("switch"))],
            ),
            api(
                id,
                "airConditioner_temperature_set",
                "Set the target temperature (16-32 degrees Celsius)",
                vec![ParamSpec::new("value", ParamKind::Real)
                    .required()
                    .with_range(16.0, 32.0)],
                vec![],
                vec![set_attr("temperature", arg("value"))],
            ),
            api(
                id,
                "airConditioner_mode_set",
                "Set the operating mode",
                vec![ParamSpec::new("mode", ParamKind::Enum)
                    .with_values(["cool", "heat", "auto", "fan"])
                    .required()],
                vec![],
                vec![set_attr("mode", arg("mode"))],
            ),
            api(
                id,
                "airConditioner_fanSpeed_set",
                "Set the fan speed (1-5)",
                vec![ParamSpec::new("value", ParamKind::Integer)
                    .required()
                    .with_range(1.0, 5.0)],
                vec![],
                vec![set_attr("fan_speed", arg("value"))],
            ),
            api(
                id,
                "airConditioner_state_view",
                "Query the climate control state",
                vec![],
                vec![],
                vec![
                    Effect::QueryAttr { attr: "is_on".into() },
                    Effect::QueryAttr { attr: "temperature".into() },
                    Effect::QueryAttr { attr: "mode".into() },
                    Effect::QueryAttr { attr: "fan_speed".into() },
                ],
            ),
        ],
        init_presets: BTreeMap::from([
            ("off_default".to_string(), preset([("is_on", AttrValue::Bool(false))])),
            ("cooling_20".to_string(), preset([
                ("is_on", AttrValue::Bool(true)),
                ("temperature", AttrValue::Real(20.0)),
                ("mode", AttrValue::text("cool")),
            ])),
        ]),
        channel_flag: None,
    }
}

fn door() -> DeviceDefinition {
    let id = "door";
    DeviceDefinition {
        device_id: id.into(),
        description: "Door lock and open/close state".into(),
        domain: Domain::CarControl,
        attributes: vec![
            AttributeTemplate::new("is_locked", TypeTag::Boolean, false, "Whether the doors are locked"),
            AttributeTemplate::new("status", TypeTag::String, "closed", "Door position")
                .with_values(["open", "closed"]),
        ],
        apis: vec![
            api(
                id,
                "door_lock_switch",
                "Lock or unlock the doors",
                vec![ParamSpec::new("switch", ParamKind::Boolean).required()],
                vec![],
                vec![set_attr("is_locked", arg("switch"))],
            ),
            api(
                id,
                "door_status_set",
                "Open or close the doors",
                vec![ParamSpec::new("status", ParamKind::Enum)
                    .with_values(["open", "closed"])
                    .required()],
                vec![],
                vec![set_attr("status", arg("status"))],
            ),
        ],
        init_presets: BTreeMap::from([
            ("parked_open".to_string(), preset([("status", AttrValue::text("open"))])),
            ("locked_closed".to_string(), preset([("is_locked", AttrValue::Bool(true))])),
        ]),
        channel_flag: None,
    }
}

/// The conversation device carries exactly the fifteen documented phone
/// and messaging APIs, including the `conversation_contact_hag_view`
/// name kept verbatim.
fn conversation() -> DeviceDefinition {
    let id = "conversation";
    DeviceDefinition {
        device_id: id.into(),
        description: "Phone calls, messaging, and contacts".into(),
        domain: Domain::TouchControl,
        attributes: vec![
            AttributeTemplate::new("in_call", TypeTag::Boolean, false, "Whether a call is active"),
            AttributeTemplate::new("active_contact", TypeTag::String, AttrValue::Null, "Contact on the active call, null when idle"),
            AttributeTemplate::new("hands_free", TypeTag::Boolean, false, "Whether hands-free mode is enabled"),
            AttributeTemplate::new(
                "contacts",
                TypeTag::List,
                AttrValue::list_of_texts(["Alice", "Bob", "Charlie"]),
                "Address book entries",
            ),
            AttributeTemplate::new(
                "messages",
                TypeTag::List,
                AttrValue::list_of_texts(["Alice: Running late, see you at 7"]),
                "Received messages as \"sender: content\"",
            ),
            AttributeTemplate::new("sent_messages", TypeTag::List, AttrValue::List(vec![]), "Sent messages as \"recipient: content\""),
            AttributeTemplate::new(
                "missed_calls",
                TypeTag::List,
                AttrValue::list_of_texts(["Dave"]),
                "Contacts with missed calls",
            ),
            AttributeTemplate::new(
                "call_record",
                TypeTag::List,
                AttrValue::list_of_texts(["Bob", "Alice"]),
                "Call history, most recent last",
            ),
        ],
        apis: vec![
            api(
                id,
                "conversation_soundVolume_increase",
                "Increase volume (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::VolumeShift { sign: 1 }],
            ),
            api(
                id,
                "conversation_soundVolume_decrease",
                "Decrease volume (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::VolumeShift { sign: -1 }],
            ),
            api(
                id,
                "conversation_soundVolume_set",
                "Set volume (0-100); must provide either value or degree",
                volume_set_params(),
                vec![vec!["value", "degree"]],
                vec![Effect::VolumeSet],
            ),
            api(
                id,
                "conversation_phone_call",
                "Make a phone call",
                vec![ParamSpec::new("contact", ParamKind::String).required()],
                vec![],
                vec![
                    set_attr("in_call", constant(true)),
                    set_attr("active_contact", arg("contact")),
                    Effect::AppendJoined {
                        attr: "call_record".into(),
                        sources: vec![arg("contact")],
                        sep: ": ".into(),
                    },
                    Effect::AcquireChannel,
                ],
            ),
            api(
                id,
                "conversation_phone_redial",
                "Redial phone",
                vec![],
                vec![],
                vec![
                    Effect::RequireNonEmptyList { attr: "call_record".into() },
                    Effect::SetAttrFromListLast {
                        attr: "active_contact".into(),
                        from: "call_record".into(),
                    },
                    set_attr("in_call", constant(true)),
                    Effect::AcquireChannel,
                ],
            ),
            api(
                id,
                "conversation_phone_answer",
                "Answer phone",
                vec![],
                vec![],
                vec![
                    set_attr("in_call", constant(true)),
                    Effect::AcquireChannel,
                ],
            ),
            api(
                id,
                "conversation_phone_hangup",
                "Hang up phone",
                vec![],
                vec![],
                vec![
                    set_attr("in_call", constant(false)),
                    set_attr("active_contact", constant(AttrValue::Null)),
                    Effect::ReleaseChannel,
                ],
            ),
            api(
                id,
                "conversation_message_send",
                "Send SMS",
                vec![
                    ParamSpec::new("contact", ParamKind::String).required(),
                    ParamSpec::new("content", ParamKind::String),
                ],
                vec![],
                vec![Effect::AppendJoined {
                    attr: "sent_messages".into(),
                    sources: vec![arg("contact"), arg_or("content", "")],
                    sep: ": ".into(),
                }],
            ),
            api(
                id,
                "conversation_message_view",
                "View SMS",
                vec![ParamSpec::new("contact", ParamKind::String)],
                vec![],
                vec![Effect::QueryListFiltered {
                    attr: "messages".into(),
                    prefix_arg: "contact".into(),
                }],
            ),
            api(
                id,
                "conversation_contact_view",
                "Find contact",
                vec![ParamSpec::new("contact", ParamKind::String).required()],
                vec![],
                vec![Effect::QueryContains {
                    attr: "contacts".into(),
                    arg: "contact".into(),
                }],
            ),
            api(
                id,
                "conversation_call_miss_view",
                "View missed calls",
                vec![],
                vec![],
                vec![Effect::QueryAttr { attr: "missed_calls".into() }],
            ),
            api(
                id,
                "conversation_call_record_view",
                "View call history",
                vec![],
                vec![],
                vec![Effect::QueryAttr { attr: "call_record".into() }],
            ),
            api(
                id,
                "conversation_contact_hag_view",
                "Query user's contact list",
                vec![],
                vec![],
                vec![Effect::QueryAttr { attr: "contacts".into() }],
            ),
            api(
                id,
                "conversation_call_handsFree_switch",
                "Hands-free switch",
                vec![ParamSpec::new("switch", ParamKind::Boolean).required()],
                vec![],
                vec![set_attr("hands_free", arg("switch"))],
            ),
            api(
                id,
                "conversation_contact_delete",
                "Delete contact",
                vec![ParamSpec::new("contact", ParamKind::String).required()],
                vec![],
                vec![Effect::RemoveFromList {
                    attr: "contacts".into(),
                    value: arg("contact"),
                }],
            ),
        ],
        init_presets: BTreeMap::from([(
            "fresh_pairing".to_string(),
            preset([
                ("contacts", AttrValue::List(vec![])),
                ("messages", AttrValue::List(vec![])),
                ("missed_calls", AttrValue::List(vec![])),
                ("call_record", AttrValue::List(vec![])),
            ]),
        )]),
        channel_flag: Some("in_call".into()),
    }
}

fn radio() -> DeviceDefinition {
    let id = "radio";
    DeviceDefinition {
        device_id: id.into(),
        description: "FM radio receiver".into(),
        domain: Domain::Multimedia,
        attributes: vec![
            AttributeTemplate::new("is_playing", TypeTag::Boolean, false, "Whether the radio is playing"),
            AttributeTemplate::new("frequency", TypeTag::Real, 90.0, "Tuned FM frequency in MHz, 87.5-108.0")
                .with_range(87.5, 108.0),
            AttributeTemplate::new("station", TypeTag::String, AttrValue::Null, "Name of the tuned station, null when unknown"),
        ],
        apis: vec![
            api(
                id,
                "radio_playback_switch",
                "Turn radio playback on or off",
                vec![ParamSpec::new("switch", ParamKind::Boolean).required()],
                vec![],
                vec![
                    set_attr("is_playing", arg("switch")),
                    Effect::ChannelBySwitch { arg: "switch".into() },
                ],
            ),
            api(
                id,
                "radio_frequency_set",
                "Tune to an FM frequency (87.5-108.0 MHz)",
                vec![ParamSpec::new("value", ParamKind::Real)
                    .required()
                    .with_range(87.5, 108.0)],
                vec![],
                vec![set_attr("frequency", arg("value"))],
            ),
            api(
                id,
                "radio_station_set",
                "Set the station name shown on the display",
                vec![ParamSpec::new("station", ParamKind::String).required()],
                vec![],
                vec![set_attr("station", arg("station"))],
            ),
        ],
        init_presets: BTreeMap::from([(
            "morning_news".to_string(),
            preset([
                ("is_playing", AttrValue::Bool(true)),
                ("frequency", AttrValue::Real(95.5)),
                ("station", AttrValue::text("News FM")),
            ]),
        )]),
        channel_flag: Some("is_playing".into()),
    }
}

fn ambient_light() -> DeviceDefinition {
    let id = "ambientLight";
    DeviceDefinition {
        device_id: id.into(),
        description: "Interior ambient lighting".into(),
        domain: Domain::Light,
        attributes: vec![
            AttributeTemplate::new("is_on", TypeTag::Boolean, false, "Whether the ambient light is on"),
            AttributeTemplate::new("color", TypeTag::String, "white", "Light color")
                .with_values(["white", "red", "blue", "green", "purple", "orange"]),
            AttributeTemplate::new("brightness", TypeTag::Integer, 60_i64, "Brightness percentage, 0-100")
                .with_range(0.0, 100.0),
        ],
        apis: vec![
            api(
                id,
                "ambientLight_power_switch",
                "Turn the ambient light on or off",
                vec![ParamSpec::new("switch", ParamKind::Boolean).required()],
                vec![],
                vec![set_attr("is_on", arg("switch"))],
            ),
            api(
                id,
                "ambientLight_color_set",
                "Set the light color",
                vec![ParamSpec::new("color", ParamKind::Enum)
                    .with_values(["white", "red", "blue", "green", "purple", "orange"])
                    .required()],
                vec![],
                vec![set_attr("color", arg("color"))],
            ),
            api(
                id,
                "ambientLight_brightness_set",
                "Set brightness (0-100)",
                vec![ParamSpec::new("value", ParamKind::Integer)
                    .required()
                    .with_range(0.0, 100.0)],
                vec![],
                vec![set_attr("brightness", arg("value"))],
            ),
            api(
                id,
                "ambientLight_brightness_increase",
                "Increase brightness (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::ShiftAttr { attr: "brightness".into(), sign: 1 }],
            ),
            api(
                id,
                "ambientLight_brightness_decrease",
                "Decrease brightness (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::ShiftAttr { attr: "brightness".into(), sign: -1 }],
            ),
        ],
        init_presets: BTreeMap::from([(
            "evening_purple".to_string(),
            preset([
                ("is_on", AttrValue::Bool(true)),
                ("color", AttrValue::text("purple")),
                ("brightness", AttrValue::Int(40)),
            ]),
        )]),
        channel_flag: None,
    }
}

fn seat() -> DeviceDefinition {
    let id = "seat";
    DeviceDefinition {
        device_id: id.into(),
        description: "Driver seat comfort settings".into(),
        domain: Domain::CarControl,
        attributes: vec![
            AttributeTemplate::new("heating_level", TypeTag::Integer, 0_i64, "Seat heating level, 0-3")
                .with_range(0.0, 3.0),
            AttributeTemplate::new("ventilation_level", TypeTag::Integer, 0_i64, "Seat ventilation level, 0-3")
                .with_range(0.0, 3.0),
            AttributeTemplate::new("position", TypeTag::String, "upright", "Backrest position")
                .with_values(["upright", "relaxed", "flat"]),
        ],
        apis: vec![
            api(
                id,
                "seat_heating_set",
                "Set seat heating level (0-3, 0 is off)",
                vec![ParamSpec::new("level", ParamKind::Integer)
                    .required()
                    .with_range(0.0, 3.0)],
                vec![],
                vec![set_attr("heating_level", arg("level"))],
            ),
            api(
                id,
                "seat_ventilation_set",
                "Set seat ventilation level (0-3, 0 is off)",
                vec![ParamSpec::new("level", ParamKind::Integer)
                    .required()
                    .with_range(0.0, 3.0)],
                vec![],
                vec![set_attr("ventilation_level", arg("level"))],
            ),
            api(
                id,
                "seat_position_set",
                "Set the backrest position",
                vec![ParamSpec::new("position", ParamKind::Enum)
                    .with_values(["upright", "relaxed", "flat"])
                    .required()],
                vec![],
                vec![set_attr("position", arg("position"))],
            ),
        ],
        init_presets: BTreeMap::from([(
            "winter_warm".to_string(),
            preset([("heating_level", AttrValue::Int(2))]),
        )]),
        channel_flag: None,
    }
}

fn window() -> DeviceDefinition {
    let id = "window";
    DeviceDefinition {
        device_id: id.into(),
        description: "Driver window position and lock".into(),
        domain: Domain::CarControl,
        attributes: vec![
            AttributeTemplate::new("position", TypeTag::Integer, 0_i64, "Opening percentage, 0 closed to 100 fully open")
                .with_range(0.0, 100.0),
            AttributeTemplate::new("is_locked", TypeTag::Boolean, false, "Whether the window controls are locked"),
        ],
        apis: vec![
            api(
                id,
                "window_position_set",
                "Set the window opening (0-100)",
                vec![ParamSpec::new("value", ParamKind::Integer)
                    .required()
                    .with_range(0.0, 100.0)],
                vec![],
                vec![set_attr("position", arg("value"))],
            ),
            api(
                id,
                "window_position_increase",
                "Open the window further (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::ShiftAttr { attr: "position".into(), sign: 1 }],
            ),
            api(
                id,
                "window_position_decrease",
                "Close the window partway (0-100); use value or degree, defaults to degree \"little\"",
                volume_shift_params(),
                vec![],
                vec![Effect::ShiftAttr { attr: "position".into(), sign: -1 }],
            ),
            api(
                id,
                "window_lock_switch",
                "Lock or unlock the window controls",
                vec![ParamSpec::new("switch", ParamKind::Boolean).required()],
                vec![],
                vec![set_attr("is_locked", arg("switch"))],
            ),
        ],
        init_presets: BTreeMap::from([(
            "half_open".to_string(),
            preset([("position", AttrValue::Int(50))]),
        )]),
        channel_flag: None,
    }
}

fn wiper() -> DeviceDefinition {
    let id = "wiper";
    DeviceDefinition {
        device_id: id.into(),
        description: "Windshield wiper".into(),
        domain: Domain::CarControl,
        attributes: vec![
            AttributeTemplate::new("is_on", TypeTag::Boolean, false, "Whether the wipers are running"),
            AttributeTemplate::new("speed", TypeTag::Integer, 1_i64, "Wiper speed level, 1-3")
                .with_range(1.0, 3.0),
        ],
        apis: vec![
            api(
                id,
                "wiper_power_switch",
                "Turn the wipers on or off",
                vec![ParamSpec::new("switch", ParamKind::Boolean).required()],
                vec![],
                vec![set_attr("is_on", arg("switch"))],
            ),
            api(
                id,
                "wiper_speed_set",
                "Set the wiper speed (1-3)",
                vec![ParamSpec::new("value", ParamKind::Integer)
                    .required()
                    .with_range(1.0, 3.0)],
                vec![],
                vec![set_attr("speed", arg("value"))],
            ),
        ],
        init_presets: BTreeMap::from([(
            "rain_high".to_string(),
            preset([
                ("is_on", AttrValue::Bool(true)),
                ("speed", AttrValue::Int(3)),
            ]),
        )]),
        channel_flag: None,
    }
}

/// Registry with the full builtin device set.
pub fn builtin_registry() -> Registry {
    let mut registry = Registry::empty();
    for device in [
        environment_device(),
        navigation(),
        video(),
        music(),
        air_conditioner(),
        door(),
        conversation(),
        radio(),
        ambient_light(),
        seat(),
        window(),
        wiper(),
    ] {
        registry
            .register(device)
            .expect("builtin definitions are valid");
    }
    registry
}
