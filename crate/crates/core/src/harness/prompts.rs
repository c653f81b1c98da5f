//! Prompt templates for the three execution paradigms.
//!
//! Every template has a base instruction section and an examples section;
//! the no-examples strategy strips the latter. State blocks are fenced
//! as ```state and actions as ```action so the extractor and the context
//! manager can find them.

use super::{SessionConfig, Strategy};

/// Marker prefix the harness puts in front of every user query message.
pub const QUERY_PREFIX: &str = "Query:";
/// Marker prefix for reflection prompts.
pub const REFLECTION_PREFIX: &str = "Reflection";

pub const PLAN_PREAMBLE: &str = "Before acting, write a short numbered plan of the steps you \
will take, then follow it.\n\n";

const FC_BASE: &str = "You are the in-car assistant controlling cockpit devices through \
named APIs.\n\
Work step by step:\n\
1. Call search_module() to list devices, and search_api(device_id=\"<id>\") to read a \
device's API documentation.\n\
2. Fulfill the user's request by emitting API calls.\n\
3. After each execution you receive feedback; recover from errors if needed.\n\
4. When the request is fully handled, reply with the single word: done.\n\
\n\
Emit every action as a fenced block tagged `action` containing `fc:` and a bracketed call \
list:\n\
```action\n\
fc: [api_name(arg=value, ...), ...]\n\
```\n\
Strings are quoted, booleans are true/false, and null clears a value. Only emit one action \
block per reply.\n";

const FC_EXAMPLES: &str = "\nExample dialogue:\n\
User: Query: lock the doors\n\
Assistant:\n\
```action\n\
fc: [search_api(device_id=\"door\")]\n\
```\n\
User: Execution feedback: 1. search_api(device_id=\"door\") -> ok\n\
Assistant:\n\
```action\n\
fc: [door_lock_switch(switch=true)]\n\
```\n\
User: Execution feedback: 1. door_lock_switch(switch=true) -> ok: executed door_lock_switch\n\
Assistant: done\n";

const SFC_BASE: &str = "You are the in-car assistant. You see the current device states as \
a JSON document and fulfill the user's request by predicting the target state and emitting \
the state transition as a patch.\n\
\n\
Emit the patch as a fenced block tagged `action` containing `sfc:` and an object mapping \
attribute paths to target values:\n\
```action\n\
sfc: {device.attribute: value, ...}\n\
```\n\
Paths are `device_id.attribute`; shared attributes live under `environment`. Change only \
what the request requires. After execution you receive per-path results plus the updated \
states. When the request is fully handled, reply with the single word: done.\n";

const SFC_EXAMPLES: &str = "\nExample dialogue:\n\
User: Query: set the volume to 80\n\
```state\n\
{\"environment\": {\"volume\": {\"value\": 50, \"type\": \"integer\", \"description\": \"...\"}}}\n\
```\n\
Assistant:\n\
```action\n\
sfc: {environment.volume: 80}\n\
```\n\
User: Execution feedback: environment.volume = 80 -> applied\n\
Assistant: done\n";

const SELECT_BASE: &str = "You are the in-car assistant. Below is the full state of every \
device. Read the user's request and select the devices that must be inspected or operated \
to fulfill it.\n\
\n\
Reply with a fenced block tagged `action` containing `select:` and a device list:\n\
```action\n\
select: [device_id, ...]\n\
```\n\
Select every device the request touches and nothing else.\n";

const SELECT_EXAMPLES: &str = "\nExample:\n\
User: Query: cool the cabin to 20 degrees\n\
Assistant:\n\
```action\n\
select: [airConditioner]\n\
```\n";

const HYBRID_BASE: &str = "You are the in-car assistant. The relevant devices have already \
been selected; their API documentation and current states follow. Fulfill the user's \
request by emitting API calls scoped to those devices.\n\
\n\
Emit every action as a fenced block tagged `action` containing `fc:` and a bracketed call \
list:\n\
```action\n\
fc: [api_name(arg=value, ...), ...]\n\
```\n\
When the request is fully handled, reply with the single word: done.\n";

const HYBRID_EXAMPLES: &str = "\nExample dialogue:\n\
User: Query: close the window\n\
Assistant:\n\
```action\n\
fc: [window_position_set(value=0)]\n\
```\n\
User: Execution feedback: 1. window_position_set(value=0) -> ok\n\
Assistant: done\n";

fn compose(base: &str, examples: &str, config: &SessionConfig) -> String {
    let mut prompt = String::new();
    if config.plan_first {
        prompt.push_str(PLAN_PREAMBLE);
    }
    prompt.push_str(base);
    if config.strategy != Strategy::ReactNoExamples {
        prompt.push_str(examples);
    }
    prompt
}

pub fn fc_system(config: &SessionConfig) -> String {
    compose(FC_BASE, FC_EXAMPLES, config)
}

pub fn sfc_system(config: &SessionConfig) -> String {
    compose(SFC_BASE, SFC_EXAMPLES, config)
}

pub fn selection_system(config: &SessionConfig) -> String {
    compose(SELECT_BASE, SELECT_EXAMPLES, config)
}

pub fn hybrid_system(config: &SessionConfig) -> String {
    compose(HYBRID_BASE, HYBRID_EXAMPLES, config)
}
