//! Shared test support: seed corpus loading and randomized generation
//! of worlds and valid API arguments.

#![allow(dead_code)]

use cockpit_core::devices::builtin_registry;
use cockpit_core::registry::{ApiCall, ApiSpec, ParamKind, Registry};
use cockpit_core::scenario::{execute_truth, parse_scenario, Scenario, ScenarioRecord};
use cockpit_core::value::AttrValue;
use cockpit_core::world::World;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

pub fn registry() -> Arc<Registry> {
    Arc::new(builtin_registry())
}

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .canonicalize()
        .expect("seed scenario directory exists")
}

/// Load every seed scenario with its source text, sorted by file name.
pub fn load_seeds(registry: &Registry) -> Vec<(String, Scenario)> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .expect("read scenarios dir")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "scn"))
        .collect();
    entries.sort();
    assert!(entries.len() >= 12, "seed corpus must hold at least 12 scenarios");
    entries
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).expect("read seed");
            let scenario = parse_scenario(&text, Some(registry))
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            (text, scenario)
        })
        .collect()
}

pub fn truth_record(scenario: &Scenario, registry: &Arc<Registry>) -> ScenarioRecord {
    let mut world = World::new(registry.clone());
    execute_truth(scenario, &mut world).expect("seed scenarios execute")
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SAMPLE_STRINGS: [&str; 6] = ["Alice", "Bob", "Charlie", "Shanghai", "Nanjing", "News FM"];

/// A random value satisfying one parameter spec.
pub fn random_arg(rng: &mut ChaCha8Rng, spec: &ApiSpec, name: &str) -> AttrValue {
    let param = spec.param(name).expect("declared param");
    match param.kind {
        ParamKind::Boolean => AttrValue::Bool(rng.random_bool(0.5)),
        ParamKind::Integer => {
            let (lo, hi) = param.range.unwrap_or((0.0, 100.0));
            AttrValue::Int(rng.random_range(lo as i64..=hi as i64))
        }
        ParamKind::Real => {
            let (lo, hi) = param.range.unwrap_or((0.0, 100.0));
            // Quantized to one decimal place so values stay friendly.
            let steps = ((hi - lo) * 10.0) as i64;
            AttrValue::Real(lo + rng.random_range(0..=steps) as f64 / 10.0)
        }
        ParamKind::String => {
            AttrValue::text(*SAMPLE_STRINGS.choose(rng).expect("non-empty"))
        }
        ParamKind::Enum => {
            let values = param.allowed_values.as_deref().expect("enum values");
            AttrValue::text(values.choose(rng).expect("non-empty").clone())
        }
    }
}

/// Build a random valid call for an API: required params always
/// supplied, required sets satisfied, at most one member per exclusive
/// group, optional params included at random.
pub fn random_valid_call(rng: &mut ChaCha8Rng, spec: &ApiSpec) -> ApiCall {
    let mut args: BTreeMap<String, AttrValue> = BTreeMap::new();
    let mut used_groups: Vec<String> = Vec::new();

    for param in &spec.params {
        let in_group = param.exclusive_group.clone();
        let mut include = param.required || rng.random_bool(0.5);
        if let Some(group) = &in_group {
            if used_groups.contains(group) {
                include = false;
            }
        }
        if include {
            args.insert(param.name.clone(), random_arg(rng, spec, &param.name));
            if let Some(group) = in_group {
                used_groups.push(group);
            }
        }
    }
    for set in &spec.required_sets {
        if !set.iter().any(|name| args.contains_key(name)) {
            let pick = set.choose(rng).expect("required set non-empty");
            args.insert(pick.clone(), random_arg(rng, spec, pick));
            if let Some(group) = spec
                .param(pick)
                .and_then(|p| p.exclusive_group.clone())
            {
                // Drop any other member of the group we may have added.
                let members: Vec<String> = spec
                    .params
                    .iter()
                    .filter(|p| p.exclusive_group.as_deref() == Some(group.as_str()))
                    .map(|p| p.name.clone())
                    .collect();
                for member in members {
                    if member != *pick {
                        args.remove(&member);
                    }
                }
            }
        }
    }

    ApiCall {
        api_name: spec.api_name.clone(),
        args,
    }
}

/// Randomize a world by applying a handful of random valid calls and
/// presets.
pub fn randomized_world(rng: &mut ChaCha8Rng, registry: &Arc<Registry>) -> World {
    let mut world = World::new(registry.clone());
    let definitions: Vec<_> = registry
        .definitions()
        .filter(|d| d.device_id != "environment")
        .collect();
    for definition in &definitions {
        let presets = definition.preset_names();
        let preset = presets.choose(rng).expect("default exists");
        world
            .init_device(&definition.device_id, preset)
            .expect("presets valid");
    }
    let specs: Vec<ApiSpec> = definitions
        .iter()
        .flat_map(|d| d.apis.iter().map(|a| a.spec.clone()))
        .collect();
    for _ in 0..rng.random_range(0..6) {
        let spec = specs.choose(rng).expect("apis exist");
        let call = random_valid_call(rng, spec);
        world.invoke(&call);
        world.take_logs();
    }
    world
}

/// All setter-style API specs: those whose successful execution is meant
/// to mutate state (query-only APIs excluded).
pub fn setter_specs(registry: &Registry) -> Vec<ApiSpec> {
    registry
        .definitions()
        .flat_map(|d| d.apis.iter())
        .filter(|api| {
            !api.spec.api_name.ends_with("_view") && !api.spec.api_name.ends_with("_query")
        })
        .map(|api| api.spec.clone())
        .collect()
}
