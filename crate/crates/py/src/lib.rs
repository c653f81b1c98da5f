//! Python bindings for the cockpit simulation toolkit: the device
//! registry, live worlds, the scenario pipeline, oracle evaluation
//! sessions, and the metric utilities.

use cockpit_core::devices::builtin_registry;
use cockpit_core::executor::StatePatch;
use cockpit_core::harness::{oracle_agent, run_session, Mode, SessionConfig};
use cockpit_core::metrics;
use cockpit_core::registry::ApiCall;
use cockpit_core::scenario;
use cockpit_core::state::{self, AttrPath, RenderMode};
use cockpit_core::value::AttrValue;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList};
use std::collections::BTreeSet;
use std::sync::Arc;

fn value_error(message: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(message.to_string())
}

fn runtime_error(message: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(message.to_string())
}

fn attr_to_py(py: Python<'_>, value: &AttrValue) -> PyResult<Py<PyAny>> {
    json_to_py(py, &value.to_json())
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any().unbind(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        serde_json::Value::Object(entries) => {
            let dict = PyDict::new(py);
            for (key, item) in entries {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn py_to_attr(value: &Bound<'_, PyAny>) -> PyResult<AttrValue> {
    if value.is_none() {
        return Ok(AttrValue::Null);
    }
    if let Ok(b) = value.cast::<PyBool>() {
        return Ok(AttrValue::Bool(b.is_true()));
    }
    if let Ok(i) = value.extract::<i64>() {
        return Ok(AttrValue::Int(i));
    }
    if let Ok(r) = value.extract::<f64>() {
        return Ok(AttrValue::Real(r));
    }
    if let Ok(s) = value.extract::<String>() {
        return Ok(AttrValue::Text(s));
    }
    if let Ok(list) = value.cast::<PyList>() {
        let mut items = Vec::new();
        for item in list.iter() {
            items.push(py_to_attr(&item)?);
        }
        return Ok(AttrValue::List(items));
    }
    Err(value_error(format!(
        "unsupported attribute value of type {}",
        value.get_type().name()?
    )))
}

fn render_mode(name: &str) -> PyResult<RenderMode> {
    match name {
        "full" => Ok(RenderMode::Full),
        "compact" => Ok(RenderMode::Compact),
        other => Err(value_error(format!("mode must be full or compact, got {other}"))),
    }
}

fn session_mode(name: &str) -> PyResult<Mode> {
    match name {
        "fc" => Ok(Mode::Fc),
        "sfc" => Ok(Mode::Sfc),
        "hybrid" => Ok(Mode::Hybrid),
        other => Err(value_error(format!("mode must be fc, sfc, or hybrid, got {other}"))),
    }
}

/// Device registry: the builtin device set plus any definitions
/// registered from JSON.
#[pyclass(name = "Registry")]
struct PyRegistry {
    inner: Arc<cockpit_core::registry::Registry>,
}

#[pymethods]
impl PyRegistry {
    #[new]
    fn new() -> Self {
        PyRegistry {
            inner: Arc::new(builtin_registry()),
        }
    }

    /// Register a device definition from its JSON document.
    fn register_json(&mut self, text: &str) -> PyResult<String> {
        let mut registry = (*self.inner).clone();
        let id = registry.register_json(text).map_err(value_error)?;
        self.inner = Arc::new(registry);
        Ok(id)
    }

    fn device_ids(&self) -> Vec<String> {
        self.inner.device_ids()
    }

    /// Device ids with one-line descriptions.
    fn search_module(&self) -> Vec<(String, String)> {
        self.inner.search_module()
    }

    /// Full API specs of one device as a list of dicts.
    fn search_api(&self, py: Python<'_>, device_id: &str) -> PyResult<Py<PyAny>> {
        let specs = self.inner.search_api(device_id).map_err(value_error)?;
        let json = serde_json::to_value(&specs).map_err(runtime_error)?;
        json_to_py(py, &json)
    }

    /// Structural diff of two snapshot documents.
    fn diff_snapshots(&self, py: Python<'_>, before: &str, after: &str) -> PyResult<Py<PyAny>> {
        let before = state::parse_snapshot(before, self.inner.as_ref()).map_err(value_error)?;
        let after = state::parse_snapshot(after, self.inner.as_ref()).map_err(value_error)?;
        let diff = state::diff_snapshots(&before, &after).map_err(value_error)?;
        let json = serde_json::to_value(&diff).map_err(runtime_error)?;
        json_to_py(py, &json)
    }

    fn __repr__(&self) -> String {
        format!("Registry({} devices)", self.inner.device_ids().len())
    }
}

/// A live world over a registry.
#[pyclass(name = "World", unsendable)]
struct PyWorld {
    inner: cockpit_core::world::World,
}

#[pymethods]
impl PyWorld {
    #[new]
    #[pyo3(signature = (registry = None))]
    fn new(registry: Option<&PyRegistry>) -> Self {
        let registry = registry
            .map(|r| r.inner.clone())
            .unwrap_or_else(|| Arc::new(builtin_registry()));
        PyWorld {
            inner: cockpit_core::world::World::new(registry),
        }
    }

    /// Invoke an API with keyword arguments; returns the result dict.
    #[pyo3(signature = (api_name, **kwargs))]
    fn invoke(
        &mut self,
        py: Python<'_>,
        api_name: &str,
        kwargs: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Py<PyAny>> {
        let mut call = ApiCall::new(api_name);
        if let Some(kwargs) = kwargs {
            for (key, value) in kwargs.iter() {
                let key: String = key.extract()?;
                call.args.insert(key, py_to_attr(&value)?);
            }
        }
        let result = self.inner.invoke(&call);
        let json = serde_json::to_value(&result).map_err(runtime_error)?;
        json_to_py(py, &json)
    }

    /// Apply a named init preset to a device.
    fn init_device(&mut self, device_id: &str, preset: &str) -> PyResult<()> {
        self.inner.init_device(device_id, preset).map_err(value_error)
    }

    /// Serialized snapshot document; optionally restricted to a device
    /// subset (the environment block is always present).
    #[pyo3(signature = (mode = "full", devices = None, label = ""))]
    fn snapshot(&self, mode: &str, devices: Option<Vec<String>>, label: &str) -> PyResult<String> {
        let mode = render_mode(mode)?;
        let snapshot = match devices {
            None => self.inner.snapshot(label),
            Some(ids) => {
                let ids: BTreeSet<String> = ids.into_iter().collect();
                self.inner.snapshot_of(&ids, label).map_err(value_error)?
            }
        };
        Ok(state::serialize_snapshot(&snapshot, mode))
    }

    /// Apply a state patch given as a dict of `device.attribute` paths to
    /// target values; returns per-path outcomes.
    fn apply_patch(&mut self, py: Python<'_>, patch: &Bound<'_, PyDict>) -> PyResult<Py<PyAny>> {
        let mut state_patch = StatePatch::new();
        for (key, value) in patch.iter() {
            let path: String = key.extract()?;
            state_patch
                .assignments
                .insert(AttrPath(path), py_to_attr(&value)?);
        }
        let feedback = cockpit_core::executor::execute_sfc(&mut self.inner, &state_patch);
        let json = serde_json::to_value(&feedback).map_err(runtime_error)?;
        json_to_py(py, &json)
    }

    /// Current value at an attribute path.
    fn value_at(&self, py: Python<'_>, path: &str) -> PyResult<Py<PyAny>> {
        match self.inner.value_at(&AttrPath(path.to_string())) {
            Some(value) => attr_to_py(py, &value),
            None => Err(value_error(format!("unknown path `{path}`"))),
        }
    }

    fn __repr__(&self) -> String {
        format!("World({} devices)", self.inner.device_ids().len())
    }
}

/// A parsed scenario.
#[pyclass(name = "Scenario", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl PyScenario {
    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.domain_label()
    }

    #[getter]
    fn turn_count(&self) -> usize {
        self.inner.turns.len()
    }

    fn queries(&self) -> Vec<String> {
        self.inner.turns.iter().map(|t| t.query.clone()).collect()
    }

    fn truth_calls(&self) -> Vec<Vec<String>> {
        self.inner
            .turns
            .iter()
            .map(|t| t.truth_calls.iter().map(ApiCall::render).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(id={:?}, turns={})", self.inner.id, self.inner.turns.len())
    }
}

/// An executed truth trace.
#[pyclass(name = "ScenarioRecord")]
struct PyScenarioRecord {
    inner: scenario::ScenarioRecord,
}

#[pymethods]
impl PyScenarioRecord {
    #[getter]
    fn scenario(&self) -> PyScenario {
        PyScenario {
            inner: self.inner.scenario.clone(),
        }
    }

    #[getter]
    fn relevant_devices(&self) -> Vec<String> {
        self.inner.relevant_devices.iter().cloned().collect()
    }

    /// Serialized truth states (initial plus one per turn).
    #[pyo3(signature = (mode = "full"))]
    fn truth_states(&self, mode: &str) -> PyResult<Vec<String>> {
        let mode = render_mode(mode)?;
        Ok(self
            .inner
            .truth_states
            .iter()
            .map(|s| state::serialize_snapshot(s, mode))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "ScenarioRecord(id={:?}, states={})",
            self.inner.scenario.id,
            self.inner.truth_states.len()
        )
    }
}

/// Parse a scenario document, resolving names against the registry.
#[pyfunction]
#[pyo3(signature = (text, registry = None))]
fn parse_scenario(text: &str, registry: Option<&PyRegistry>) -> PyResult<PyScenario> {
    let owned;
    let registry = match registry {
        Some(r) => r.inner.as_ref(),
        None => {
            owned = builtin_registry();
            &owned
        }
    };
    let inner = scenario::parse_scenario(text, Some(registry)).map_err(value_error)?;
    Ok(PyScenario { inner })
}

/// Execute a scenario's ground truth on a fresh world.
#[pyfunction]
#[pyo3(signature = (scenario, registry = None))]
fn execute_truth(scenario: &PyScenario, registry: Option<&PyRegistry>) -> PyResult<PyScenarioRecord> {
    let registry = registry
        .map(|r| r.inner.clone())
        .unwrap_or_else(|| Arc::new(builtin_registry()));
    let mut world = cockpit_core::world::World::new(registry);
    let record = scenario::execute_truth(&scenario.inner, &mut world).map_err(runtime_error)?;
    Ok(PyScenarioRecord { inner: record })
}

/// Validate a scenario by execution; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (text, registry = None))]
fn validate_scenario(py: Python<'_>, text: &str, registry: Option<&PyRegistry>) -> PyResult<Py<PyAny>> {
    let registry = registry
        .map(|r| r.inner.clone())
        .unwrap_or_else(|| Arc::new(builtin_registry()));
    let parsed = scenario::parse_scenario(text, None).map_err(value_error)?;
    let mut world = cockpit_core::world::World::new(registry);
    let report = scenario::validate_scenario(&parsed, &mut world);
    let json = serde_json::to_value(&report).map_err(runtime_error)?;
    json_to_py(py, &json)
}

/// Run the ground-truth oracle agent over a scenario and return the
/// metric report as a dict. This is the LLM-free path for exercising the
/// full session machinery.
#[pyfunction]
#[pyo3(signature = (text, mode = "fc", distractors = 0, registry = None))]
fn run_oracle_session(
    py: Python<'_>,
    text: &str,
    mode: &str,
    distractors: usize,
    registry: Option<&PyRegistry>,
) -> PyResult<Py<PyAny>> {
    let registry = registry
        .map(|r| r.inner.clone())
        .unwrap_or_else(|| Arc::new(builtin_registry()));
    let mode = session_mode(mode)?;
    let parsed = scenario::parse_scenario(text, Some(registry.as_ref())).map_err(value_error)?;
    let mut world = cockpit_core::world::World::new(registry.clone());
    let record = scenario::execute_truth(&parsed, &mut world).map_err(runtime_error)?;

    let mut config = SessionConfig::new(mode);
    config.distractor_count = distractors;
    let mut agent = oracle_agent(&record, mode);
    let outcome = run_session(&record, &mut agent, &config, &registry).map_err(runtime_error)?;
    let json = serde_json::to_value(&outcome.report).map_err(runtime_error)?;
    json_to_py(py, &json)
}

/// Direction of change between two numeric values.
#[pyfunction]
fn classify_trend(before: &Bound<'_, PyAny>, after: &Bound<'_, PyAny>) -> PyResult<String> {
    let before = py_to_attr(before)?;
    let after = py_to_attr(after)?;
    state::classify_trend(&before, &after)
        .map(|t| t.to_string())
        .map_err(value_error)
}

/// Jensen-Shannon divergence (natural log) of two probability vectors.
#[pyfunction]
fn jsd(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let p = metrics::Distribution::new(p).map_err(value_error)?;
    let q = metrics::Distribution::new(q).map_err(value_error)?;
    metrics::jsd(&p, &q).map_err(value_error)
}

/// Proportion of disagreements between two verdict vectors.
#[pyfunction]
fn error_rate(auto: Vec<bool>, expert: Vec<bool>) -> PyResult<f64> {
    metrics::error_rate(&auto, &expert).map_err(value_error)
}

/// Exact-sequence comparison of two call lists given as rendered call
/// expressions like `door_lock_switch(switch=true)`.
#[pyfunction]
fn rule_based_evaluate(expected: Vec<String>, produced: Vec<String>) -> PyResult<bool> {
    let parse_all = |items: Vec<String>| -> PyResult<Vec<ApiCall>> {
        items
            .iter()
            .map(|text| cockpit_core::parse::parse_call(text).map_err(value_error))
            .collect()
    };
    Ok(metrics::rule_based_evaluate(
        &parse_all(expected)?,
        &parse_all(produced)?,
    ))
}

#[pymodule]
fn cockpit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRegistry>()?;
    m.add_class::<PyWorld>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyScenarioRecord>()?;
    m.add_function(wrap_pyfunction!(parse_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(execute_truth, m)?)?;
    m.add_function(wrap_pyfunction!(validate_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_oracle_session, m)?)?;
    m.add_function(wrap_pyfunction!(classify_trend, m)?)?;
    m.add_function(wrap_pyfunction!(jsd, m)?)?;
    m.add_function(wrap_pyfunction!(error_rate, m)?)?;
    m.add_function(wrap_pyfunction!(rule_based_evaluate, m)?)?;
    Ok(())
}
