//! Python module `objcat`: knowledge graph, teaching agent, scenario harness and feature pipeline.
//!
//! Structured results (events, run summaries, documents) are returned as plain dicts and
//! lists decoded from the same JSON the Rust side writes.

use std::collections::BTreeMap;

use objcat::features::{self, Chroma, FeatureExtractor, Mask, Point, Raster};
use objcat::harness::{self, PresentationOrder, ScenarioConfig, ScenarioKind, WcstConfig};
use objcat::knowledge::{
    self, Agent, CategoryId, FeatureDef, FeatureSchema, FitOrder, Interval, IntervalVector, Parameters, Percept, Reward,
};
use objcat::scenarios::{self, ObjectKind, Variant};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(objcat, ObjcatError, PyValueError, "Invalid input or configuration.");
create_exception!(objcat, ConflictError, ObjcatError, "Interaction out of order.");

fn err(e: objcat::Error) -> PyErr {
    match e {
        objcat::Error::Conflict(_) | objcat::Error::TestComplete => ConflictError::new_err(e.to_string()),
        objcat::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => ObjcatError::new_err(other.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| ObjcatError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse<T: std::str::FromStr<Err = objcat::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn fit_order(s: &str) -> PyResult<FitOrder> {
    match s {
        "oldest" => Ok(FitOrder::Oldest),
        "newest" => Ok(FitOrder::Newest),
        other => Err(ObjcatError::new_err(format!("unknown fit order `{other}`"))),
    }
}

/// Learning parameters.
#[pyclass(name = "Parameters", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyParameters {
    rho_ra: f64,
    delta_aw: f64,
    theta_mc: f64,
    theta_mf: f64,
    fit_order: String,
}

impl PyParameters {
    fn from_core(p: &Parameters) -> Self {
        Self {
            rho_ra: p.rho_ra,
            delta_aw: p.delta_aw,
            theta_mc: p.theta_mc,
            theta_mf: p.theta_mf,
            fit_order: match p.fit_order {
                FitOrder::Oldest => "oldest".into(),
                FitOrder::Newest => "newest".into(),
            },
        }
    }

    fn to_core(&self) -> PyResult<Parameters> {
        let p = Parameters {
            rho_ra: self.rho_ra,
            delta_aw: self.delta_aw,
            theta_mc: self.theta_mc,
            theta_mf: self.theta_mf,
            fit_order: fit_order(&self.fit_order)?,
        };
        p.validate().map_err(err)?;
        Ok(p)
    }
}

fn params_or(p: Option<PyRef<'_, PyParameters>>, default: Parameters) -> PyResult<Parameters> {
    match p {
        Some(p) => p.to_core(),
        None => Ok(default),
    }
}

#[pymethods]
impl PyParameters {
    #[new]
    #[pyo3(signature = (rho_ra=0.0, delta_aw=0.1, theta_mc=1.0, theta_mf=0.3, fit_order="newest"))]
    fn new(rho_ra: f64, delta_aw: f64, theta_mc: f64, theta_mf: f64, fit_order: &str) -> PyResult<Self> {
        let p = Self {
            rho_ra,
            delta_aw,
            theta_mc,
            theta_mf,
            fit_order: fit_order.to_string(),
        };
        p.to_core()?;
        Ok(p)
    }

    /// Defaults used for card sorting.
    #[staticmethod]
    fn wcst() -> Self {
        Self::from_core(&harness::wcst_default_parameters())
    }

    fn validate(&self) -> PyResult<()> {
        self.to_core().map(|_| ())
    }

    fn __repr__(&self) -> String {
        format!(
            "Parameters(rho_ra={}, delta_aw={}, theta_mc={}, theta_mf={}, fit_order='{}')",
            self.rho_ra, self.delta_aw, self.theta_mc, self.theta_mf, self.fit_order
        )
    }
}

fn schema_of(features: Vec<(String, Vec<String>)>) -> PyResult<FeatureSchema> {
    FeatureSchema::new(features.into_iter().map(|(id, c)| FeatureDef::new(id, c)).collect()).map_err(err)
}

fn percept_of(schema: &FeatureSchema, features: &BTreeMap<String, Vec<f64>>) -> PyResult<Percept> {
    Percept::from_map(schema, features).map_err(err)
}

/// Categories, attribute weights and the similarity cache.
#[pyclass(name = "KnowledgeGraph", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: knowledge::KnowledgeGraph,
}

#[pymethods]
impl PyGraph {
    /// `schema` is a list of `(feature_id, [characteristic, ...])`.
    #[new]
    #[pyo3(signature = (schema, actions, parameters=None, seed=0))]
    fn new(
        schema: Vec<(String, Vec<String>)>,
        actions: Vec<String>,
        parameters: Option<PyRef<'_, PyParameters>>,
        seed: u64,
    ) -> PyResult<Self> {
        let params = params_or(parameters, Parameters::default())?;
        let inner = knowledge::KnowledgeGraph::new(schema_of(schema)?, actions, params, seed).map_err(err)?;
        Ok(Self { inner })
    }

    /// Empty graph over the apple/toy-block schema and actions.
    #[staticmethod]
    #[pyo3(signature = (parameters=None, seed=0))]
    fn example(parameters: Option<PyRef<'_, PyParameters>>, seed: u64) -> PyResult<Self> {
        let params = params_or(parameters, Parameters::default())?;
        let inner =
            knowledge::KnowledgeGraph::new(scenarios::example_schema(), scenarios::example_actions(), params, seed)
                .map_err(err)?;
        Ok(Self { inner })
    }

    /// Empty graph over the card sorting schema and piles.
    #[staticmethod]
    #[pyo3(signature = (parameters=None, seed=0))]
    fn wcst(parameters: Option<PyRef<'_, PyParameters>>, seed: u64) -> PyResult<Self> {
        let params = params_or(parameters, harness::wcst_default_parameters())?;
        let inner = knowledge::KnowledgeGraph::new(scenarios::wcst_schema(), scenarios::wcst_actions(), params, seed)
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn parameters(&self) -> PyParameters {
        PyParameters::from_core(self.inner.params())
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.actions().to_vec()
    }

    #[getter]
    fn schema(&self) -> Vec<(String, Vec<String>)> {
        self.inner
            .schema()
            .features()
            .iter()
            .map(|f| (f.id.clone(), f.characteristics.clone()))
            .collect()
    }

    /// Attribute weights in schema order, experience last.
    fn weights(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(
            py,
            &knowledge::OrderedWeights::of(self.inner.schema(), self.inner.weights()),
        )
    }

    fn category_ids(&self) -> Vec<u64> {
        self.inner.category_ids().into_iter().map(|c| c.0).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn similarity(&self, j: u64, k: u64) -> Option<f64> {
        self.inner.similarity(CategoryId(j), CategoryId(k))
    }

    fn attribute_similarities(&self, j: u64, k: u64) -> PyResult<Vec<f64>> {
        self.inner
            .attribute_similarities(CategoryId(j), CategoryId(k))
            .map_err(err)
    }

    /// Returns `(category_id, is_new)`.
    fn observe(&mut self, features: BTreeMap<String, Vec<f64>>) -> PyResult<(u64, bool)> {
        let percept = percept_of(self.inner.schema(), &features)?;
        let o = self.inner.observe(&percept).map_err(err)?;
        Ok((o.category.0, o.is_new))
    }

    fn select_action(&mut self, category_id: u64) -> PyResult<String> {
        self.inner.select_action(CategoryId(category_id)).map_err(err)
    }

    /// Applies a reward for `action` taken on `features`, observed into `category_id`.
    fn record_reward(
        &mut self,
        py: Python<'_>,
        category_id: u64,
        features: BTreeMap<String, Vec<f64>>,
        action: &str,
        reward: &str,
    ) -> PyResult<Py<PyAny>> {
        let percept = percept_of(self.inner.schema(), &features)?;
        let reward: Reward = parse(reward)?;
        let r = self
            .inner
            .record_reward(CategoryId(category_id), &percept, action, reward)
            .map_err(err)?;
        #[derive(Serialize)]
        struct Report<'a> {
            outcome: &'a knowledge::RewardOutcome,
            splits: &'a [knowledge::SplitEvent],
            merges: &'a [knowledge::MergeEvent],
            adaptations: &'a [knowledge::WeightAdaptation],
        }
        to_py(
            py,
            &Report {
                outcome: &r.outcome,
                splits: &r.splits,
                merges: &r.merges,
                adaptations: &r.adaptations,
            },
        )
    }

    fn merge_pass(&mut self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let merges = self.inner.merge_pass();
        to_py(py, &merges)
    }

    fn check_invariants(&self) -> PyResult<()> {
        self.inner.check_invariants().map_err(ObjcatError::new_err)
    }

    /// The graph document as a dict.
    fn document(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.to_document())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: knowledge::KnowledgeGraph::from_json(text).map_err(err)?,
        })
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: knowledge::KnowledgeGraph::load(path).map_err(err)?,
        })
    }

    fn __eq__(&self, other: PyRef<'_, PyGraph>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "KnowledgeGraph(categories={}, actions={:?})",
            self.inner.len(),
            self.inner.actions()
        )
    }
}

/// Strict present/reward loop over a graph.
#[pyclass(name = "Agent")]
struct PyAgent {
    inner: Agent,
}

#[pymethods]
impl PyAgent {
    /// Starts from a copy of `graph`.
    #[new]
    fn new(graph: PyRef<'_, PyGraph>) -> Self {
        Self {
            inner: Agent::new(graph.inner.clone()),
        }
    }

    fn present(
        &mut self,
        py: Python<'_>,
        percept_id: String,
        features: BTreeMap<String, Vec<f64>>,
    ) -> PyResult<Py<PyAny>> {
        let percept = percept_of(self.inner.graph().schema(), &features)?;
        let p = self.inner.present(percept_id, percept).map_err(err)?;
        to_py(py, &p)
    }

    fn reward(&mut self, py: Python<'_>, reward: &str) -> PyResult<Py<PyAny>> {
        let r = self.inner.reward(parse(reward)?).map_err(err)?;
        #[derive(Serialize)]
        #[serde(rename_all = "camelCase")]
        struct Out<'a> {
            outcome: &'a knowledge::RewardOutcome,
            adaptations: &'a [knowledge::WeightAdaptation],
            event: &'a knowledge::EventRecord,
        }
        to_py(
            py,
            &Out {
                outcome: &r.outcome,
                adaptations: &r.adaptations,
                event: &r.event,
            },
        )
    }

    #[getter]
    fn has_pending(&self) -> bool {
        self.inner.has_pending()
    }

    #[getter]
    fn pending_action(&self) -> Option<String> {
        self.inner.pending_action().map(str::to_string)
    }

    /// A copy of the current graph.
    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.graph().clone(),
        }
    }

    fn history(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.history())
    }

    /// The event log as newline-delimited JSON.
    fn event_log(&self) -> PyResult<String> {
        let mut out = Vec::new();
        harness::write_event_log(&mut out, self.inner.history()).map_err(err)?;
        String::from_utf8(out).map_err(|e| ObjcatError::new_err(e.to_string()))
    }
}

fn intervals(v: Vec<(f64, f64)>) -> PyResult<IntervalVector> {
    let iv = v
        .into_iter()
        .map(|(lo, hi)| Interval::new(lo, hi))
        .collect::<objcat::Result<Vec<_>>>()
        .map_err(err)?;
    IntervalVector::new(iv, 1).map_err(err)
}

/// Distance between two interval vectors given as `[(lo, hi), ...]`.
#[pyfunction]
fn delta_distance(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> PyResult<f64> {
    knowledge::delta_distance(&intervals(a)?, &intervals(b)?).map_err(err)
}

#[pyfunction]
fn normalize_percept(raw: Vec<f64>) -> PyResult<Vec<f64>> {
    let n = raw.len();
    knowledge::normalize_percept(&raw, n).map_err(err)
}

/// Simulated percept of an example object, e.g. `example_percept("greenApple", "noisy", 3)`.
#[pyfunction]
#[pyo3(signature = (kind, variant="exact", seed=0))]
fn example_percept(kind: &str, variant: &str, seed: u64) -> PyResult<BTreeMap<String, Vec<f64>>> {
    let kind: ObjectKind = parse(kind)?;
    let variant: Variant = parse(variant)?;
    Ok(scenarios::example_percept(kind, variant, seed).to_map())
}

/// Supervisor reward for sorting `kind` with `action`.
#[pyfunction]
fn example_oracle(kind: &str, action: &str) -> PyResult<String> {
    let kind: ObjectKind = parse(kind)?;
    Ok(scenarios::example_oracle(kind, action)
        .map_err(err)?
        .as_str()
        .to_string())
}

#[pyfunction]
fn wcst_percept(color: u8, form: u8, number: u8) -> PyResult<BTreeMap<String, Vec<f64>>> {
    let card = scenarios::WcstCard::new(color, form, number).map_err(err)?;
    Ok(scenarios::wcst_percept(&card).to_map())
}

fn scenario_config(
    seed: u64,
    variant: &str,
    max_steps: u64,
    order: &str,
    parameters: Option<PyRef<'_, PyParameters>>,
) -> PyResult<ScenarioConfig> {
    let order: PresentationOrder = parse(order)?;
    Ok(ScenarioConfig {
        scenario: ScenarioKind::Example,
        variant: parse(variant)?,
        seed,
        max_steps,
        order,
        parameters: params_or(parameters, Parameters::default())?,
    })
}

/// Runs the example scenario. Returns `{"result", "events", "graph"}`.
#[pyfunction]
#[pyo3(signature = (seed=0, variant="exact", max_steps=200, order="round-robin", parameters=None))]
fn run_example(
    py: Python<'_>,
    seed: u64,
    variant: &str,
    max_steps: u64,
    order: &str,
    parameters: Option<PyRef<'_, PyParameters>>,
) -> PyResult<Py<PyAny>> {
    let config = scenario_config(seed, variant, max_steps, order, parameters)?;
    let run = harness::run_example(&config).map_err(err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("result", to_py(py, &run.result)?)?;
    out.set_item("events", to_py(py, &run.events)?)?;
    out.set_item("graph", Py::new(py, PyGraph { inner: run.graph })?)?;
    Ok(out.into_any().unbind())
}

/// Runs the example scenario once per `(theta_mc, delta_aw)` cell; returns the cells row-major.
#[pyfunction]
#[pyo3(signature = (theta_mc, delta_aw, seed=0, variant="exact", max_steps=200, order="round-robin", parameters=None))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    theta_mc: Vec<f64>,
    delta_aw: Vec<f64>,
    seed: u64,
    variant: &str,
    max_steps: u64,
    order: &str,
    parameters: Option<PyRef<'_, PyParameters>>,
) -> PyResult<Py<PyAny>> {
    let config = scenario_config(seed, variant, max_steps, order, parameters)?;
    let result = py
        .detach(|| harness::sweep(&config, &theta_mc, &delta_aw))
        .map_err(err)?;
    to_py(py, &result.cells)
}

/// Runs the card sorting test; returns its statistics.
#[pyfunction]
#[pyo3(signature = (seed=0, cap=harness::DEFAULT_WCST_CAP, parameters=None))]
fn run_wcst(py: Python<'_>, seed: u64, cap: u64, parameters: Option<PyRef<'_, PyParameters>>) -> PyResult<Py<PyAny>> {
    let config = WcstConfig {
        seed,
        cap,
        parameters: params_or(parameters, harness::wcst_default_parameters())?,
    };
    let run = harness::run_wcst(&config).map_err(err)?;
    to_py(py, &run.stats)
}

/// Rows of pixels, each `None` (background) or an `(a, b)` chroma pair.
fn raster_of(rows: Vec<Vec<Option<(f64, f64)>>>) -> PyResult<Raster> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(ObjcatError::new_err("raster rows differ in length"));
    }
    Ok(Raster::from_fn(width, height, |x, y| {
        rows[y][x].map(|(a, b)| Chroma::new(a, b))
    }))
}

fn mask_of(rows: Vec<Vec<bool>>) -> PyResult<Mask> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(ObjcatError::new_err("mask rows differ in length"));
    }
    Ok(Mask::from_fn(width, height, |x, y| rows[y][x]))
}

/// Mean (a, b) over object pixels of each bounding-box quarter: UL, UR, LL, LR.
#[pyfunction]
fn quarter_averages(raster: Vec<Vec<Option<(f64, f64)>>>) -> PyResult<Vec<f64>> {
    Ok(features::quarter_averages(&raster_of(raster)?).map_err(err)?.to_vec())
}

/// `(object / oriented box, object / enclosing circle)` area ratios of a silhouette.
#[pyfunction]
fn shape_ratios(mask: Vec<Vec<bool>>) -> PyResult<(f64, f64)> {
    let [a, b] = features::mask_shape_ratios(&mask_of(mask)?).map_err(err)?;
    Ok((a, b))
}

/// Smallest circle around the points, as `(x, y, radius)`.
#[pyfunction]
fn min_enclosing_circle(points: Vec<(f64, f64)>) -> (f64, f64, f64) {
    let pts: Vec<Point> = points.into_iter().map(|(x, y)| Point::new(x, y)).collect();
    let c = features::min_enclosing_circle(&pts);
    (c.center.x, c.center.y, c.radius)
}

/// Colour and shape networks producing example-schema percepts from rasters.
#[pyclass(name = "FeatureExtractor")]
struct PyExtractor {
    inner: FeatureExtractor,
}

#[pymethods]
impl PyExtractor {
    #[staticmethod]
    #[pyo3(signature = (samples=200, epochs=300, seed=0))]
    fn train_synthetic(py: Python<'_>, samples: usize, epochs: usize, seed: u64) -> PyResult<Self> {
        let inner = py
            .detach(|| FeatureExtractor::train_synthetic(samples, epochs, seed))
            .map_err(err)?;
        Ok(Self { inner })
    }

    fn extract(&self, raster: Vec<Vec<Option<(f64, f64)>>>) -> PyResult<BTreeMap<String, Vec<f64>>> {
        Ok(self.inner.extract(&raster_of(raster)?).map_err(err)?.to_map())
    }
}

#[pymodule]
#[pyo3(name = "objcat")]
fn objcat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ObjcatError", py.get_type::<ObjcatError>())?;
    m.add("ConflictError", py.get_type::<ConflictError>())?;
    m.add_class::<PyParameters>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyAgent>()?;
    m.add_class::<PyExtractor>()?;
    m.add_function(wrap_pyfunction!(delta_distance, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_percept, m)?)?;
    m.add_function(wrap_pyfunction!(example_percept, m)?)?;
    m.add_function(wrap_pyfunction!(example_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(wcst_percept, m)?)?;
    m.add_function(wrap_pyfunction!(run_example, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_wcst, m)?)?;
    m.add_function(wrap_pyfunction!(quarter_averages, m)?)?;
    m.add_function(wrap_pyfunction!(shape_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(min_enclosing_circle, m)?)?;
    Ok(())
}
