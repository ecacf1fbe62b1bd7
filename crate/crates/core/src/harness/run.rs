use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{PresentationOrder, ScenarioConfig, ScenarioKind};
use crate::error::{Error, Result};
use crate::knowledge::{Agent, EventRecord, KnowledgeGraph, Parameters};
use crate::scenarios::{
    desired_partition, example_actions, example_oracle, example_percept, example_schema, ObjectKind, PrototypeMatch,
    Variant,
};

const ORDER_SALT: u64 = 0x6F72_6465_7273_6565;
const PERCEPT_SALT: u64 = 0x7065_7263_6570_7473;

/// Summary of one example-scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunResult {
    /// First step from which the desired partition held through the end of the run.
    pub steps_to_desired: Option<u64>,
    /// Step at which every kind had been presented at least once.
    pub first_full_coverage_step: Option<u64>,
    pub final_category_count: usize,
    pub residual_category_count: usize,
    pub steps_run: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_log_path: Option<PathBuf>,
    pub seed: u64,
    pub parameters: Parameters,
}

impl RunResult {
    pub fn succeeded(&self) -> bool {
        self.steps_to_desired.is_some()
    }
}

/// A finished run with its event log and final graph.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub result: RunResult,
    pub events: Vec<EventRecord>,
    pub graph: KnowledgeGraph,
}

/// The kind presented at each step for a given order policy.
pub fn presentation_sequence(order: PresentationOrder, seed: u64, steps: u64) -> Vec<ObjectKind> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ORDER_SALT);
    match order {
        PresentationOrder::RoundRobin => {
            let mut kinds = ObjectKind::ALL.to_vec();
            kinds.shuffle(&mut rng);
            (0..steps).map(|i| kinds[(i % kinds.len() as u64) as usize]).collect()
        }
        PresentationOrder::Shuffled => (0..steps)
            .map(|_| ObjectKind::ALL[rng.gen_range(0..ObjectKind::ALL.len())])
            .collect(),
    }
}

fn percept_seed(seed: u64, step: u64) -> u64 {
    (seed ^ PERCEPT_SALT).wrapping_add(step.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn partition_mode(variant: Variant) -> PrototypeMatch {
    match variant {
        Variant::Exact => PrototypeMatch::Fit,
        Variant::Noisy => PrototypeMatch::Nearest,
    }
}

/// Runs the apple/toy-block scenario: observe, select, reward by the oracle, for `maxSteps` steps.
pub fn run_example(config: &ScenarioConfig) -> Result<ScenarioRun> {
    if config.scenario != ScenarioKind::Example {
        return Err(Error::Config("run_example needs the example scenario".into()));
    }
    config.validate()?;
    let graph = KnowledgeGraph::new(example_schema(), example_actions(), config.parameters, config.seed)?;
    let mut agent = Agent::new(graph);
    let mode = partition_mode(config.variant);
    let kinds = presentation_sequence(config.order, config.seed, config.max_steps);

    let mut seen = [false; 6];
    let mut coverage = None;
    let mut streak_start = None;
    for (i, &kind) in kinds.iter().enumerate() {
        let step = i as u64 + 1;
        let percept = example_percept(kind, config.variant, percept_seed(config.seed, step));
        let presentation = agent.present(format!("{}-{step}", kind.name()), percept)?;
        let reward = example_oracle(kind, &presentation.chosen_action)?;
        agent.reward(reward)?;

        seen[ObjectKind::ALL.iter().position(|&k| k == kind).unwrap_or(0)] = true;
        if coverage.is_none() && seen.iter().all(|&s| s) {
            coverage = Some(step);
        }
        let desired = coverage.is_some() && desired_partition(agent.graph(), mode).reached;
        streak_start = match (desired, streak_start) {
            (true, None) => Some(step),
            (true, s) => s,
            (false, _) => None,
        };
    }

    let graph = agent.graph().clone();
    let report = desired_partition(&graph, mode);
    let result = RunResult {
        steps_to_desired: streak_start,
        first_full_coverage_step: coverage,
        final_category_count: graph.len(),
        residual_category_count: report.residual,
        steps_run: config.max_steps,
        event_log_path: None,
        seed: config.seed,
        parameters: config.parameters,
    };
    Ok(ScenarioRun {
        result,
        events: agent.history().to_vec(),
        graph,
    })
}

/// Writes events as one JSON object per line.
pub fn write_event_log<W: Write>(mut out: W, events: &[EventRecord]) -> Result<()> {
    for event in events {
        let line = serde_json::to_string(event).map_err(|e| Error::InvalidValue(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<event log>", e))?;
    }
    Ok(())
}

pub fn save_event_log(path: impl AsRef<Path>, events: &[EventRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    write_event_log(&mut writer, events)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_covers_all_kinds_in_six_steps() {
        let seq = presentation_sequence(PresentationOrder::RoundRobin, 4, 12);
        let mut first: Vec<_> = seq[..6].to_vec();
        first.sort();
        let mut all = ObjectKind::ALL.to_vec();
        all.sort();
        assert_eq!(first, all);
        assert_eq!(seq[..6], seq[6..]);
    }

    #[test]
    fn zero_steps_is_an_empty_run() {
        let config = ScenarioConfig {
            max_steps: 0,
            ..ScenarioConfig::default()
        };
        let run = run_example(&config).unwrap();
        assert!(run.events.is_empty());
        assert_eq!(run.result.final_category_count, 0);
        assert_eq!(run.result.steps_to_desired, None);
    }

    #[test]
    fn runs_are_reproducible() {
        let config = ScenarioConfig {
            variant: Variant::Noisy,
            seed: 17,
            max_steps: 60,
            ..ScenarioConfig::default()
        };
        let a = run_example(&config).unwrap();
        let b = run_example(&config).unwrap();
        assert_eq!(a.result, b.result);
        assert_eq!(a.events, b.events);
        assert_eq!(a.graph, b.graph);
    }
}
