//! The `evaluate` command: scores every selected (model, prompt, sample) unit.
//!
//! Prompts are handed to `parallelism` worker threads; a single writer
//! appends finished records in unit order. Units already present in the
//! results file are skipped, so an interrupted run resumes where it stopped.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use vbench2_core::backends::BackendSuite;
use vbench2_core::registry::{binding_for, score_video, DimensionBinding, RecordKey, RegistryError, ScoreType};
use vbench2_core::suite::{load_suite, validate_suite};
use vbench2_core::{Constants, PromptSpec, ScoreRecord, ScoreValue};

use crate::backend::build_backend;
use crate::config::{ModelSpec, RunConfig};
use crate::error::{invalid, CliError};
use crate::ingest::{open_unit, unit_samples};
use crate::report::{build_report, metadata_for, write_reports, RunReport};
use crate::results::{load_results, ResultsWriter};
use crate::Selection;

/// One model's pending sample slots of one prompt.
struct Unit<'a> {
    model: &'a ModelSpec,
    prompt: &'a PromptSpec,
    binding: DimensionBinding,
    slots: Vec<usize>,
}

struct UnitResult {
    records: Vec<ScoreRecord>,
    error: Option<RegistryError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    /// Records written by this run.
    pub scored: usize,
    /// Slots skipped because the results file already had them.
    pub skipped: usize,
    pub report: RunReport,
}

fn score_unit(unit: &Unit<'_>, backend: &BackendSuite, constants: &Constants) -> UnitResult {
    let set_level = unit.binding.score_type == ScoreType::SetLevel;
    let mut records = Vec::with_capacity(unit.slots.len());
    for &slot in &unit.slots {
        let key = RecordKey {
            model: unit.model.id.clone(),
            sample: slot,
        };
        let samples = unit_samples(unit.prompt, set_level, slot);
        let record = match open_unit(&unit.model.id, &unit.model.video_root, unit.prompt, &samples) {
            Ok(videos) => score_video(&unit.binding, unit.prompt, &videos, backend, constants, &key),
            Err(reason) => Ok(ScoreRecord {
                prompt_id: unit.prompt.id.clone(),
                dimension: unit.prompt.dimension,
                model: key.model,
                sample: slot,
                value: ScoreValue::Unscorable(reason),
                evidence: serde_json::Value::Null,
            }),
        };
        match record {
            Ok(r) => records.push(r),
            Err(e) => {
                return UnitResult {
                    records,
                    error: Some(e),
                }
            }
        }
    }
    UnitResult { records, error: None }
}

/// Scores units on `workers` threads, appending results in unit order.
///
/// Stops handing out work after the first error; everything finished is still written.
fn run_units(
    units: &[Unit<'_>],
    workers: usize,
    backend: &BackendSuite,
    constants: &Constants,
    writer: &mut ResultsWriter,
) -> Result<(usize, Option<RegistryError>), CliError> {
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, UnitResult)>();
    let mut written = 0;
    let mut first_error: Option<(usize, RegistryError)> = None;
    std::thread::scope(|scope| -> Result<(), CliError> {
        for _ in 0..workers.min(units.len()).max(1) {
            let tx = tx.clone();
            let (next, abort) = (&next, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(unit) = units.get(i) else { break };
                let result = score_unit(unit, backend, constants);
                if result.error.is_some() {
                    abort.store(true, Ordering::SeqCst);
                }
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending: BTreeMap<usize, UnitResult> = BTreeMap::new();
        let mut cursor = 0;
        for (i, result) in rx {
            pending.insert(i, result);
            while let Some(r) = pending.remove(&cursor) {
                cursor += 1;
                writer.append(&r.records)?;
                written += r.records.len();
                if let Some(e) = r.error {
                    first_error.get_or_insert((cursor - 1, e));
                }
            }
        }
        // Units finished out of order after a gap left by the abort.
        for (i, r) in pending {
            writer.append(&r.records)?;
            written += r.records.len();
            if let Some(e) = r.error {
                if first_error.as_ref().is_none_or(|(j, _)| i < *j) {
                    first_error = Some((i, e));
                }
            }
        }
        Ok(())
    })?;
    Ok((written, first_error.map(|(_, e)| e)))
}

/// `evaluate` command.
pub fn cmd_evaluate(config: &RunConfig, selection: &Selection, mock_override: Option<&Path>) -> Result<EvalSummary, CliError> {
    let models = config.selected_models(&selection.models)?;
    config.require_inputs(&models)?;
    let suite = load_suite(&config.suite).map_err(|e| invalid(e.to_string()))?;
    let violations = validate_suite(&suite);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {}: {}", v.prompt_id, v.rule)).collect();
        return Err(invalid(format!("suite {} is invalid:\n{}", config.suite.display(), lines.join("\n"))));
    }
    let (backend, _) = build_backend(&config.backend, mock_override)?;
    std::fs::create_dir_all(&config.output_dir)
        .map_err(CliError::io(format!("creating {}", config.output_dir.display())))?;
    let results_path = config.results_path();
    let existing = load_results(&results_path)?;
    let done: HashSet<(&str, &str, usize)> = existing
        .iter()
        .map(|r| (r.model.as_str(), r.prompt_id.as_str(), r.sample))
        .collect();

    let mut units = Vec::new();
    let mut skipped = 0;
    for model in &models {
        for prompt in suite.prompts.iter().filter(|p| selection.includes_dimension(p.dimension)) {
            let binding = binding_for(prompt.dimension);
            let slots: Vec<usize> = if binding.score_type == ScoreType::SetLevel {
                vec![0]
            } else {
                (0..config.samples_per_prompt).collect()
            };
            let total = slots.len();
            let slots: Vec<usize> = slots
                .into_iter()
                .filter(|s| !done.contains(&(model.id.as_str(), prompt.id.as_str(), *s)))
                .collect();
            skipped += total - slots.len();
            if !slots.is_empty() {
                units.push(Unit {
                    model,
                    prompt,
                    binding,
                    slots,
                });
            }
        }
    }

    let mut writer = ResultsWriter::open(&results_path)?;
    let (scored, error) = run_units(&units, config.parallelism, &backend, &config.constants, &mut writer)?;
    drop(writer);
    if let Some(e) = error {
        let msg = format!(
            "{e}\n{scored} record(s) checkpointed to {}; rerun to resume",
            results_path.display()
        );
        return Err(if e.is_backend() { CliError::Backend(msg) } else { invalid(msg) });
    }

    let model_ids: Vec<&str> = models.iter().map(|m| m.id.as_str()).collect();
    let records: Vec<ScoreRecord> = load_results(&results_path)?
        .into_iter()
        .filter(|r| selection.includes(r) && model_ids.contains(&r.model.as_str()))
        .collect();
    let report = build_report(records, |m| config.model_rank(m), metadata_for(config, mock_override)?)?;
    write_reports(config, &report)?;
    Ok(EvalSummary {
        scored,
        skipped,
        report,
    })
}
