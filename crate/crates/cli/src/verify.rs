//! Seeded invariance campaigns.

use std::collections::BTreeMap;

use clap::ValueEnum;
use pseudo_bracket::bracket::{bracket_with, normalized_bracket_with, Options, Variant};
use pseudo_bracket::diagram::Diagram;
use pseudo_bracket::fixtures;
use pseudo_bracket::moves::{full_moves, random_walk, regular_moves};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::Failure;

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveSet {
    /// R2, R3, PR2, PR3; the bracket itself must not change.
    Regular,
    /// Adds R1± and PR1; the normalized bracket must not change.
    Full,
}

#[derive(Serialize)]
pub struct TrialFailure {
    pub trial: u64,
    pub input: String,
    pub walk_seed: u64,
    pub before: String,
    pub after: String,
    pub trace: Value,
}

#[derive(Serialize)]
pub struct Report {
    pub moves: MoveSet,
    pub seed: u64,
    pub max_steps: usize,
    pub trials: u64,
    pub passed: u64,
    pub failed: u64,
    pub stuck: u64,
    pub moves_applied: BTreeMap<String, usize>,
    pub failures: Vec<TrialFailure>,
}

pub fn corpus() -> Vec<(String, Diagram)> {
    fixtures::all().into_iter().map(|(n, d)| (n.to_string(), d)).collect()
}

/// Trial `i` walks from `targets[i % len]` for a seeded number of steps.
/// Walks can grow a diagram well past the default cap, so the cap is lifted.
pub fn run(
    targets: &[(String, Diagram)],
    moves: MoveSet,
    trials: u64,
    seed: u64,
    max_steps: usize,
    threads: Option<usize>,
) -> Result<Report, Failure> {
    let allowed = match moves {
        MoveSet::Regular => regular_moves(),
        MoveSet::Full => full_moves(),
    };
    let opts = Options { threads, max_crossings: usize::MAX, ..Options::default() };
    let eval = |d: &Diagram| {
        let v = Variant::plain(d.surface);
        match moves {
            MoveSet::Regular => bracket_with(d, v, &opts),
            MoveSet::Full => normalized_bracket_with(d, v, &opts),
        }
    };
    let mut cache = Vec::with_capacity(targets.len());
    for (_, d) in targets {
        cache.push(eval(d)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report {
        moves,
        seed,
        max_steps,
        trials,
        passed: 0,
        failed: 0,
        stuck: 0,
        moves_applied: BTreeMap::new(),
        failures: Vec::new(),
    };
    for trial in 0..trials {
        let k = (trial % targets.len() as u64) as usize;
        let (name, d) = &targets[k];
        let walk_seed: u64 = rng.gen();
        let steps = rng.gen_range(1..=max_steps);
        let w = random_walk(d, walk_seed, steps, &allowed);
        if w.stuck {
            report.stuck += 1;
        }
        for s in &w.trace {
            *report.moves_applied.entry(s.kind.to_string()).or_insert(0) += 1;
        }
        let after = eval(&w.diagram)?;
        if after == cache[k] {
            report.passed += 1;
        } else {
            report.failed += 1;
            report.failures.push(TrialFailure {
                trial,
                input: name.clone(),
                walk_seed,
                before: cache[k].render_canonical(),
                after: after.render_canonical(),
                trace: w.trace_json(),
            });
        }
    }
    Ok(report)
}
