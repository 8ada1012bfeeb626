use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;

use super::assess::DecoupleConfig;
use super::candidates::CandidateSet;
use super::scores::{median, ScoreTable};
use crate::copula::{sample_copula, CopulaSpec, Sample};
use crate::empirical::{cvm_score, pseudo_observations};
use crate::error::{Error, Result};
use crate::net::{train, transform, NetWeights};
use crate::numeric::Rng;
use crate::rosenblatt::{null_cvm_distribution, rosenblatt, RosenblattSpec};

/// Label of the data-generating copula in study tables.
pub const TRUE_LABEL: &str = "true";

/// Flag a replication whose true-model score exceeds this multiple of the
/// uniform-null median.
pub const TRAINING_FAILURE_RATIO: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    DecoupleNet,
    Rosenblatt,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::DecoupleNet => "decouplenet",
            TransformKind::Rosenblatt => "rosenblatt",
        })
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "decouplenet" | "net" => Ok(TransformKind::DecoupleNet),
            "rosenblatt" => Ok(TransformKind::Rosenblatt),
            other => Err(Error::Config(format!("unknown transform kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub replications: usize,
    pub n_trn: usize,
    pub n_gen: usize,
    pub model: DecoupleConfig,
    pub seed: u64,
    pub kind: TransformKind,
}

#[derive(Clone, Debug)]
pub struct StudyOutput {
    /// `replications x (1 + candidates)`, true model first.
    pub table: ScoreTable,
    /// Candidates dropped because they could not be resolved in some
    /// replication.
    pub failures: Vec<(String, String)>,
    /// Replications whose true-model score looks like a training failure.
    pub flagged: Vec<usize>,
}

enum Transformer {
    Net(NetWeights),
    Exact(RosenblattSpec),
}

impl Transformer {
    fn apply(&self, u: &Sample) -> Result<Sample> {
        match self {
            Transformer::Net(w) => transform(w, u),
            Transformer::Exact(r) => rosenblatt(r, u),
        }
    }
}

struct Replication {
    scores: Vec<Option<f64>>,
    failures: Vec<(usize, String)>,
}

const DATA_KEY: u64 = 0;
const TRAIN_KEY: u64 = 1;
const MODEL_KEY: u64 = 10;

fn replicate(
    b: usize,
    truth: &CopulaSpec,
    candidates: &CandidateSet,
    cfg: &StudyConfig,
    exact: Option<&RosenblattSpec>,
) -> Result<Replication> {
    let rep = Rng::new(cfg.seed).split(b as u64 + 1);
    let train_sample = sample_copula(truth, cfg.n_trn, &mut rep.split(DATA_KEY))?;
    let pseudo = pseudo_observations(train_sample.as_array())?;
    let transformer = match exact {
        Some(r) => Transformer::Exact(r.clone()),
        None => {
            let mut tc = cfg.model.train.clone();
            tc.seed = rep.split(TRAIN_KEY).next_u64();
            let net = cfg.model.net_config(truth.dim());
            Transformer::Net(
                train(pseudo.sample(), &net, &tc)
                    .map_err(|e| Error::Numeric(format!("replication {}: {e}", b + 1)))?
                    .weights,
            )
        }
    };
    let mut scores = Vec::with_capacity(candidates.len() + 1);
    let mut failures = Vec::new();
    let models = std::iter::once(Ok(truth.clone()))
        .chain(candidates.items().iter().map(|c| c.entry.resolve(pseudo.sample())));
    for (k, spec) in models.enumerate() {
        let generated = spec.and_then(|s| sample_copula(&s, cfg.n_gen, &mut rep.split(MODEL_KEY + k as u64)));
        match generated {
            Ok(u) => scores.push(Some(cvm_score(transformer.apply(&u)?.view())?)),
            Err(e) if k > 0 => {
                scores.push(None);
                failures.push((k - 1, e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Replication { scores, failures })
}

/// Repeats, per replication: sample `n_trn` points from `truth`, take
/// pseudo-observations, train a network (or use the exact Rosenblatt
/// transform of `truth`), then draw `n_gen` points from `truth` and from
/// every candidate, transform and score. Rows are ordered by replication
/// regardless of scheduling.
pub fn simulation_study(truth: &CopulaSpec, candidates: &CandidateSet, cfg: &StudyConfig) -> Result<StudyOutput> {
    truth.validate()?;
    if cfg.replications == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    if cfg.n_gen < 2 || cfg.n_trn < 2 {
        return Err(Error::Config("n_trn and n_gen must be at least 2".into()));
    }
    if candidates.items().iter().any(|c| c.label == TRUE_LABEL) {
        return Err(Error::Config(format!("label '{TRUE_LABEL}' is reserved")));
    }
    let exact = match cfg.kind {
        TransformKind::Rosenblatt => Some(RosenblattSpec::new(truth)?),
        TransformKind::DecoupleNet => {
            cfg.model.net_config(truth.dim()).validate()?;
            cfg.model.train.validate()?;
            if cfg.n_trn % cfg.model.train.n_bat != 0 {
                return Err(Error::Config(format!(
                    "batch size {} must divide n_trn = {}",
                    cfg.model.train.n_bat, cfg.n_trn
                )));
            }
            None
        }
    };
    let reps: Vec<Replication> = (0..cfg.replications)
        .into_par_iter()
        .map(|b| replicate(b, truth, candidates, cfg, exact.as_ref()))
        .collect::<Result<Vec<_>>>()?;

    let mut failures: Vec<(String, String)> = Vec::new();
    let mut dropped = vec![false; candidates.len()];
    for (b, r) in reps.iter().enumerate() {
        for (k, msg) in &r.failures {
            if !dropped[*k] {
                dropped[*k] = true;
                failures.push((
                    candidates.items()[*k].label.clone(),
                    format!("replication {}: {msg}", b + 1),
                ));
            }
        }
    }
    let mut labels = vec![TRUE_LABEL.to_string()];
    labels.extend(
        candidates
            .items()
            .iter()
            .zip(&dropped)
            .filter(|(_, d)| !**d)
            .map(|(c, _)| c.label.clone()),
    );
    let rows: Vec<Vec<f64>> = reps
        .iter()
        .map(|r| {
            r.scores
                .iter()
                .enumerate()
                .filter(|(k, _)| *k == 0 || !dropped[k - 1])
                .map(|(_, s)| s.expect("dropped candidates filtered"))
                .collect()
        })
        .collect();
    let mut table = ScoreTable::new(labels, rows)?;

    let dprime = match cfg.kind {
        TransformKind::DecoupleNet => cfg.model.dprime,
        TransformKind::Rosenblatt => truth.dim(),
    };
    let null_median = median(&null_cvm_distribution(cfg.n_gen, dprime)?);
    let flagged: Vec<usize> = (0..table.replications())
        .filter(|&b| table.row(b)[0] >= TRAINING_FAILURE_RATIO * null_median)
        .map(|b| b + 1)
        .collect();

    table.metadata = vec![
        ("command".into(), "study".into()),
        ("seed".into(), cfg.seed.to_string()),
        ("kind".into(), cfg.kind.to_string()),
        ("replications".into(), cfg.replications.to_string()),
        ("n_trn".into(), cfg.n_trn.to_string()),
        ("n_gen".into(), cfg.n_gen.to_string()),
        ("d".into(), truth.dim().to_string()),
        ("true".into(), truth.describe()),
    ];
    if cfg.kind == TransformKind::DecoupleNet {
        cfg.model.describe_into(&mut table.metadata);
    } else {
        table.metadata.push(("dprime".into(), dprime.to_string()));
    }
    for c in candidates.items() {
        table.metadata.push((format!("candidate.{}", c.label), c.to_string()));
    }
    table.metadata.push(("null_median".into(), null_median.to_string()));
    if !flagged.is_empty() {
        let list: Vec<String> = flagged.iter().map(|b| b.to_string()).collect();
        table.metadata.push(("flagged_replications".into(), list.join(",")));
    }
    Ok(StudyOutput {
        table,
        failures,
        flagged,
    })
}
