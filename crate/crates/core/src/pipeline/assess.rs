use ndarray::Array2;
use rand::RngCore;

use super::candidates::{CandidateSet, EMPIRICAL_LABEL};
use super::scores::ScoreTable;
use crate::copula::{sample_copula, CopulaSpec, Sample};
use crate::empirical::{cvm_score, pseudo_observations, sample_empirical};
use crate::error::{Error, Result};
use crate::net::{train, transform, Activation, NetConfig, NetWeights, TrainConfig};
use crate::numeric::Rng;

pub const MIN_ASSESS_SIZE: usize = 50;

/// Architecture and optimizer settings shared by `assess` and the
/// simulation study; the input dimension comes from the data.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoupleConfig {
    pub dprime: usize,
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub train: TrainConfig,
}

impl Default for DecoupleConfig {
    fn default() -> Self {
        let net = NetConfig::new(2, 2);
        DecoupleConfig {
            dprime: 2,
            hidden: net.hidden,
            hidden_activation: net.hidden_activation,
            train: TrainConfig::default(),
        }
    }
}

impl DecoupleConfig {
    pub fn net_config(&self, d: usize) -> NetConfig {
        NetConfig::new(d, self.dprime).with_hidden(self.hidden.clone(), self.hidden_activation)
    }

    pub(crate) fn describe_into(&self, meta: &mut Vec<(String, String)>) {
        let t = &self.train;
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        meta.extend([
            ("dprime".to_string(), self.dprime.to_string()),
            ("hidden".to_string(), hidden.join(",")),
            ("hidden_activation".to_string(), self.hidden_activation.to_string()),
            ("epochs".to_string(), t.n_epo.to_string()),
            ("batch".to_string(), t.n_bat.to_string()),
            ("bandwidths".to_string(), list(&t.bandwidths)),
            (
                "adam".to_string(),
                format!("{},{},{},{}", t.adam.beta1, t.adam.beta2, t.adam.alpha, t.adam.epsilon),
            ),
        ]);
    }
}

/// Largest divisor of `n` not exceeding `target`; used as the batch size
/// when the requested one does not divide the training size.
pub fn batch_size_for(n: usize, target: usize) -> usize {
    (1..=target.min(n).max(1)).rev().find(|b| n % b == 0).unwrap_or(1)
}

#[derive(Clone, Debug)]
pub struct AssessConfig {
    pub model: DecoupleConfig,
    pub n_gen: usize,
    pub seed: u64,
}

/// Generated (input-space) and transformed samples of one model.
#[derive(Clone, Debug)]
pub struct ModelSample {
    pub label: String,
    pub input: Sample,
    pub output: Sample,
}

#[derive(Clone, Debug)]
pub struct Assessment {
    /// One replication; the empirical benchmark is the first column.
    pub table: ScoreTable,
    pub fitted: Vec<(String, CopulaSpec)>,
    /// Candidates dropped because fitting (or sampling) failed.
    pub failures: Vec<(String, String)>,
    pub samples: Vec<ModelSample>,
    pub weights: NetWeights,
}

impl Assessment {
    /// `(label, score)` in ascending order of score.
    pub fn ranked(&self) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = self
            .table
            .models()
            .iter()
            .cloned()
            .zip(self.table.row(0).iter().copied())
            .collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1));
        v
    }
}

const TRAIN_KEY: u64 = 1;
const MODEL_KEY: u64 = 100;

/// Scores every candidate (plus the empirical-copula benchmark) on a data
/// set: pseudo-observations, fits, one trained network, `n_gen` draws per
/// model, transform and CvM score.
pub fn assess(data: &Array2<f64>, candidates: &CandidateSet, cfg: &AssessConfig) -> Result<Assessment> {
    let (n, d) = data.dim();
    if n < MIN_ASSESS_SIZE {
        return Err(Error::Input(format!("assess needs at least {MIN_ASSESS_SIZE} rows, got {n}")));
    }
    if cfg.n_gen < 2 {
        return Err(Error::Config("n_gen must be at least 2".into()));
    }
    let pseudo = pseudo_observations(data)?;
    let root = Rng::new(cfg.seed);

    let mut fitted = Vec::new();
    let mut failures = Vec::new();
    for c in candidates.items() {
        match c.entry.resolve(pseudo.sample()) {
            Ok(spec) => fitted.push((c.label.clone(), spec)),
            Err(e) => failures.push((c.label.clone(), e.to_string())),
        }
    }

    let mut train_cfg = cfg.model.train.clone();
    train_cfg.seed = root.split(TRAIN_KEY).next_u64();
    let weights = train(pseudo.sample(), &cfg.model.net_config(d), &train_cfg)?.weights;

    let mut labels = vec![EMPIRICAL_LABEL.to_string()];
    let mut scores = Vec::new();
    let mut samples = Vec::new();
    let bench = sample_empirical(&pseudo, cfg.n_gen, &mut root.split(MODEL_KEY));
    let out = transform(&weights, &bench)?;
    scores.push(cvm_score(out.view())?);
    samples.push(ModelSample {
        label: EMPIRICAL_LABEL.to_string(),
        input: bench,
        output: out,
    });
    let mut kept = Vec::new();
    for (k, (label, spec)) in fitted.into_iter().enumerate() {
        let mut rng = root.split(MODEL_KEY + 1 + k as u64);
        let generated = match sample_copula(&spec, cfg.n_gen, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                failures.push((label, e.to_string()));
                continue;
            }
        };
        let out = transform(&weights, &generated)?;
        scores.push(cvm_score(out.view())?);
        labels.push(label.clone());
        samples.push(ModelSample {
            label: label.clone(),
            input: generated,
            output: out,
        });
        kept.push((label, spec));
    }
    let mut table = ScoreTable::new(labels, vec![scores])?;
    table.metadata = vec![
        ("command".into(), "assess".into()),
        ("seed".into(), cfg.seed.to_string()),
        ("train_seed".into(), train_cfg.seed.to_string()),
        ("n".into(), n.to_string()),
        ("d".into(), d.to_string()),
        ("n_gen".into(), cfg.n_gen.to_string()),
    ];
    cfg.model.describe_into(&mut table.metadata);
    for (label, spec) in &kept {
        table.metadata.push((format!("fitted.{label}"), spec.describe()));
    }
    for (label, msg) in &failures {
        table.metadata.push((format!("failed.{label}"), msg.clone()));
    }
    Ok(Assessment {
        table,
        fitted: kept,
        failures,
        samples,
        weights,
    })
}
