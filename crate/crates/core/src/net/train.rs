use ndarray::{Array2, ArrayView2};

use super::adam::{adam_step, AdamState};
use super::config::{NetConfig, TrainConfig};
use super::mmd::KernelDerivative;
use super::model::{glorot_init, mmd_weight_gradient, normal_scores, NetWeights};
use crate::copula::{sample_copula, CopulaSpec, Sample};
use crate::error::{Error, Result};
use crate::numeric::Rng;

const INIT_STREAM: u64 = 1;
const TARGET_STREAM: u64 = 2;
const SHUFFLE_STREAM: u64 = 3;

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub weights: NetWeights,
    /// Total number of Adam updates performed.
    pub steps: u64,
}

fn gather(src: ArrayView2<'_, f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros((idx.len(), src.ncols()));
    for (mut row, &i) in out.rows_mut().into_iter().zip(idx) {
        row.assign(&src.row(i));
    }
    out
}

/// Mini-batch MMD training from Glorot-initialized weights.
///
/// The uniform targets are drawn once; every epoch re-partitions inputs and
/// targets independently into `n_trn / n_bat` batches.
pub fn train(input: &Sample, net: &NetConfig, cfg: &TrainConfig) -> Result<TrainReport> {
    train_with_progress(input, net, cfg, |_, _| {})
}

/// [`train`] with a callback invoked after every epoch with
/// `(epoch, steps_so_far)`.
pub fn train_with_progress(
    input: &Sample,
    net: &NetConfig,
    cfg: &TrainConfig,
    mut progress: impl FnMut(usize, u64),
) -> Result<TrainReport> {
    net.validate()?;
    cfg.validate()?;
    let n_trn = input.n();
    if input.d() != net.input_dim {
        return Err(Error::Shape(format!(
            "training sample has {} columns, network expects {}",
            input.d(),
            net.input_dim
        )));
    }
    if n_trn == 0 || n_trn % cfg.n_bat != 0 {
        return Err(Error::Config(format!(
            "batch size {} must divide the training size {n_trn}",
            cfg.n_bat
        )));
    }
    let root = Rng::new(cfg.seed);
    let mut weights = glorot_init(net, &mut root.split(INIT_STREAM))?;
    let x = normal_scores(input.view())?;
    let target = sample_copula(
        &CopulaSpec::Independence { d: net.output_dim },
        n_trn,
        &mut root.split(TARGET_STREAM),
    )?
    .into_array();
    let kd = KernelDerivative::new(&cfg.bandwidths);
    let mut shuffle = root.split(SHUFFLE_STREAM);
    let mut state = AdamState::new(weights.num_params());
    let mut in_perm: Vec<usize> = (0..n_trn).collect();
    let mut tg_perm: Vec<usize> = (0..n_trn).collect();
    let batches = n_trn / cfg.n_bat;
    for epoch in 1..=cfg.n_epo {
        shuffle.shuffle(&mut in_perm);
        shuffle.shuffle(&mut tg_perm);
        for b in 0..batches {
            let range = b * cfg.n_bat..(b + 1) * cfg.n_bat;
            let xb = gather(x.view(), &in_perm[range.clone()]);
            let tb = gather(target.view(), &tg_perm[range]);
            let grad = mmd_weight_gradient(&weights, xb.view(), tb.view(), &kd)
                .map_err(|e| Error::Numeric(format!("epoch {epoch}, batch {}: {e}", b + 1)))?;
            adam_step(&mut state, &mut weights, &grad, &cfg.adam)?;
        }
        debug_assert_eq!(state.step, (epoch * batches) as u64);
        progress(epoch, state.step);
    }
    Ok(TrainReport {
        weights,
        steps: state.step,
    })
}
