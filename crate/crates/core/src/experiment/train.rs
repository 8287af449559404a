use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::nn::{Matrix, Mode, Network, Optimizer, OptimizerConfig, Rng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
}

/// Mini-batch training. Each epoch reshuffles the rows, slices them into
/// batches of `batch_size` (the last one may be short) and takes one optimizer
/// step per batch. Returns the sample-weighted mean loss of every epoch.
pub fn train(
    network: &mut Network,
    inputs: &Matrix,
    targets: &[Matrix],
    options: &TrainOptions,
    shuffle_rng: &mut Rng,
    dropout_rng: &mut Rng,
) -> Result<Vec<f64>> {
    train_with_monitor(
        network,
        inputs,
        targets,
        options,
        shuffle_rng,
        dropout_rng,
        |_, _| Ok(()),
    )
}

/// [`train`], calling `monitor(epoch, network)` after every epoch.
pub fn train_with_monitor(
    network: &mut Network,
    inputs: &Matrix,
    targets: &[Matrix],
    options: &TrainOptions,
    shuffle_rng: &mut Rng,
    dropout_rng: &mut Rng,
    mut monitor: impl FnMut(usize, &Network) -> Result<()>,
) -> Result<Vec<f64>> {
    if options.batch_size == 0 || options.epochs == 0 {
        return Err(Error::Config(
            "epochs and batch_size must be positive".into(),
        ));
    }
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if targets.iter().any(|t| t.rows() != n) {
        return Err(Error::Shape(format!(
            "{n} input rows but targets have {:?} rows",
            targets.iter().map(Matrix::rows).collect::<Vec<_>>()
        )));
    }
    let mut optimizer = Optimizer::new(options.optimizer);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(options.epochs);
    for epoch in 1..=options.epochs {
        order.shuffle(shuffle_rng);
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(options.batch_size).enumerate() {
            let x = inputs.select_rows(batch);
            let t: Vec<Matrix> = targets.iter().map(|m| m.select_rows(batch)).collect();
            let (loss, grads) = network.loss_and_gradients(&x, &t, Mode::Train(dropout_rng))?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b + 1,
                });
            }
            optimizer.step(network, &grads)?;
            epoch_loss += loss * batch.len() as f64;
        }
        trace.push(epoch_loss / n as f64);
        monitor(epoch, network)?;
    }
    Ok(trace)
}
