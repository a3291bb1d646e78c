//! Relation-corruption margin training for the KRE, TME and JRME objectives.

mod grid;
mod hogwild;
mod negatives;
mod objective;
mod sgd;

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use grid::{grid_search, GridOutcome, GridPoint, HyperGrid};
pub use hogwild::train_hogwild;
pub use negatives::negatives_for;
pub use objective::{
    example_gradient, example_loss, jrme_example_loss, kre_example_loss, tme_example_loss, ExactSum, ExampleLoss,
    Gradient, ParamStore,
};
pub use sgd::{sgd_step, StepOutcome};

use crate::config::{ModelConfig, Variant};
use crate::data::Dataset;
use crate::embedding::{init_embeddings, EmbeddingTable};
use crate::error::{Error, Result};
use crate::scoring::check_belief;
use crate::vocab::Vocabulary;

/// Stream of the ChaCha generator used for epoch shuffles and sampled negatives.
/// Stream 0 is reserved for initialization.
pub(crate) const TRAIN_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    /// 1-based epoch number.
    pub epoch: usize,
    pub mean_loss: f64,
    /// Hinge terms with positive value over the epoch.
    pub active_terms: u64,
    pub elapsed: Duration,
}

impl fmt::Display for EpochReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch={} loss={} active={}",
            self.epoch, self.mean_loss, self.active_terms
        )
    }
}

pub(crate) fn check_training_input(dataset: &Dataset, vocab: &Vocabulary, config: &ModelConfig) -> Result<()> {
    config.validate()?;
    if dataset.train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    if config.epochs > 0 && vocab.num_relations() < 2 {
        return Err(Error::Config(format!(
            "relation corruption needs at least 2 relations, vocabulary has {}",
            vocab.num_relations()
        )));
    }
    Ok(())
}

pub(crate) fn train_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TRAIN_STREAM);
    rng
}

/// Single-threaded training; a deterministic function of
/// `(config, dataset, variant)`.
pub fn train(
    dataset: &Dataset,
    vocab: &Vocabulary,
    config: &ModelConfig,
    variant: Variant,
) -> Result<(EmbeddingTable, Vec<EpochReport>)> {
    train_with_progress(dataset, vocab, config, variant, |_| {})
}

/// [`train`] with a callback invoked after every epoch.
pub fn train_with_progress<F: FnMut(&EpochReport)>(
    dataset: &Dataset,
    vocab: &Vocabulary,
    config: &ModelConfig,
    variant: Variant,
    mut progress: F,
) -> Result<(EmbeddingTable, Vec<EpochReport>)> {
    check_training_input(dataset, vocab, config)?;
    let mut table = init_embeddings(vocab, config)?;
    for b in &dataset.train {
        check_belief(&table, b)?;
    }

    let num_relations = table.num_relations();
    let mut rng = train_rng(config.seed);
    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    let mut scratch = objective::Scratch::new(config.dim);
    let mut negatives = Vec::new();
    let mut reports = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut loss = ExactSum::new();
        let mut active = 0u64;
        for &i in &order {
            let belief = &dataset.train[i];
            let out = sgd::step_with(
                &mut table,
                num_relations,
                belief,
                variant,
                config,
                &mut rng,
                &mut negatives,
                &mut scratch,
            )
            .map_err(|e| with_example(e, i))?;
            loss.add(out.loss);
            active += out.active as u64;
        }
        let report = EpochReport {
            epoch,
            mean_loss: loss.value() / dataset.train.len() as f64,
            active_terms: active,
            elapsed: start.elapsed(),
        };
        progress(&report);
        reports.push(report);
    }
    Ok((table, reports))
}

pub(crate) fn with_example(err: Error, index: usize) -> Error {
    match err {
        Error::NonFinite { detail, .. } => Error::NonFinite {
            example: Some(index),
            detail,
        },
        other => other,
    }
}
