//! Lock-free parallel SGD.
//!
//! Parameters live in relaxed atomics; each worker reads rows, computes a
//! gradient and writes rows back without locking. Concurrent read-modify-write
//! on the same row may drop an update. Results depend on thread scheduling and
//! are not reproducible bit-for-bit.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::objective::{ExactSum, ParamStore, Scratch};
use super::{check_training_input, sgd, train_rng, with_example, EpochReport, TRAIN_STREAM};
use crate::config::{ModelConfig, Variant};
use crate::data::{Belief, Dataset};
use crate::embedding::{init_embeddings, EmbeddingTable, Slot};
use crate::error::{Error, Result};
use crate::scoring::check_belief;
use crate::vocab::{RelationId, Vocabulary};

struct SharedTable {
    dim: usize,
    entities: Vec<AtomicU64>,
    relations: Vec<AtomicU64>,
    words: Vec<AtomicU64>,
}

impl SharedTable {
    fn from_table(table: EmbeddingTable) -> Self {
        let dim = table.dim();
        let atomize = |v: Vec<f64>| v.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        let (e, r, w) = table.into_flat();
        SharedTable {
            dim,
            entities: atomize(e),
            relations: atomize(r),
            words: atomize(w),
        }
    }

    fn into_table(self) -> EmbeddingTable {
        let plain = |v: Vec<AtomicU64>| v.into_iter().map(|a| f64::from_bits(a.into_inner())).collect();
        EmbeddingTable::from_flat(self.dim, plain(self.entities), plain(self.relations), plain(self.words))
            .expect("shape preserved")
    }

    fn cells(&self, slot: Slot) -> &[AtomicU64] {
        let (buf, idx) = match slot {
            Slot::Entity(id) => (&self.entities, id.index()),
            Slot::Relation(id) => (&self.relations, id.index()),
            Slot::Word(id) => (&self.words, id.index()),
        };
        &buf[idx * self.dim..(idx + 1) * self.dim]
    }
}

struct SharedView<'a> {
    table: &'a SharedTable,
    row: Vec<f64>,
}

impl ParamStore for SharedView<'_> {
    fn dim(&self) -> usize {
        self.table.dim
    }

    fn read(&self, slot: Slot, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(self.table.cells(slot)) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn update<F: FnOnce(&mut [f64])>(&mut self, slot: Slot, f: F) {
        let cells = self.table.cells(slot);
        for (o, c) in self.row.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
        f(&mut self.row);
        for (o, c) in self.row.iter().zip(cells) {
            c.store(o.to_bits(), Ordering::Relaxed);
        }
    }
}

struct Worker {
    rng: ChaCha8Rng,
    scratch: Scratch,
    negatives: Vec<RelationId>,
}

struct ShardResult {
    loss: ExactSum,
    active: u64,
}

fn run_shard(
    shared: &SharedTable,
    worker: &mut Worker,
    shard: &[usize],
    train: &[Belief],
    num_relations: usize,
    variant: Variant,
    config: &ModelConfig,
) -> Result<ShardResult> {
    let mut view = SharedView {
        table: shared,
        row: vec![0.0; shared.dim],
    };
    let mut loss = ExactSum::new();
    let mut active = 0u64;
    for &i in shard {
        let out = sgd::step_with(
            &mut view,
            num_relations,
            &train[i],
            variant,
            config,
            &mut worker.rng,
            &mut worker.negatives,
            &mut worker.scratch,
        )
        .map_err(|e| with_example(e, i))?;
        loss.add(out.loss);
        active += out.active as u64;
    }
    Ok(ShardResult { loss, active })
}

#[cfg(feature = "parallel")]
#[allow(clippy::too_many_arguments)]
fn run_epoch(
    pool: &rayon::ThreadPool,
    shared: &SharedTable,
    workers: &mut [Worker],
    shards: Vec<&[usize]>,
    train: &[Belief],
    num_relations: usize,
    variant: Variant,
    config: &ModelConfig,
) -> Vec<Result<ShardResult>> {
    use rayon::prelude::*;
    pool.install(|| {
        workers
            .par_iter_mut()
            .zip(shards)
            .map(|(w, shard)| run_shard(shared, w, shard, train, num_relations, variant, config))
            .collect()
    })
}

/// Trains with `threads` workers over disjoint shards of each epoch's shuffled
/// order, updating a shared table without locks.
///
/// Without the `parallel` feature the shards run one after another on the
/// calling thread, which keeps the same sharding but is deterministic.
pub fn train_hogwild<F: FnMut(&EpochReport)>(
    dataset: &Dataset,
    vocab: &Vocabulary,
    config: &ModelConfig,
    variant: Variant,
    threads: usize,
    mut progress: F,
) -> Result<(EmbeddingTable, Vec<EpochReport>)> {
    check_training_input(dataset, vocab, config)?;
    if threads == 0 {
        return Err(Error::Config("thread count must be positive".into()));
    }
    let table = init_embeddings(vocab, config)?;
    for b in &dataset.train {
        check_belief(&table, b)?;
    }
    let num_relations = table.num_relations();
    let shared = SharedTable::from_table(table);

    let mut order_rng = train_rng(config.seed);
    let mut workers: Vec<Worker> = (0..threads)
        .map(|k| {
            let mut rng = train_rng(config.seed);
            rng.set_stream(TRAIN_STREAM + 1 + k as u64);
            Worker {
                rng,
                scratch: Scratch::new(config.dim),
                negatives: Vec::new(),
            }
        })
        .collect();

    #[cfg(feature = "parallel")]
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let n = dataset.train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut reports = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let start = Instant::now();
        order.shuffle(&mut order_rng);
        let chunk = n.div_ceil(threads);
        let mut shards: Vec<&[usize]> = order.chunks(chunk).collect();
        shards.resize(threads, &[]);

        #[cfg(feature = "parallel")]
        let results = run_epoch(
            &pool,
            &shared,
            &mut workers,
            shards,
            &dataset.train,
            num_relations,
            variant,
            config,
        );
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Result<ShardResult>> = workers
            .iter_mut()
            .zip(shards)
            .map(|(w, shard)| run_shard(&shared, w, shard, &dataset.train, num_relations, variant, config))
            .collect();

        let mut loss = ExactSum::new();
        let mut active = 0;
        for r in results {
            let r = r?;
            loss.merge(&r.loss);
            active += r.active;
        }
        let report = EpochReport {
            epoch,
            mean_loss: loss.value() / n as f64,
            active_terms: active,
            elapsed: start.elapsed(),
        };
        progress(&report);
        reports.push(report);
    }
    Ok((shared.into_table(), reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{SignalKind, SyntheticSpec};

    #[test]
    fn shared_table_round_trips() {
        let t = EmbeddingTable::from_rows(&[&[1.0, -0.0]], &[&[f64::MIN_POSITIVE, 3.5]], &[&[-2.0, 7.25]]).unwrap();
        let back = SharedTable::from_table(t.clone()).into_table();
        assert!(back.bit_eq(&t));
    }

    #[test]
    fn single_thread_hogwild_is_reproducible_and_learns() {
        let data = SyntheticSpec {
            beliefs: 400,
            relations: 5,
            signal: SignalKind::Mention,
            ..SyntheticSpec::default()
        }
        .generate(3);
        let c = ModelConfig {
            dim: 10,
            epochs: 15,
            ..ModelConfig::default()
        };
        let (a, ra) = train_hogwild(&data.dataset, &data.vocab, &c, Variant::Tme, 1, |_| {}).unwrap();
        let (b, _) = train_hogwild(&data.dataset, &data.vocab, &c, Variant::Tme, 1, |_| {}).unwrap();
        assert!(a.bit_eq(&b));
        assert!(ra.last().unwrap().mean_loss < ra[0].mean_loss);
    }

    #[test]
    fn multi_thread_hogwild_converges() {
        let data = SyntheticSpec {
            beliefs: 600,
            relations: 6,
            signal: SignalKind::Mention,
            ..SyntheticSpec::default()
        }
        .generate(5);
        let c = ModelConfig {
            dim: 10,
            epochs: 20,
            ..ModelConfig::default()
        };
        let (table, reports) = train_hogwild(&data.dataset, &data.vocab, &c, Variant::Tme, 4, |_| {}).unwrap();
        assert!(table.is_finite());
        assert_eq!(reports.len(), 20);
        let report = crate::evaluation::evaluate(&table, &data.dataset.test, Variant::Tme).unwrap();
        assert!(report.hit_at_1 > 0.9, "{report:?}");
    }

    #[test]
    fn zero_threads_rejected() {
        let data = SyntheticSpec::default().generate(0);
        let c = ModelConfig {
            dim: 4,
            epochs: 1,
            ..ModelConfig::default()
        };
        assert!(train_hogwild(&data.dataset, &data.vocab, &c, Variant::Kre, 0, |_| {}).is_err());
    }
}
