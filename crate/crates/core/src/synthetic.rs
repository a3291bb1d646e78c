//! Synthetic belief sets with a planted, known source of relation signal.
//!
//! Used by the test suites and benches; every generator is deterministic in
//! its seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{format_belief, Belief, Dataset};
use crate::vocab::{RelationId, Vocabulary};

/// Where the information identifying a belief's relation lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// Each relation owns a key word that appears in every one of its mentions;
    /// entity pairs are drawn at random.
    Mention,
    /// Entities come in head and tail clusters; the (head cluster, tail cluster)
    /// pair fixes the relation, so `r = c_tail - c_head` is a consistent
    /// translation. Mentions are empty.
    Graph,
    /// Relations factor as (graph class, text class): clusters fix the graph
    /// class, the mention key word fixes the text class. Neither source alone
    /// identifies the relation.
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub beliefs: usize,
    pub relations: usize,
    pub signal: SignalKind,
    /// Entities in each cluster (graph signal) or in the flat pool divided by
    /// ten (mention signal).
    pub cluster_size: usize,
    /// Size of the shared pool of uninformative mention words.
    pub noise_words: usize,
    /// Up to this many noise words are added to each mention.
    pub max_noise_per_mention: usize,
    pub test_fraction: f64,
    pub valid_fraction: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            beliefs: 200,
            relations: 4,
            signal: SignalKind::Mention,
            cluster_size: 8,
            noise_words: 20,
            max_noise_per_mention: 2,
            test_fraction: 0.2,
            valid_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub vocab: Vocabulary,
    pub dataset: Dataset,
}

impl SyntheticData {
    /// Four-column TSV text for a split.
    pub fn to_tsv(&self, split: &[Belief]) -> String {
        let mut out = String::new();
        for b in split {
            out.push_str(&format_belief(b, &self.vocab).expect("generated ids are registered"));
            out.push('\n');
        }
        out
    }
}

/// Largest divisor of `n` not exceeding `sqrt(n)`.
fn balanced_factor(n: usize) -> usize {
    (1..=n)
        .take_while(|d| d * d <= n)
        .filter(|d| n.is_multiple_of(*d))
        .last()
        .unwrap_or(1)
}

/// Smallest `(rows, cols)` grid with `rows * cols >= n` and `rows <= cols`.
fn cluster_grid(n: usize) -> (usize, usize) {
    let rows = (n as f64).sqrt().floor().max(1.0) as usize;
    (rows, n.div_ceil(rows))
}

impl SyntheticSpec {
    pub fn generate(&self, seed: u64) -> SyntheticData {
        assert!(self.relations >= 2, "need at least two relations");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vocab = Vocabulary::new();

        let relations: Vec<RelationId> = (0..self.relations)
            .map(|i| vocab.intern_relation(&format!("rel{i}")))
            .collect();
        let noise: Vec<_> = (0..self.noise_words)
            .map(|i| vocab.intern_word(&format!("noise{i}")))
            .collect();

        // (graph classes, text classes) such that graph * text == relations
        let (graph_classes, text_classes) = match self.signal {
            SignalKind::Mention => (1, self.relations),
            SignalKind::Graph => (self.relations, 1),
            SignalKind::Mixed => {
                let g = balanced_factor(self.relations);
                (g, self.relations / g)
            }
        };
        let keys: Vec<_> = (0..text_classes)
            .map(|i| vocab.intern_word(&format!("key{i}")))
            .collect();

        let (head_clusters, tail_clusters) = if graph_classes > 1 {
            cluster_grid(graph_classes)
        } else {
            (1, 1)
        };
        let pool = if graph_classes > 1 {
            self.cluster_size
        } else {
            self.cluster_size * 10
        };
        let heads: Vec<Vec<_>> = (0..head_clusters)
            .map(|c| (0..pool).map(|i| vocab.intern_entity(&format!("h{c}_{i}"))).collect())
            .collect();
        let tails: Vec<Vec<_>> = (0..tail_clusters)
            .map(|c| (0..pool).map(|i| vocab.intern_entity(&format!("t{c}_{i}"))).collect())
            .collect();

        let mut beliefs = Vec::with_capacity(self.beliefs);
        for _ in 0..self.beliefs {
            let rel = rng.gen_range(0..self.relations);
            let (g, x) = (rel / text_classes, rel % text_classes);
            let (hc, tc) = if graph_classes > 1 {
                (g / tail_clusters, g % tail_clusters)
            } else {
                (0, 0)
            };
            let head = *heads[hc].choose(&mut rng).unwrap();
            let tail = *tails[tc].choose(&mut rng).unwrap();
            let mut mention = Vec::new();
            if text_classes > 1 {
                mention.push(keys[x]);
                if !noise.is_empty() {
                    let k = rng.gen_range(0..=self.max_noise_per_mention);
                    mention.extend((0..k).map(|_| *noise.choose(&mut rng).unwrap()));
                }
                mention.shuffle(&mut rng);
            }
            beliefs.push(Belief::new(head, relations[rel], tail, mention));
        }

        let n = beliefs.len();
        let n_test = (n as f64 * self.test_fraction).round() as usize;
        let n_valid = (n as f64 * self.valid_fraction).round() as usize;
        let test = beliefs.split_off(n - n_test);
        let valid = beliefs.split_off(beliefs.len() - n_valid.min(beliefs.len()));
        SyntheticData {
            vocab,
            dataset: Dataset {
                train: beliefs,
                valid,
                test,
            },
        }
    }
}
