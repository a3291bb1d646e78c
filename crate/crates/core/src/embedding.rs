//! Dense row-major embedding tables for entities, relations and words.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::vocab::{EntityId, RelationId, Vocabulary, WordId};

/// A single parameter row in one of the three tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Entity(EntityId),
    Relation(RelationId),
    Word(WordId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
    words: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(dim: usize, num_entities: usize, num_relations: usize, num_words: usize) -> Self {
        EmbeddingTable {
            dim,
            entities: vec![0.0; num_entities * dim],
            relations: vec![0.0; num_relations * dim],
            words: vec![0.0; num_words * dim],
        }
    }

    /// Builds a table from flat row-major buffers. Each buffer length must be a
    /// multiple of `dim`.
    pub fn from_flat(dim: usize, entities: Vec<f64>, relations: Vec<f64>, words: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        for (name, buf) in [("entity", &entities), ("relation", &relations), ("word", &words)] {
            if buf.len() % dim != 0 {
                return Err(Error::Config(format!(
                    "{name} buffer of length {} is not a multiple of dim {dim}",
                    buf.len()
                )));
            }
        }
        Ok(EmbeddingTable {
            dim,
            entities,
            relations,
            words,
        })
    }

    /// Builds a table from explicit rows; handy for hand-made fixtures.
    pub fn from_rows(entities: &[&[f64]], relations: &[&[f64]], words: &[&[f64]]) -> Result<Self> {
        let dim = entities
            .iter()
            .chain(relations)
            .chain(words)
            .map(|r| r.len())
            .next()
            .ok_or_else(|| Error::Config("table needs at least one row".into()))?;
        let flatten = |rows: &[&[f64]]| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(rows.len() * dim);
            for row in rows {
                if row.len() != dim {
                    return Err(Error::Config(format!(
                        "row of length {} in a dim-{dim} table",
                        row.len()
                    )));
                }
                out.extend_from_slice(row);
            }
            Ok(out)
        };
        Self::from_flat(dim, flatten(entities)?, flatten(relations)?, flatten(words)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len() / self.dim
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len() / self.dim
    }

    pub fn num_words(&self) -> usize {
        self.words.len() / self.dim
    }

    pub fn entity_data(&self) -> &[f64] {
        &self.entities
    }

    pub fn relation_data(&self) -> &[f64] {
        &self.relations
    }

    pub fn word_data(&self) -> &[f64] {
        &self.words
    }

    pub(crate) fn into_flat(self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (self.entities, self.relations, self.words)
    }

    fn buffer(&self, slot: Slot) -> (&[f64], usize, &'static str) {
        match slot {
            Slot::Entity(id) => (&self.entities, id.index(), "entity"),
            Slot::Relation(id) => (&self.relations, id.index(), "relation"),
            Slot::Word(id) => (&self.words, id.index(), "word"),
        }
    }

    /// Checked row access.
    pub fn try_row(&self, slot: Slot) -> Result<&[f64]> {
        let (buf, idx, namespace) = self.buffer(slot);
        let len = buf.len() / self.dim;
        if idx >= len {
            return Err(Error::Lookup {
                namespace,
                id: idx,
                len,
            });
        }
        Ok(&buf[idx * self.dim..(idx + 1) * self.dim])
    }

    /// Unchecked-by-contract row access; panics on an out-of-range id.
    #[inline]
    pub fn row(&self, slot: Slot) -> &[f64] {
        let (buf, idx, _) = self.buffer(slot);
        &buf[idx * self.dim..(idx + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, slot: Slot) -> &mut [f64] {
        let d = self.dim;
        let (buf, idx) = match slot {
            Slot::Entity(id) => (&mut self.entities, id.index()),
            Slot::Relation(id) => (&mut self.relations, id.index()),
            Slot::Word(id) => (&mut self.words, id.index()),
        };
        &mut buf[idx * d..(idx + 1) * d]
    }

    #[inline]
    pub fn entity(&self, id: EntityId) -> &[f64] {
        self.row(Slot::Entity(id))
    }

    #[inline]
    pub fn relation(&self, id: RelationId) -> &[f64] {
        self.row(Slot::Relation(id))
    }

    #[inline]
    pub fn word(&self, id: WordId) -> &[f64] {
        self.row(Slot::Word(id))
    }

    pub fn is_finite(&self) -> bool {
        self.entities
            .iter()
            .chain(&self.relations)
            .chain(&self.words)
            .all(|v| v.is_finite())
    }

    /// Whether the table has a row for every symbol of `vocab`.
    pub fn matches_vocab(&self, vocab: &Vocabulary) -> bool {
        self.num_entities() == vocab.num_entities()
            && self.num_relations() == vocab.num_relations()
            && self.num_words() == vocab.num_words()
    }

    /// Bitwise equality, distinguishing `-0.0` from `0.0` and comparing NaN payloads.
    pub fn bit_eq(&self, other: &EmbeddingTable) -> bool {
        let same =
            |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        self.dim == other.dim
            && same(&self.entities, &other.entities)
            && same(&self.relations, &other.relations)
            && same(&self.words, &other.words)
    }
}

/// Scales `v` to unit Euclidean norm; a zero vector is left as is.
pub(crate) fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}

/// Half-width of the uniform initialization interval, `6 / sqrt(d)`.
pub fn init_bound(dim: usize) -> f64 {
    6.0 / (dim as f64).sqrt()
}

fn draw_uniform(vocab: &Vocabulary, config: &ModelConfig) -> Result<EmbeddingTable> {
    if config.dim == 0 {
        return Err(Error::Config("dim must be positive".into()));
    }
    let d = config.dim;
    let bound = init_bound(d);
    let dist = Uniform::new_inclusive(-bound, bound);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut fill = |rows: usize| -> Vec<f64> { (0..rows * d).map(|_| dist.sample(&mut rng)).collect() };
    let entities = fill(vocab.num_entities());
    let relations = fill(vocab.num_relations());
    let words = fill(vocab.num_words());
    Ok(EmbeddingTable {
        dim: d,
        entities,
        relations,
        words,
    })
}

/// Uniform draw on `[-6/sqrt(d), 6/sqrt(d)]` for every row, then entity rows
/// scaled to unit norm. A pure function of `(seed, vocabulary sizes, dim)`.
pub fn init_embeddings(vocab: &Vocabulary, config: &ModelConfig) -> Result<EmbeddingTable> {
    let mut table = draw_uniform(vocab, config)?;
    let d = table.dim;
    for row in table.entities.chunks_exact_mut(d) {
        normalize(row);
    }
    Ok(table)
}
