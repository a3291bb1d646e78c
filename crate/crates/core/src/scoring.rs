//! Distances between relations, entity pairs and mentions. Lower is better
//! for every function here.

use crate::data::Belief;
use crate::embedding::{EmbeddingTable, Slot};
use crate::error::{Error, Result};
use crate::vocab::{EntityId, RelationId, WordId};

#[inline]
pub fn hinge(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `||h + r - t||^2` over raw vectors.
#[inline]
pub(crate) fn translation_distance(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    h.iter()
        .zip(r)
        .zip(t)
        .map(|((h, r), t)| {
            let e = h + r - t;
            e * e
        })
        .sum()
}

pub(crate) fn mention_sum_into(table: &EmbeddingTable, mention: &[WordId], out: &mut [f64]) {
    out.fill(0.0);
    for &w in mention {
        for (o, x) in out.iter_mut().zip(table.word(w)) {
            *o += x;
        }
    }
}

pub(crate) fn check_belief(table: &EmbeddingTable, belief: &Belief) -> Result<()> {
    table.try_row(Slot::Entity(belief.head))?;
    table.try_row(Slot::Relation(belief.relation))?;
    table.try_row(Slot::Entity(belief.tail))?;
    check_mention(table, &belief.mention)
}

pub(crate) fn check_mention(table: &EmbeddingTable, mention: &[WordId]) -> Result<()> {
    if let Some(&w) = mention.iter().find(|w| w.index() >= table.num_words()) {
        return Err(Error::Lookup {
            namespace: "word",
            id: w.index(),
            len: table.num_words(),
        });
    }
    Ok(())
}

/// Squared Euclidean length of `h + r - t`.
pub fn triple_distance(table: &EmbeddingTable, h: EntityId, r: RelationId, t: EntityId) -> Result<f64> {
    let h = table.try_row(Slot::Entity(h))?;
    let r = table.try_row(Slot::Relation(r))?;
    let t = table.try_row(Slot::Entity(t))?;
    Ok(translation_distance(h, r, t))
}

/// Bag-of-words mention vector: the sum of its word rows, counting repeats.
pub fn mention_vec(table: &EmbeddingTable, mention: &[WordId]) -> Result<Vec<f64>> {
    check_mention(table, mention)?;
    let mut out = vec![0.0; table.dim()];
    mention_sum_into(table, mention, &mut out);
    Ok(out)
}

/// Negative inner product of the relation row and the mention vector.
pub fn mention_distance(table: &EmbeddingTable, r: RelationId, mention: &[WordId]) -> Result<f64> {
    let rel = table.try_row(Slot::Relation(r))?;
    let m = mention_vec(table, mention)?;
    Ok(-dot(rel, &m))
}

/// Joint score: triple distance plus mention distance.
pub fn score(table: &EmbeddingTable, belief: &Belief) -> Result<f64> {
    let dr = triple_distance(table, belief.head, belief.relation, belief.tail)?;
    let dm = mention_distance(table, belief.relation, &belief.mention)?;
    Ok(dr + dm)
}
