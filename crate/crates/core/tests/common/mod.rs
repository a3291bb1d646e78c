//! Reference implementations used as oracles. Everything here reads raw rows
//! from the table and recomputes distances by the textbook formulas, without
//! going through the crate's scoring or loss code.

#![allow(dead_code)]

use jrme::{Belief, EmbeddingTable, RelationId, Slot, Variant};
use rand::Rng;

pub const FD_STEP: f64 = 1e-6;
pub const FD_REL_TOL: f64 = 1e-5;

fn sq_dist(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..h.len() {
        let e = h[i] + r[i] - t[i];
        s += e * e;
    }
    s
}

fn mention_sum(table: &EmbeddingTable, belief: &Belief) -> Vec<f64> {
    let mut m = vec![0.0; table.dim()];
    for &w in &belief.mention {
        for (acc, x) in m.iter_mut().zip(table.word(w)) {
            *acc += x;
        }
    }
    m
}

fn neg_dot(r: &[f64], m: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..r.len() {
        s += r[i] * m[i];
    }
    -s
}

/// Hinge arguments, one per negative.
pub fn oracle_terms(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    variant: Variant,
    margin: f64,
) -> Vec<f64> {
    let h = table.entity(belief.head);
    let t = table.entity(belief.tail);
    let r = table.relation(belief.relation);
    let m = mention_sum(table, belief);
    negatives
        .iter()
        .map(|&neg| {
            let rn = table.relation(neg);
            let dr = sq_dist(h, r, t) - sq_dist(h, rn, t);
            let dm = neg_dot(r, &m) - neg_dot(rn, &m);
            match variant {
                Variant::Kre => margin + dr,
                Variant::Tme => margin + dm,
                Variant::Jrme => margin + dr + dm,
            }
        })
        .collect()
}

pub fn oracle_loss(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    variant: Variant,
    margin: f64,
) -> f64 {
    oracle_terms(table, belief, negatives, variant, margin)
        .into_iter()
        .map(|x| x.max(0.0))
        .sum()
}

/// Candidate scores recomputed from raw rows.
pub fn oracle_scores(table: &EmbeddingTable, belief: &Belief, variant: Variant) -> Vec<f64> {
    let h = table.entity(belief.head);
    let t = table.entity(belief.tail);
    let m = mention_sum(table, belief);
    (0..table.num_relations())
        .map(|i| {
            let r = table.relation(RelationId(i as u32));
            match variant {
                Variant::Kre => sq_dist(h, r, t),
                Variant::Tme => neg_dot(r, &m),
                Variant::Jrme => sq_dist(h, r, t) + neg_dot(r, &m),
            }
        })
        .collect()
}

/// Position of `truth` after a stable sort of `(score, id)` pairs by score.
pub fn oracle_rank(scores: &[f64], truth: RelationId) -> usize {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    order.iter().position(|&i| i == truth.index()).unwrap() + 1
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FdStats {
    pub coords: usize,
    pub max_rel_err: f64,
}

/// Compares the analytic gradient with central differences of the oracle loss
/// on every coordinate of every row the example could touch. Rows absent from
/// the analytic gradient must have a zero numerical gradient.
pub fn finite_difference_check(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    variant: Variant,
    margin: f64,
) -> Result<FdStats, String> {
    let (_, grad) =
        jrme::training::example_gradient(table, belief, negatives, variant, margin).map_err(|e| e.to_string())?;
    let mut slots = vec![
        Slot::Entity(belief.head),
        Slot::Entity(belief.tail),
        Slot::Relation(belief.relation),
    ];
    slots.extend(negatives.iter().map(|&r| Slot::Relation(r)));
    slots.extend(belief.mention.iter().map(|&w| Slot::Word(w)));
    slots.sort();
    slots.dedup();

    let zeros = vec![0.0; table.dim()];
    let mut stats = FdStats::default();
    let mut probe = table.clone();
    for slot in slots {
        let analytic = grad.get(slot).unwrap_or(&zeros);
        for (i, &a) in analytic.iter().enumerate() {
            let orig = probe.row(slot)[i];
            probe.row_mut(slot)[i] = orig + FD_STEP;
            let up = oracle_loss(&probe, belief, negatives, variant, margin);
            probe.row_mut(slot)[i] = orig - FD_STEP;
            let down = oracle_loss(&probe, belief, negatives, variant, margin);
            probe.row_mut(slot)[i] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
            stats.coords += 1;
            stats.max_rel_err = stats.max_rel_err.max(err);
            if err > FD_REL_TOL {
                return Err(format!(
                    "{variant} {slot:?}[{i}]: analytic {a} vs numeric {numeric} (rel err {err:.3e})"
                ));
            }
        }
    }
    Ok(stats)
}

/// Random table with entries in `[-1, 1]`.
pub fn random_table<R: Rng>(
    rng: &mut R,
    dim: usize,
    entities: usize,
    relations: usize,
    words: usize,
) -> EmbeddingTable {
    let mut draw = |n: usize| (0..n * dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let e = draw(entities);
    let r = draw(relations);
    let w = draw(words);
    EmbeddingTable::from_flat(dim, e, r, w).unwrap()
}

/// Random belief over the table's ids; the mention may repeat words.
pub fn random_belief<R: Rng>(rng: &mut R, table: &EmbeddingTable, max_mention: usize) -> Belief {
    let len = rng.gen_range(0..=max_mention);
    Belief::new(
        jrme::EntityId(rng.gen_range(0..table.num_entities() as u32)),
        RelationId(rng.gen_range(0..table.num_relations() as u32)),
        jrme::EntityId(rng.gen_range(0..table.num_entities() as u32)),
        (0..len)
            .map(|_| jrme::WordId(rng.gen_range(0..table.num_words() as u32)))
            .collect(),
    )
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
