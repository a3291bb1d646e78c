//! Relation ranking: score every relation for a test belief, sort ascending,
//! and report the position of the true one.
//!
//! Ties are broken by relation id, so the rank of relation `r` is
//! `1 + #{r' : s(r') < s(r)} + #{r' : s(r') == s(r), r' < r}`. Rankings are
//! raw: other relations known to hold for the same pair are not filtered.

use std::fmt::{self, Write as _};

use crate::config::Variant;
use crate::data::Belief;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scoring::{check_belief, check_mention, dot, mention_sum_into, translation_distance};
use crate::vocab::{EntityId, RelationId, WordId};

/// Score of every relation for `(head, tail, mention)` under `variant`, indexed
/// by relation id. Lower is better.
pub fn candidate_scores(
    table: &EmbeddingTable,
    head: EntityId,
    tail: EntityId,
    mention: &[WordId],
    variant: Variant,
) -> Result<Vec<f64>> {
    table.try_row(crate::embedding::Slot::Entity(head))?;
    table.try_row(crate::embedding::Slot::Entity(tail))?;
    check_mention(table, mention)?;
    let mut out = vec![0.0; table.num_relations()];
    let mut m = vec![0.0; table.dim()];
    scores_into(table, head, tail, mention, variant, &mut m, &mut out);
    Ok(out)
}

fn scores_into(
    table: &EmbeddingTable,
    head: EntityId,
    tail: EntityId,
    mention: &[WordId],
    variant: Variant,
    m: &mut [f64],
    out: &mut [f64],
) {
    let h = table.entity(head);
    let t = table.entity(tail);
    if variant.uses_mention() {
        mention_sum_into(table, mention, m);
    }
    for (i, s) in out.iter_mut().enumerate() {
        let r = table.relation(RelationId::from_index(i));
        *s = match variant {
            Variant::Kre => translation_distance(h, r, t),
            Variant::Tme => -dot(r, m),
            Variant::Jrme => translation_distance(h, r, t) + -dot(r, m),
        };
    }
}

/// Rank of `truth` within `scores` under the ascending (score, id) order.
pub fn rank_from_scores(scores: &[f64], truth: RelationId) -> usize {
    let k = truth.index();
    let s = scores[k];
    let better = scores
        .iter()
        .enumerate()
        .filter(|&(i, &x)| x < s || (x == s && i < k))
        .count();
    better + 1
}

/// Rank of the belief's own relation among all relations.
pub fn rank_true_relation(table: &EmbeddingTable, belief: &Belief, variant: Variant) -> Result<usize> {
    check_belief(table, belief)?;
    let mut scores = vec![0.0; table.num_relations()];
    let mut m = vec![0.0; table.dim()];
    scores_into(
        table,
        belief.head,
        belief.tail,
        &belief.mention,
        variant,
        &mut m,
        &mut scores,
    );
    Ok(rank_from_scores(&scores, belief.relation))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub avg_rank: f64,
    pub hit_at_10: f64,
    pub hit_at_1: f64,
    /// `(belief index, rank)` in split order.
    pub ranks: Vec<(usize, usize)>,
}

impl EvalReport {
    /// Aggregates ranks listed in belief order.
    pub fn from_ranks(ranks: &[usize]) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::EmptySplit);
        }
        let n = ranks.len() as f64;
        let total: u64 = ranks.iter().map(|&r| r as u64).sum();
        let within = |k: usize| ranks.iter().filter(|&&r| r <= k).count() as f64 / n;
        Ok(EvalReport {
            avg_rank: total as f64 / n,
            hit_at_10: within(10),
            hit_at_1: within(1),
            ranks: ranks.iter().copied().enumerate().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Bitwise equality of metrics and ranks.
    pub fn bit_eq(&self, other: &EvalReport) -> bool {
        self.avg_rank.to_bits() == other.avg_rank.to_bits()
            && self.hit_at_10.to_bits() == other.hit_at_10.to_bits()
            && self.hit_at_1.to_bits() == other.hit_at_1.to_bits()
            && self.ranks == other.ranks
    }

    /// Results table with one row per approach.
    pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
        let mut out = String::new();
        let rule = format!("+{:-<14}+{:-<12}+{:-<10}+{:-<10}+", "", "", "", "");
        let _ = writeln!(out, "{rule}");
        let _ = writeln!(
            out,
            "| {:<12} | {:>10} | {:>8} | {:>8} |",
            "APPROACH", "AVG RANK", "HIT@10", "HIT@1"
        );
        let _ = writeln!(out, "{rule}");
        for (name, r) in rows {
            let _ = writeln!(
                out,
                "| {:<12} | {:>10.1} | {:>7.1}% | {:>7.1}% |",
                name,
                r.avg_rank,
                100.0 * r.hit_at_10,
                100.0 * r.hit_at_1
            );
        }
        let _ = writeln!(out, "{rule}");
        out
    }

    /// `key=value` lines; reals use shortest round-trip formatting.
    pub fn key_values(&self, approach: &str) -> String {
        format!(
            "approach={approach}\nexamples={}\navg_rank={}\nhit_at_10={}\nhit_at_1={}\n",
            self.ranks.len(),
            self.avg_rank,
            self.hit_at_10,
            self.hit_at_1
        )
    }

    /// `index<TAB>rank` per evaluated belief.
    pub fn ranks_tsv(&self) -> String {
        let mut out = String::from("index\trank\n");
        for (i, r) in &self.ranks {
            let _ = writeln!(out, "{i}\t{r}");
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "avg_rank={} hit@10={} hit@1={} n={}",
            self.avg_rank,
            self.hit_at_10,
            self.hit_at_1,
            self.ranks.len()
        )
    }
}

fn validate_split(table: &EmbeddingTable, split: &[Belief]) -> Result<()> {
    if split.is_empty() {
        return Err(Error::EmptySplit);
    }
    split.iter().try_for_each(|b| check_belief(table, b))
}

fn rank_serial(table: &EmbeddingTable, split: &[Belief], variant: Variant) -> Vec<usize> {
    let mut scores = vec![0.0; table.num_relations()];
    let mut m = vec![0.0; table.dim()];
    split
        .iter()
        .map(|b| {
            scores_into(table, b.head, b.tail, &b.mention, variant, &mut m, &mut scores);
            rank_from_scores(&scores, b.relation)
        })
        .collect()
}

/// Evaluates on one thread.
pub fn evaluate_serial(table: &EmbeddingTable, split: &[Belief], variant: Variant) -> Result<EvalReport> {
    validate_split(table, split)?;
    EvalReport::from_ranks(&rank_serial(table, split, variant))
}

/// Evaluates a split, in parallel across beliefs when the `parallel` feature
/// is on. The report is identical to [`evaluate_serial`].
pub fn evaluate(table: &EmbeddingTable, split: &[Belief], variant: Variant) -> Result<EvalReport> {
    validate_split(table, split)?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let ranks: Vec<usize> = split
            .par_chunks(256)
            .flat_map_iter(|chunk| rank_serial(table, chunk, variant))
            .collect();
        EvalReport::from_ranks(&ranks)
    }
    #[cfg(not(feature = "parallel"))]
    {
        EvalReport::from_ranks(&rank_serial(table, split, variant))
    }
}
