use rand::Rng;

use super::negatives::negatives_into;
use super::objective::{evaluate_example, ParamStore, Scratch};
use crate::config::{ModelConfig, Variant};
use crate::data::Belief;
use crate::embedding::{normalize, EmbeddingTable, Slot};
use crate::error::{Error, Result};
use crate::scoring::check_belief;
use crate::vocab::RelationId;

/// Result of one SGD step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Example loss before the update.
    pub loss: f64,
    /// Number of hinge terms with positive value.
    pub active: usize,
}

/// Applies `-lr * grad` for the example already evaluated into `scratch`, then
/// renormalizes the touched entities if requested.
pub(crate) fn apply_update<P: ParamStore + ?Sized>(
    params: &mut P,
    belief: &Belief,
    variant: Variant,
    config: &ModelConfig,
    scratch: &Scratch,
) -> Result<()> {
    let lr = config.learning_rate;
    let mut bad: Option<Slot> = None;
    for (slot, g) in scratch.grad.iter() {
        params.update(slot, |row| {
            for (x, gi) in row.iter_mut().zip(g) {
                *x -= lr * gi;
            }
            if bad.is_none() && !row.iter().all(|x| x.is_finite()) {
                bad = Some(slot);
            }
        });
    }
    if config.normalize_entities && variant.uses_triple() {
        params.update(Slot::Entity(belief.head), normalize);
        if belief.tail != belief.head {
            params.update(Slot::Entity(belief.tail), normalize);
        }
    }
    match bad {
        None => Ok(()),
        Some(slot) => Err(Error::NonFinite {
            example: None,
            detail: format!("{slot:?} left non-finite (learning rate {lr:e})"),
        }),
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn step_with<P: ParamStore + ?Sized, R: Rng + ?Sized>(
    params: &mut P,
    num_relations: usize,
    belief: &Belief,
    variant: Variant,
    config: &ModelConfig,
    rng: &mut R,
    negatives: &mut Vec<RelationId>,
    scratch: &mut Scratch,
) -> Result<StepOutcome> {
    negatives_into(belief.relation, num_relations, config.neg_mode, rng, negatives)?;
    let margin = variant.margin(config);
    let loss = evaluate_example(&*params, belief, negatives, variant, margin, scratch, true);
    let active = scratch.active.len();
    if active > 0 {
        apply_update(params, belief, variant, config, scratch)?;
    }
    Ok(StepOutcome { loss, active })
}

/// One stochastic subgradient step on a single belief.
///
/// Negatives come from `config.neg_mode`; all active terms are accumulated into
/// one gradient before the update. With no active term the table is untouched.
pub fn sgd_step<R: Rng + ?Sized>(
    table: &mut EmbeddingTable,
    belief: &Belief,
    variant: Variant,
    config: &ModelConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    check_belief(table, belief)?;
    let mut scratch = Scratch::new(table.dim());
    let mut negatives = Vec::new();
    let nr = table.num_relations();
    step_with(table, nr, belief, variant, config, rng, &mut negatives, &mut scratch)
}
