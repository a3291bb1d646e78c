use rand::Rng;

use crate::config::NegativeMode;
use crate::error::{Error, Result};
use crate::vocab::RelationId;

/// Corrupt relations for a belief whose true relation is `relation`.
///
/// `EnumerateAll` yields every other relation in ascending id order and never
/// touches `rng`. `Sample(k)` draws `min(k, |R| - 1)` distinct wrong relations.
pub fn negatives_for<R: Rng + ?Sized>(
    relation: RelationId,
    num_relations: usize,
    mode: NegativeMode,
    rng: &mut R,
) -> Result<Vec<RelationId>> {
    let mut out = Vec::new();
    negatives_into(relation, num_relations, mode, rng, &mut out)?;
    Ok(out)
}

pub(crate) fn negatives_into<R: Rng + ?Sized>(
    relation: RelationId,
    num_relations: usize,
    mode: NegativeMode,
    rng: &mut R,
    out: &mut Vec<RelationId>,
) -> Result<()> {
    if num_relations < 2 {
        return Err(Error::Config(format!(
            "relation corruption needs at least 2 relations, vocabulary has {num_relations}"
        )));
    }
    if relation.index() >= num_relations {
        return Err(Error::Lookup {
            namespace: "relation",
            id: relation.index(),
            len: num_relations,
        });
    }
    out.clear();
    let skip = relation.index();
    match mode {
        NegativeMode::EnumerateAll => {
            out.extend((0..num_relations).filter(|&i| i != skip).map(RelationId::from_index));
        }
        NegativeMode::Sample(k) => {
            let pool = num_relations - 1;
            let k = k.min(pool);
            // Sample positions in R \ {r}, then shift past the true relation.
            for i in rand::seq::index::sample(rng, pool, k).iter() {
                let id = if i >= skip { i + 1 } else { i };
                out.push(RelationId::from_index(id));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn ids(v: &[RelationId]) -> Vec<u32> {
        v.iter().map(|r| r.0).collect()
    }

    #[test]
    fn enumerate_all_is_set_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = negatives_for(RelationId(1), 3, NegativeMode::EnumerateAll, &mut rng).unwrap();
        assert_eq!(ids(&n), [0, 2]);
        let n = negatives_for(RelationId(7), 233, NegativeMode::EnumerateAll, &mut rng).unwrap();
        assert_eq!(n.len(), 232);
        assert!(!n.contains(&RelationId(7)));
        assert!(n.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn forced_single_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = negatives_for(RelationId(0), 2, NegativeMode::Sample(1), &mut rng).unwrap();
        assert_eq!(ids(&n), [1]);
    }

    #[test]
    fn sample_is_distinct_and_excludes_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for r in 0..10 {
            let n = negatives_for(RelationId(r), 10, NegativeMode::Sample(4), &mut rng).unwrap();
            assert_eq!(n.len(), 4);
            let set: HashSet<_> = n.iter().collect();
            assert_eq!(set.len(), 4);
            assert!(!n.contains(&RelationId(r)));
            assert!(n.iter().all(|x| x.0 < 10));
        }
        // k larger than the pool degrades to the whole pool
        let n = negatives_for(RelationId(2), 4, NegativeMode::Sample(10), &mut rng).unwrap();
        let mut got = ids(&n);
        got.sort();
        assert_eq!(got, [0, 1, 3]);
    }

    #[test]
    fn sample_depends_only_on_rng_state() {
        let a = negatives_for(
            RelationId(5),
            50,
            NegativeMode::Sample(6),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        let b = negatives_for(
            RelationId(5),
            50,
            NegativeMode::Sample(6),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            negatives_for(RelationId(0), 1, NegativeMode::EnumerateAll, &mut rng),
            Err(Error::Config(_))
        ));
        assert!(negatives_for(RelationId(4), 3, NegativeMode::EnumerateAll, &mut rng).is_err());
    }
}
