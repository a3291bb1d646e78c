//! Per-example margin ranking losses and their subgradients.
//!
//! Every variant shares one hinge term per corrupt relation `r'`:
//!
//! ```text
//! KRE   [a + Dr(h,r,t) - Dr(h,r',t)]+
//! TME   [b + Dm(r,m)   - Dm(r',m)]+
//! JRME  [g + Dr(h,r,t) - Dr(h,r',t) + Dm(r,m) - Dm(r',m)]+
//! ```
//!
//! A term that evaluates to exactly zero counts as inactive and contributes no
//! gradient. Term values are summed with an exactly rounded accumulator so the
//! loss does not depend on the order of the negatives.

use crate::config::Variant;
use crate::data::Belief;
use crate::embedding::{EmbeddingTable, Slot};
use crate::error::{Error, Result};
use crate::scoring::{check_belief, dot, hinge, translation_distance};
use crate::vocab::RelationId;

/// Read/update access to parameter rows. Implemented by the plain table and by
/// the shared table used for lock-free training.
pub trait ParamStore {
    fn dim(&self) -> usize;

    /// Copies the row for `slot` into `out`.
    fn read(&self, slot: Slot, out: &mut [f64]);

    /// Applies `f` to the row for `slot`.
    fn update<F: FnOnce(&mut [f64])>(&mut self, slot: Slot, f: F);
}

impl ParamStore for EmbeddingTable {
    fn dim(&self) -> usize {
        EmbeddingTable::dim(self)
    }

    #[inline]
    fn read(&self, slot: Slot, out: &mut [f64]) {
        out.copy_from_slice(self.row(slot));
    }

    #[inline]
    fn update<F: FnOnce(&mut [f64])>(&mut self, slot: Slot, f: F) {
        f(self.row_mut(slot))
    }
}

/// Exactly rounded floating-point sum (Shewchuk's partials, as in Python's `math.fsum`).
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Folds another accumulator in without losing exactness.
    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Round half to even across the remaining partials.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Loss of one belief against its negatives, with the relations whose hinge
/// term is strictly positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExampleLoss {
    pub loss: f64,
    pub active: Vec<RelationId>,
}

/// Sparse gradient over the rows touched by active terms. Each slot appears once.
#[derive(Debug, Clone, Default)]
pub struct Gradient {
    dim: usize,
    slots: Vec<Slot>,
    values: Vec<f64>,
}

impl Gradient {
    pub fn new(dim: usize) -> Self {
        Gradient {
            dim,
            slots: Vec::new(),
            values: Vec::new(),
        }
    }

    fn clear(&mut self, dim: usize) {
        self.dim = dim;
        self.slots.clear();
        self.values.clear();
    }

    fn push(&mut self, slot: Slot, v: &[f64]) {
        self.slots.push(slot);
        self.values.extend_from_slice(v);
    }

    fn add_to(&mut self, slot: Slot, v: &[f64], search_from: usize) {
        let d = self.dim;
        if let Some(pos) = self.slots[search_from..].iter().position(|&s| s == slot) {
            let i = search_from + pos;
            for (g, x) in self.values[i * d..(i + 1) * d].iter_mut().zip(v) {
                *g += x;
            }
        } else {
            self.push(slot, v);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn get(&self, slot: Slot) -> Option<&[f64]> {
        let d = self.dim;
        self.slots
            .iter()
            .position(|&s| s == slot)
            .map(|i| &self.values[i * d..(i + 1) * d])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Slot, &[f64])> + '_ {
        self.slots
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.dim.max(1)))
    }
}

/// Reusable buffers for one worker.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    h: Vec<f64>,
    t: Vec<f64>,
    r: Vec<f64>,
    m: Vec<f64>,
    word: Vec<f64>,
    neg: Vec<f64>,
    pos_err: Vec<f64>,
    g_head: Vec<f64>,
    g_tail: Vec<f64>,
    g_rel: Vec<f64>,
    g_word: Vec<f64>,
    g_neg: Vec<f64>,
    pub(crate) grad: Gradient,
    pub(crate) active: Vec<RelationId>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        let z = || vec![0.0; dim];
        Scratch {
            h: z(),
            t: z(),
            r: z(),
            m: z(),
            word: z(),
            neg: z(),
            pos_err: z(),
            g_head: z(),
            g_tail: z(),
            g_rel: z(),
            g_word: z(),
            g_neg: z(),
            grad: Gradient::new(dim),
            active: Vec::new(),
        }
    }

    fn ensure(&mut self, dim: usize) {
        if self.h.len() != dim {
            *self = Scratch::new(dim);
        }
    }
}

/// Evaluates the example loss, leaving the active relations in
/// `scratch.active` and, when `with_grad`, the gradient in `scratch.grad`.
/// Ids must already be validated.
pub(crate) fn evaluate_example<P: ParamStore + ?Sized>(
    params: &P,
    belief: &Belief,
    negatives: &[RelationId],
    variant: Variant,
    margin: f64,
    scratch: &mut Scratch,
    with_grad: bool,
) -> f64 {
    let d = params.dim();
    scratch.ensure(d);
    let s = scratch;
    s.active.clear();
    s.grad.clear(d);

    let triple = variant.uses_triple();
    let mention = variant.uses_mention();

    params.read(Slot::Relation(belief.relation), &mut s.r);
    let mut d_pos = 0.0;
    if triple {
        params.read(Slot::Entity(belief.head), &mut s.h);
        params.read(Slot::Entity(belief.tail), &mut s.t);
        d_pos = translation_distance(&s.h, &s.r, &s.t);
        for i in 0..d {
            s.pos_err[i] = s.h[i] + s.r[i] - s.t[i];
        }
    }
    let mut m_pos = 0.0;
    if mention {
        s.m.fill(0.0);
        for &w in &belief.mention {
            params.read(Slot::Word(w), &mut s.word);
            for (acc, x) in s.m.iter_mut().zip(&s.word) {
                *acc += x;
            }
        }
        m_pos = -dot(&s.r, &s.m);
    }

    if with_grad {
        s.g_head.fill(0.0);
        s.g_tail.fill(0.0);
        s.g_rel.fill(0.0);
        s.g_word.fill(0.0);
    }

    let mut total = ExactSum::new();
    for &neg in negatives {
        params.read(Slot::Relation(neg), &mut s.neg);
        let mut x = margin;
        if triple {
            let d_neg = translation_distance(&s.h, &s.neg, &s.t);
            x = (x + d_pos) - d_neg;
        }
        if mention {
            let m_neg = -dot(&s.neg, &s.m);
            x = (x + m_pos) - m_neg;
        }
        let term = hinge(x);
        if term <= 0.0 {
            continue;
        }
        total.add(term);
        s.active.push(neg);
        if !with_grad {
            continue;
        }
        s.g_neg.fill(0.0);
        if triple {
            for i in 0..d {
                let p = s.pos_err[i];
                let q = s.h[i] + s.neg[i] - s.t[i];
                s.g_head[i] += 2.0 * p - 2.0 * q;
                s.g_tail[i] += -2.0 * p + 2.0 * q;
                s.g_rel[i] += 2.0 * p;
                s.g_neg[i] -= 2.0 * q;
            }
        }
        if mention {
            for i in 0..d {
                s.g_rel[i] -= s.m[i];
                s.g_neg[i] += s.m[i];
                s.g_word[i] += s.neg[i] - s.r[i];
            }
        }
        s.grad.push(Slot::Relation(neg), &s.g_neg);
    }

    if with_grad && !s.active.is_empty() {
        s.grad.push(Slot::Relation(belief.relation), &s.g_rel);
        if triple {
            let fixed = s.grad.len();
            s.grad.push(Slot::Entity(belief.head), &s.g_head);
            s.grad.add_to(Slot::Entity(belief.tail), &s.g_tail, fixed);
        }
        if mention {
            let fixed = s.grad.len();
            for &w in &belief.mention {
                s.grad.add_to(Slot::Word(w), &s.g_word, fixed);
            }
        }
    }
    total.value()
}

fn check_inputs(table: &EmbeddingTable, belief: &Belief, negatives: &[RelationId]) -> Result<()> {
    check_belief(table, belief)?;
    if let Some(&r) = negatives.iter().find(|r| r.index() >= table.num_relations()) {
        return Err(Error::Lookup {
            namespace: "relation",
            id: r.index(),
            len: table.num_relations(),
        });
    }
    Ok(())
}

/// Loss of `belief` under `variant` with the given margin.
pub fn example_loss(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    variant: Variant,
    margin: f64,
) -> Result<ExampleLoss> {
    check_inputs(table, belief, negatives)?;
    let mut scratch = Scratch::new(table.dim());
    let loss = evaluate_example(table, belief, negatives, variant, margin, &mut scratch, false);
    Ok(ExampleLoss {
        loss,
        active: scratch.active,
    })
}

/// Loss and its subgradient with respect to every row an active term touches.
pub fn example_gradient(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    variant: Variant,
    margin: f64,
) -> Result<(ExampleLoss, Gradient)> {
    check_inputs(table, belief, negatives)?;
    let mut scratch = Scratch::new(table.dim());
    let loss = evaluate_example(table, belief, negatives, variant, margin, &mut scratch, true);
    Ok((
        ExampleLoss {
            loss,
            active: scratch.active,
        },
        scratch.grad,
    ))
}

pub fn kre_example_loss(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    alpha: f64,
) -> Result<ExampleLoss> {
    example_loss(table, belief, negatives, Variant::Kre, alpha)
}

pub fn tme_example_loss(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    beta: f64,
) -> Result<ExampleLoss> {
    example_loss(table, belief, negatives, Variant::Tme, beta)
}

pub fn jrme_example_loss(
    table: &EmbeddingTable,
    belief: &Belief,
    negatives: &[RelationId],
    gamma: f64,
) -> Result<ExampleLoss> {
    example_loss(table, belief, negatives, Variant::Jrme, gamma)
}
