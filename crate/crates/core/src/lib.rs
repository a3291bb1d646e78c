//! Joint embeddings of knowledge-graph triples and textual relation mentions.
//!
//! Three models share one set of entity, relation and word vectors:
//!
//! * **KRE** scores a triple by the translation distance `||h + r - t||^2`.
//! * **TME** scores a relation against a mention by `-r . m`, where `m` is the
//!   sum of the mention's word vectors.
//! * **JRME** adds the two, and is trained under a single margin ranking loss.
//!
//! All three are trained by corrupting the relation of each belief and
//! evaluated by ranking every relation for held-out `(head, tail, mention)`
//! inputs.
//!
//! ```no_run
//! use jrme::{data, evaluation, training, ModelConfig, Variant, Vocabulary};
//! use std::path::Path;
//!
//! let mut vocab = Vocabulary::new();
//! let train = data::parse_belief_file(Path::new("train.tsv"), &mut vocab, data::ParseMode::BuildVocab)?;
//! let test = data::parse_belief_file(Path::new("test.tsv"), &mut vocab, data::ParseMode::FrozenVocab)?;
//! let dataset = data::Dataset { train: train.beliefs, valid: vec![], test: test.beliefs };
//! let (table, _) = training::train(&dataset, &vocab, &ModelConfig::default(), Variant::Jrme)?;
//! let report = evaluation::evaluate(&table, &dataset.test, Variant::Jrme)?;
//! println!("{report}");
//! # Ok::<(), jrme::Error>(())
//! ```

pub mod config;
pub mod data;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod persist;
pub mod scoring;
pub mod synthetic;
pub mod training;
pub mod vocab;

pub use config::{ModelConfig, NegativeMode, Variant};
pub use data::{Belief, Dataset};
pub use embedding::{init_embeddings, EmbeddingTable, Slot};
pub use error::{Error, Result};
pub use evaluation::EvalReport;
pub use vocab::{EntityId, RelationId, Vocabulary, WordId};
