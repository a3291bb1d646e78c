//! Single-file model format.
//!
//! Layout, all integers and reals little-endian:
//!
//! ```text
//! magic     b"JRME1"
//! config    dim:u64 alpha:f64 beta:f64 gamma:f64 lr:f64 epochs:u64
//!           neg_tag:u8 neg_k:u64 seed:u64 normalize:u8
//! vocab     3 x (count:u64, count x (len:u64, utf8 bytes))   entities, relations, words
//! tables    entity rows, relation rows, word rows as f64, row-major
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{ModelConfig, NegativeMode};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::vocab::{SymbolTable, Vocabulary};

pub const MAGIC: &[u8; 5] = b"JRME1";

fn encode(table: &EmbeddingTable, vocab: &Vocabulary, config: &ModelConfig) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        64 + 8 * (table.entity_data().len() + table.relation_data().len() + table.word_data().len()),
    );
    out.extend_from_slice(MAGIC);

    let u64le = |out: &mut Vec<u8>, v: u64| out.extend_from_slice(&v.to_le_bytes());
    let f64le = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_le_bytes());

    u64le(&mut out, config.dim as u64);
    f64le(&mut out, config.alpha);
    f64le(&mut out, config.beta);
    f64le(&mut out, config.gamma);
    f64le(&mut out, config.learning_rate);
    u64le(&mut out, config.epochs as u64);
    let (tag, k) = match config.neg_mode {
        NegativeMode::EnumerateAll => (0u8, 0u64),
        NegativeMode::Sample(k) => (1u8, k as u64),
    };
    out.push(tag);
    u64le(&mut out, k);
    u64le(&mut out, config.seed);
    out.push(config.normalize_entities as u8);

    for names in [&vocab.entities, &vocab.relations, &vocab.words] {
        u64le(&mut out, names.len() as u64);
        for name in names.names() {
            u64le(&mut out, name.len() as u64);
            out.extend_from_slice(name.as_bytes());
        }
    }

    for v in table
        .entity_data()
        .iter()
        .chain(table.relation_data())
        .chain(table.word_data())
    {
        f64le(&mut out, *v);
    }
    out
}

/// Writes the model to `path` through a temporary sibling file, so a failed
/// write never leaves a truncated model behind.
pub fn save_model(table: &EmbeddingTable, vocab: &Vocabulary, config: &ModelConfig, path: &Path) -> Result<()> {
    if !table.matches_vocab(vocab) {
        return Err(Error::Config(format!(
            "table shape ({}, {}, {}) does not match vocabulary ({}, {}, {})",
            table.num_entities(),
            table.num_relations(),
            table.num_words(),
            vocab.num_entities(),
            vocab.num_relations(),
            vocab.num_words()
        )));
    }
    if table.dim() != config.dim {
        return Err(Error::Config(format!(
            "table dim {} differs from config dim {}",
            table.dim(),
            config.dim
        )));
    }
    let bytes = encode(table, vocab, config);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(&bytes)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn fail(&self, section: &'static str, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            section,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize, section: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.fail(
                section,
                format!(
                    "truncated: need {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.buf.len()
                ),
            )),
        }
    }

    fn u8(&mut self, section: &'static str) -> Result<u8> {
        Ok(self.take(1, section)?[0])
    }

    fn u64(&mut self, section: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }

    fn usize(&mut self, section: &'static str) -> Result<usize> {
        let v = self.u64(section)?;
        usize::try_from(v).map_err(|_| self.fail(section, format!("count {v} does not fit in memory")))
    }

    fn f64(&mut self, section: &'static str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }

    fn symbols(&mut self, section: &'static str) -> Result<SymbolTable> {
        let count = self.usize(section)?;
        let mut names = Vec::with_capacity(count.min(self.buf.len()));
        for _ in 0..count {
            let len = self.usize(section)?;
            let bytes = self.take(len, section)?;
            let name = std::str::from_utf8(bytes).map_err(|e| self.fail(section, format!("invalid UTF-8: {e}")))?;
            names.push(name.to_owned());
        }
        SymbolTable::from_names(names).map_err(|m| self.fail(section, m))
    }

    fn reals(&mut self, count: usize, section: &'static str) -> Result<Vec<f64>> {
        let nbytes = count
            .checked_mul(8)
            .ok_or_else(|| self.fail(section, "table size overflows"))?;
        let bytes = self.take(nbytes, section)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn decode(bytes: &[u8], path: &Path) -> Result<(EmbeddingTable, Vocabulary, ModelConfig)> {
    let mut r = Reader {
        buf: bytes,
        pos: 0,
        path,
    };
    if r.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(r.fail("magic", "not a JRME1 model file"));
    }

    let dim = r.usize("config")?;
    let alpha = r.f64("config")?;
    let beta = r.f64("config")?;
    let gamma = r.f64("config")?;
    let learning_rate = r.f64("config")?;
    let epochs = r.usize("config")?;
    let tag = r.u8("config")?;
    let k = r.usize("config")?;
    let neg_mode = match tag {
        0 => NegativeMode::EnumerateAll,
        1 => NegativeMode::Sample(k),
        other => return Err(r.fail("config", format!("unknown negative-mode tag {other}"))),
    };
    let seed = r.u64("config")?;
    let normalize_entities = match r.u8("config")? {
        0 => false,
        1 => true,
        other => return Err(r.fail("config", format!("bad boolean byte {other}"))),
    };
    let config = ModelConfig {
        dim,
        alpha,
        beta,
        gamma,
        learning_rate,
        epochs,
        neg_mode,
        seed,
        normalize_entities,
    };
    config.validate().map_err(|e| r.fail("config", e.to_string()))?;

    let vocab = Vocabulary {
        entities: r.symbols("entity vocabulary")?,
        relations: r.symbols("relation vocabulary")?,
        words: r.symbols("word vocabulary")?,
    };

    let mut rows = |n: usize, section: &'static str| -> Result<Vec<f64>> {
        let count = n
            .checked_mul(dim)
            .ok_or_else(|| r.fail(section, "table size overflows"))?;
        r.reals(count, section)
    };
    let entities = rows(vocab.num_entities(), "entity table")?;
    let relations = rows(vocab.num_relations(), "relation table")?;
    let words = rows(vocab.num_words(), "word table")?;
    if r.pos != r.buf.len() {
        return Err(r.fail("trailer", format!("{} unexpected trailing bytes", r.buf.len() - r.pos)));
    }
    let table = EmbeddingTable::from_flat(dim, entities, relations, words)?;
    Ok((table, vocab, config))
}

pub fn load_model(path: &Path) -> Result<(EmbeddingTable, Vocabulary, ModelConfig)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
