//! Dense id assignment for entities, relations and mention words.
//!
//! Each namespace hands out ids `0, 1, 2, ...` in registration order, so an
//! id doubles as the row index of the matching embedding table.

use std::collections::HashMap;
use std::fmt;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(index: usize) -> Self {
                $name(u32::try_from(index).expect("id space exceeds u32"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

dense_id!(
    /// Row of the entity table.
    EntityId
);
dense_id!(
    /// Row of the relation table; the relation namespace is the candidate set
    /// for negatives and for ranking.
    RelationId
);
dense_id!(
    /// Row of the word table.
    WordId
);

/// One bidirectional name <-> dense id map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, registering it if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id as usize;
        }
        let id = self.names.len();
        let id32 = u32::try_from(id).expect("id space exceeds u32");
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id32);
        id
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.ids.get(name).map(|&id| id as usize)
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Names in id order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Rebuilds a table from names listed in id order. Duplicate names are rejected.
    pub fn from_names<I, S>(names: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = SymbolTable::new();
        for name in names {
            let name = name.into();
            if table.ids.contains_key(&name) {
                return Err(format!("duplicate symbol '{name}'"));
            }
            table.intern(&name);
        }
        Ok(table)
    }
}

/// Entity, relation and word namespaces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub entities: SymbolTable,
    pub relations: SymbolTable,
    pub words: SymbolTable,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern_entity(&mut self, name: &str) -> EntityId {
        EntityId::from_index(self.entities.intern(name))
    }

    pub fn intern_relation(&mut self, name: &str) -> RelationId {
        RelationId::from_index(self.relations.intern(name))
    }

    pub fn intern_word(&mut self, name: &str) -> WordId {
        WordId::from_index(self.words.intern(name))
    }

    pub fn entity(&self, name: &str) -> Option<EntityId> {
        self.entities.get(name).map(EntityId::from_index)
    }

    pub fn relation(&self, name: &str) -> Option<RelationId> {
        self.relations.get(name).map(RelationId::from_index)
    }

    pub fn word(&self, name: &str) -> Option<WordId> {
        self.words.get(name).map(WordId::from_index)
    }

    pub fn entity_name(&self, id: EntityId) -> Option<&str> {
        self.entities.name(id.index())
    }

    pub fn relation_name(&self, id: RelationId) -> Option<&str> {
        self.relations.name(id.index())
    }

    pub fn word_name(&self, id: WordId) -> Option<&str> {
        self.words.name(id.index())
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    /// All relation ids in ascending order.
    pub fn relation_ids(&self) -> impl Iterator<Item = RelationId> + '_ {
        (0..self.relations.len()).map(RelationId::from_index)
    }
}
