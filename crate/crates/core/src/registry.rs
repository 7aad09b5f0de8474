//! Name-keyed registries of interchangeable strategies.
//!
//! Orderings and gradient engines are looked up by the names used in
//! configuration files and on the command line.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Anything that can live in a [`Registry`].
pub trait Named {
    fn name(&self) -> &'static str;
}

pub struct Registry<T: ?Sized + Named> {
    what: &'static str,
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(what: &'static str) -> Self {
        Self { what, entries: BTreeMap::new() }
    }

    /// Registers a strategy under its own name, replacing any previous entry.
    pub fn register(&mut self, item: Box<T>) -> &mut Self {
        self.entries.insert(item.name(), item);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        let key = name.to_ascii_lowercase();
        self.entries.get(key.as_str()).map(|b| b.as_ref()).ok_or_else(|| {
            Error::Argument(format!(
                "unknown {} '{}' (available: {})",
                self.what,
                name,
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.values().map(|b| b.as_ref())
    }
}

impl<T: ?Sized + Named> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry").field("what", &self.what).field("entries", &self.names()).finish()
    }
}
