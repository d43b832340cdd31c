//! Name-keyed registries for interchangeable strategies.
//!
//! Linear solvers, step formulations and problem definitions are each
//! registered under a short name so that the CLI and config files can pick
//! one at runtime.

use std::fmt;

/// A single named entry.
pub struct Entry<F> {
    pub name: &'static str,
    pub summary: &'static str,
    pub factory: F,
}

/// Ordered collection of named factories. Lookup is by exact name.
pub struct Registry<F> {
    kind: &'static str,
    entries: Vec<Entry<F>>,
}

impl<F> Registry<F> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds a factory. A later registration under an existing name replaces
    /// the earlier one.
    pub fn register(&mut self, name: &'static str, summary: &'static str, factory: F) -> &mut Self {
        if let Some(slot) = self.entries.iter_mut().find(|e| e.name == name) {
            slot.summary = summary;
            slot.factory = factory;
        } else {
            self.entries.push(Entry {
                name,
                summary,
                factory,
            });
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&F> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| &e.factory)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry<F>> {
        self.entries.iter()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}

impl<F> fmt::Debug for Registry<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.names())
            .finish()
    }
}
