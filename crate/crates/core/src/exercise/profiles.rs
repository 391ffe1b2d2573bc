//! Named builtin registries. A task picks one as its execution environment.

use std::sync::Arc;

use indexmap::IndexMap;
use scriptlang::{stdlib, Registry};

use crate::commsim;

/// `stdlib` holds only the language builtins; `comm` adds the simulation
/// library.
pub fn standard() -> IndexMap<String, Arc<Registry>> {
    let mut out = IndexMap::new();
    out.insert("stdlib".to_string(), Arc::new(stdlib::registry()));
    out.insert("comm".to_string(), Arc::new(commsim::builtins::full_registry()));
    out
}
