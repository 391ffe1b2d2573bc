//! Builtin functions and the registry scripts resolve calls against.
//!
//! A registry is assembled once per task environment and is immutable
//! afterwards; it is shared by reference across any number of concurrent
//! executions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::figure::{Curve, Figures};
use crate::interp::ExecLimits;
use crate::value::{Value, Workspace};
use crate::{is_identifier, is_reserved};

/// Accepted argument counts and the most outputs a builtin can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arity {
    pub min_args: usize,
    pub max_args: Option<usize>,
    pub max_outputs: usize,
}

impl Arity {
    pub const fn exact(n: usize) -> Self {
        Self {
            min_args: n,
            max_args: Some(n),
            max_outputs: 1,
        }
    }

    pub const fn range(min: usize, max: usize) -> Self {
        Self {
            min_args: min,
            max_args: Some(max),
            max_outputs: 1,
        }
    }

    pub const fn variadic(min: usize) -> Self {
        Self {
            min_args: min,
            max_args: None,
            max_outputs: 1,
        }
    }

    pub const fn outputs(mut self, n: usize) -> Self {
        self.max_outputs = n;
        self
    }

    pub fn accepts(&self, n: usize) -> bool {
        n >= self.min_args && self.max_args.is_none_or(|m| n <= m)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuiltinError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Resource(String),
}

impl BuiltinError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        BuiltinError::Invalid(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("builtin '{0}' is already registered")]
    Duplicate(String),
    #[error("'{0}' is not a valid builtin name")]
    InvalidName(String),
}

/// What a builtin may touch while it runs: its arguments, the hidden part
/// of the workspace, the figure list, printed output and the RNG stream.
pub struct CallContext<'a> {
    pub(crate) ws: &'a mut Workspace,
    pub(crate) figures: &'a mut Figures,
    pub(crate) printed: &'a mut String,
    pub(crate) rng: &'a mut ChaCha8Rng,
    pub(crate) limits: &'a ExecLimits,
    pub nargout: usize,
}

impl<'a> CallContext<'a> {
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }

    pub fn print(&mut self, text: &str) -> Result<(), BuiltinError> {
        if self.printed.len() + text.len() > crate::interp::MAX_PRINTED_BYTES {
            return Err(BuiltinError::Resource("printed output limit exceeded".into()));
        }
        self.printed.push_str(text);
        Ok(())
    }

    pub fn limits(&self) -> &ExecLimits {
        self.limits
    }

    pub fn check_len(&self, n: usize) -> Result<(), BuiltinError> {
        if n > self.limits.max_vector_len {
            Err(BuiltinError::Resource(format!(
                "vector length {n} exceeds the limit of {}",
                self.limits.max_vector_len
            )))
        } else {
            Ok(())
        }
    }

    /// Opens a new figure, enforcing the figure cap.
    pub fn new_figure(&mut self) -> Result<usize, BuiltinError> {
        self.ensure_figure_room()?;
        Ok(self.figures.open_new())
    }

    pub fn select_figure(&mut self, index: usize) -> Result<(), BuiltinError> {
        if !self.figures.as_slice().iter().any(|f| f.index == index) {
            self.ensure_figure_room()?;
        }
        self.figures.select(index);
        Ok(())
    }

    fn ensure_figure_room(&self) -> Result<(), BuiltinError> {
        if self.figures.len() >= self.limits.max_figures {
            Err(BuiltinError::Resource(format!(
                "figure limit of {} exceeded",
                self.limits.max_figures
            )))
        } else {
            Ok(())
        }
    }

    /// Appends a curve to the current figure, opening one if needed.
    pub fn add_curve(&mut self, curve: Curve) -> Result<(), BuiltinError> {
        if !self.figures.has_current() {
            self.new_figure()?;
        }
        self.figures.current_mut().curves.push(curve);
        Ok(())
    }

    pub fn figures_mut(&mut self) -> Result<&mut crate::figure::FigureData, BuiltinError> {
        if !self.figures.has_current() {
            self.new_figure()?;
        }
        Ok(self.figures.current_mut())
    }

    pub fn hidden(&self, name: &str) -> Option<&Value> {
        if is_reserved(name) {
            self.ws.get(name)
        } else {
            None
        }
    }

    pub fn set_hidden(&mut self, name: &str, value: Value) -> Result<(), BuiltinError> {
        if !is_reserved(name) {
            return Err(BuiltinError::invalid(format!(
                "builtins may only write reserved names, not '{name}'"
            )));
        }
        if !value.within_depth_limit() {
            return Err(BuiltinError::Resource("list nesting too deep".into()));
        }
        self.ws.set(name, value);
        Ok(())
    }
}

pub trait Builtin: Send + Sync {
    fn name(&self) -> &str;
    fn arity(&self) -> Arity;
    fn call(&self, ctx: &mut CallContext<'_>, args: &[Value]) -> Result<Vec<Value>, BuiltinError>;
}

type BuiltinFn = dyn Fn(&mut CallContext<'_>, &[Value]) -> Result<Vec<Value>, BuiltinError> + Send + Sync;

/// A builtin backed by a closure.
pub struct FnBuiltin {
    name: String,
    arity: Arity,
    f: Box<BuiltinFn>,
}

impl FnBuiltin {
    pub fn new<F>(name: impl Into<String>, arity: Arity, f: F) -> Self
    where
        F: Fn(&mut CallContext<'_>, &[Value]) -> Result<Vec<Value>, BuiltinError> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            arity,
            f: Box::new(f),
        }
    }
}

impl Builtin for FnBuiltin {
    fn name(&self) -> &str {
        &self.name
    }

    fn arity(&self) -> Arity {
        self.arity
    }

    fn call(&self, ctx: &mut CallContext<'_>, args: &[Value]) -> Result<Vec<Value>, BuiltinError> {
        (self.f)(ctx, args)
    }
}

#[derive(Clone, Default)]
pub struct Registry {
    builtins: BTreeMap<String, Arc<dyn Builtin>>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("builtins", &self.builtins.keys())
            .finish()
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, builtin: impl Builtin + 'static) -> Result<(), RegistryError> {
        self.register_arc(Arc::new(builtin))
    }

    pub fn register_arc(&mut self, builtin: Arc<dyn Builtin>) -> Result<(), RegistryError> {
        let name = builtin.name().to_string();
        if !is_identifier(&name) || is_reserved(&name) {
            return Err(RegistryError::InvalidName(name));
        }
        if self.builtins.contains_key(&name) {
            return Err(RegistryError::Duplicate(name));
        }
        self.builtins.insert(name, builtin);
        Ok(())
    }

    pub fn register_fn<F>(&mut self, name: &str, arity: Arity, f: F) -> Result<(), RegistryError>
    where
        F: Fn(&mut CallContext<'_>, &[Value]) -> Result<Vec<Value>, BuiltinError> + Send + Sync + 'static,
    {
        self.register(FnBuiltin::new(name, arity, f))
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn Builtin>> {
        self.builtins.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.builtins.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builtins.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.builtins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.builtins.is_empty()
    }

    /// Copies every builtin of `other` that is not already present.
    pub fn merge(&mut self, other: &Registry) {
        for (name, b) in &other.builtins {
            self.builtins.entry(name.clone()).or_insert_with(|| Arc::clone(b));
        }
    }

    /// A registry restricted to `names`; unknown names are ignored.
    pub fn subset<'n>(&self, names: impl IntoIterator<Item = &'n str>) -> Registry {
        let mut out = Registry::new();
        for name in names {
            if let Some(b) = self.builtins.get(name) {
                out.builtins.insert(name.to_string(), Arc::clone(b));
            }
        }
        out
    }
}

/// Positional argument access with uniform error messages.
pub struct Args<'a> {
    fname: &'a str,
    values: &'a [Value],
}

impl<'a> Args<'a> {
    pub fn new(fname: &'a str, values: &'a [Value]) -> Self {
        Self { fname, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&'a Value> {
        self.values.get(i)
    }

    fn err(&self, i: usize, what: &str) -> BuiltinError {
        BuiltinError::invalid(format!("{}: argument {} must be {what}", self.fname, i + 1))
    }

    fn value(&self, i: usize) -> Result<&'a Value, BuiltinError> {
        self.values
            .get(i)
            .ok_or_else(|| BuiltinError::invalid(format!("{}: missing argument {}", self.fname, i + 1)))
    }

    pub fn vector(&self, i: usize) -> Result<Vec<f64>, BuiltinError> {
        let v = self.value(i)?;
        if matches!(v, Value::Str(_)) {
            return Err(self.err(i, "numeric"));
        }
        v.to_numbers().ok_or_else(|| self.err(i, "numeric"))
    }

    pub fn bits(&self, i: usize) -> Result<Vec<f64>, BuiltinError> {
        let v = self.vector(i)?;
        if v.iter().all(|&b| b == 0.0 || b == 1.0) {
            Ok(v)
        } else {
            Err(self.err(i, "a bit sequence of 0s and 1s"))
        }
    }

    pub fn scalar(&self, i: usize) -> Result<f64, BuiltinError> {
        let v = self.value(i)?;
        v.as_scalar()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.err(i, "a finite scalar"))
    }

    pub fn opt_scalar(&self, i: usize, default: f64) -> Result<f64, BuiltinError> {
        if i < self.values.len() {
            self.scalar(i)
        } else {
            Ok(default)
        }
    }

    /// Nonnegative integer argument.
    pub fn count(&self, i: usize) -> Result<usize, BuiltinError> {
        let x = self.scalar(i)?;
        if x >= 0.0 && x.fract() == 0.0 && x <= usize::MAX as f64 {
            Ok(x as usize)
        } else {
            Err(self.err(i, "a nonnegative integer"))
        }
    }

    pub fn opt_count(&self, i: usize, default: usize) -> Result<usize, BuiltinError> {
        if i < self.values.len() {
            self.count(i)
        } else {
            Ok(default)
        }
    }

    pub fn string(&self, i: usize) -> Result<&'a str, BuiltinError> {
        self.value(i)?.as_str().ok_or_else(|| self.err(i, "a string"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noop(_: &mut CallContext<'_>, _: &[Value]) -> Result<Vec<Value>, BuiltinError> {
        Ok(vec![])
    }

    #[test]
    fn duplicate_registration_is_rejected() {
        let mut reg = Registry::new();
        reg.register_fn("plot", Arity::variadic(1), noop).unwrap();
        assert_eq!(
            reg.register_fn("plot", Arity::variadic(1), noop),
            Err(RegistryError::Duplicate("plot".into()))
        );
    }

    #[test]
    fn invalid_and_reserved_names_are_rejected() {
        let mut reg = Registry::new();
        assert!(matches!(
            reg.register_fn("__hidden", Arity::exact(0), noop),
            Err(RegistryError::InvalidName(_))
        ));
        assert!(matches!(
            reg.register_fn("2x", Arity::exact(0), noop),
            Err(RegistryError::InvalidName(_))
        ));
        assert!(matches!(
            reg.register_fn("end", Arity::exact(0), noop),
            Err(RegistryError::InvalidName(_))
        ));
    }

    #[test]
    fn arity_bounds() {
        assert!(Arity::range(1, 2).accepts(2));
        assert!(!Arity::range(1, 2).accepts(3));
        assert!(Arity::variadic(1).accepts(10));
        assert!(!Arity::exact(1).accepts(0));
    }
}
