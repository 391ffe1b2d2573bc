//! Tree-walking interpreter.
//!
//! Each [`Interpreter`] owns its workspace, figures, printed output and RNG
//! stream, so independent executions never share mutable state. Every
//! statement and every expression node evaluated costs one step; hitting
//! the step cap stops the run with a resource error, which bounds even
//! `while true` loops.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ast::{BinOp, Expr, ExprKind, Ident, Program, Stmt, StmtKind, UnOp};
use crate::error::{ErrorKind, Position, ScriptError};
use crate::figure::{FigureData, Figures};
use crate::registry::{BuiltinError, CallContext, Registry};
use crate::value::{Value, Workspace};
use crate::{is_reserved, parser};

pub const MAX_PRINTED_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecLimits {
    pub max_steps: u64,
    pub max_vector_len: usize,
    pub max_figures: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for ExecLimits {
    fn default() -> Self {
        Self {
            max_steps: 5_000_000,
            max_vector_len: 1_000_000,
            max_figures: 16,
            seed: None,
        }
    }
}

impl ExecLimits {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn is_valid(&self) -> bool {
        self.max_steps > 0 && self.max_vector_len > 0 && self.max_figures > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    Ok,
    ScriptError,
    ResourceExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecOutcome {
    pub status: ExecStatus,
    pub workspace: Workspace,
    pub figures: Vec<FigureData>,
    pub printed: String,
    pub error: Option<ScriptError>,
}

impl ExecOutcome {
    pub fn is_ok(&self) -> bool {
        self.status == ExecStatus::Ok
    }

    /// Outcome for source that never got past the parser.
    pub fn from_error(error: ScriptError) -> Self {
        let status = if error.is_resource() {
            ExecStatus::ResourceExceeded
        } else {
            ExecStatus::ScriptError
        };
        Self {
            status,
            workspace: Workspace::new(),
            figures: Vec::new(),
            printed: String::new(),
            error: Some(error),
        }
    }
}

/// Runs `program` in a fresh interpreter.
pub fn execute(program: &Program, registry: &Registry, limits: ExecLimits) -> ExecOutcome {
    let mut interp = Interpreter::new(registry, limits);
    let result = interp.run(program);
    interp.finish(result)
}

/// Parses and runs `source`; parse failures become script-error outcomes.
pub fn run_source(source: &str, registry: &Registry, limits: ExecLimits) -> ExecOutcome {
    match parser::parse_source(source) {
        Ok(program) => execute(&program, registry, limits),
        Err(e) => ExecOutcome::from_error(e),
    }
}

enum Flow {
    Normal,
    Break,
    Continue,
}

type Result<T> = std::result::Result<T, ScriptError>;

pub struct Interpreter<'r> {
    registry: &'r Registry,
    limits: ExecLimits,
    ws: Workspace,
    figures: Figures,
    printed: String,
    rng: ChaCha8Rng,
    steps: u64,
    end_stack: Vec<usize>,
}

impl<'r> Interpreter<'r> {
    pub fn new(registry: &'r Registry, limits: ExecLimits) -> Self {
        let seed = limits.seed.unwrap_or_else(rand::random);
        Self {
            registry,
            limits,
            ws: Workspace::new(),
            figures: Figures::default(),
            printed: String::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            end_stack: Vec::new(),
        }
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    /// Privileged write used by drivers; bypasses the reserved-name rule.
    pub fn set_var(&mut self, name: &str, value: Value) {
        self.ws.set(name, value);
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn print(&mut self, text: &str) {
        if self.printed.len() + text.len() <= MAX_PRINTED_BYTES {
            self.printed.push_str(text);
        }
    }

    /// Runs `program` on the current state. May be called repeatedly; the
    /// workspace, figures and step count carry over between calls.
    pub fn run(&mut self, program: &Program) -> Result<()> {
        match self.block(&program.stmts)? {
            Flow::Normal => Ok(()),
            // `break`/`continue` outside a loop end the script quietly.
            Flow::Break | Flow::Continue => Ok(()),
        }
    }

    pub fn finish(self, result: Result<()>) -> ExecOutcome {
        let (status, error) = match result {
            Ok(()) => (ExecStatus::Ok, None),
            Err(e) if e.is_resource() => (ExecStatus::ResourceExceeded, Some(e)),
            Err(e) => (ExecStatus::ScriptError, Some(e)),
        };
        ExecOutcome {
            status,
            workspace: self.ws,
            figures: self.figures.into_vec(),
            printed: self.printed,
            error,
        }
    }

    fn tick(&mut self, pos: Position) -> Result<()> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(ScriptError::at(
                ErrorKind::ResourceExceeded,
                format!("step limit of {} exceeded", self.limits.max_steps),
                pos,
            ));
        }
        Ok(())
    }

    fn check_value(&self, value: &Value, pos: Position) -> Result<()> {
        let len = match value {
            Value::Vector(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(ScriptError::at(
                        ErrorKind::Shape,
                        "operation produced a non-finite value (division by zero or overflow)",
                        pos,
                    ));
                }
                v.len()
            }
            Value::Num(x) if !x.is_finite() => {
                return Err(ScriptError::at(
                    ErrorKind::Shape,
                    "operation produced a non-finite value (division by zero or overflow)",
                    pos,
                ));
            }
            Value::Str(s) => s.len(),
            Value::List(l) => {
                if !value.within_depth_limit() {
                    return Err(ScriptError::at(
                        ErrorKind::ResourceExceeded,
                        format!("list nesting deeper than {}", crate::MAX_LIST_DEPTH),
                        pos,
                    ));
                }
                l.len()
            }
            _ => 1,
        };
        if len > self.limits.max_vector_len {
            return Err(ScriptError::at(
                ErrorKind::ResourceExceeded,
                format!(
                    "length {len} exceeds the vector length limit of {}",
                    self.limits.max_vector_len
                ),
                pos,
            ));
        }
        Ok(())
    }

    fn assign(&mut self, target: &Ident, value: Value) -> Result<()> {
        if is_reserved(&target.name) {
            return Err(ScriptError::at(
                ErrorKind::ReservedName,
                format!("names starting with '__' are reserved; cannot assign '{}'", target.name),
                target.pos,
            ));
        }
        self.ws.set(target.name.clone(), value);
        Ok(())
    }

    fn echo(&mut self, name: &str, value: &Value) {
        let text = match value {
            Value::Vector(_) | Value::List(_) | Value::Str(_) => format!("{name} = {}\n", value.summary(usize::MAX)),
            other => format!("{name} = {other}\n"),
        };
        self.print(&text);
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<Flow> {
        for stmt in stmts {
            match self.stmt(stmt)? {
                Flow::Normal => {}
                flow => return Ok(flow),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<Flow> {
        self.tick(stmt.pos)?;
        match &stmt.kind {
            StmtKind::Assign {
                target,
                indices,
                value,
                print,
            } => {
                if is_reserved(&target.name) {
                    // Reject before evaluating so the error points at the target.
                    return self.assign(target, Value::empty()).map(|_| Flow::Normal);
                }
                let rhs = self.eval(value)?;
                let new_value = match indices {
                    None => rhs,
                    Some(indices) => self.indexed_assign(target, indices, rhs)?,
                };
                self.check_value(&new_value, target.pos)?;
                self.assign(target, new_value.clone())?;
                if *print {
                    self.echo(&target.name, &new_value);
                }
            }
            StmtKind::MultiAssign { targets, value, print } => {
                if let Some(t) = targets.iter().find(|t| is_reserved(&t.name)) {
                    return self.assign(t, Value::empty()).map(|_| Flow::Normal);
                }
                let values = self.eval_multi(value, targets.len())?;
                if values.len() < targets.len() {
                    return Err(ScriptError::at(
                        ErrorKind::Type,
                        format!("expected {} outputs, got {}", targets.len(), values.len()),
                        value.pos,
                    ));
                }
                for (t, v) in targets.iter().zip(values) {
                    self.assign(t, v.clone())?;
                    if *print {
                        self.echo(&t.name, &v);
                    }
                }
            }
            StmtKind::Expr { expr, print } => {
                let values = match &expr.kind {
                    ExprKind::Ident(name) if self.ws.contains(name) => vec![self.eval(expr)?],
                    ExprKind::Ident(_) | ExprKind::Call { .. } => self.eval_multi(expr, 0)?,
                    _ => vec![self.eval(expr)?],
                };
                if let Some(v) = values.into_iter().next() {
                    if *print {
                        let label = match &expr.kind {
                            ExprKind::Ident(name) if self.ws.contains(name) => name.clone(),
                            _ => "ans".to_string(),
                        };
                        self.echo(&label, &v);
                    }
                    self.ws.set("ans", v);
                }
            }
            StmtKind::For { var, iter, body } => {
                if is_reserved(&var.name) {
                    return self.assign(var, Value::empty()).map(|_| Flow::Normal);
                }
                let items = self.eval(iter)?;
                let items: Vec<Value> = match items {
                    Value::Num(_) | Value::Bool(_) => vec![items],
                    Value::Vector(v) => v.into_iter().map(Value::Num).collect(),
                    Value::Str(s) => s.chars().map(|c| Value::Str(c.to_string())).collect(),
                    Value::List(l) => l,
                };
                for item in items {
                    self.tick(stmt.pos)?;
                    self.assign(var, item)?;
                    match self.block(body)? {
                        Flow::Break => break,
                        Flow::Normal | Flow::Continue => {}
                    }
                }
            }
            StmtKind::While { cond, body } => loop {
                self.tick(stmt.pos)?;
                if !self.condition(cond)? {
                    break;
                }
                match self.block(body)? {
                    Flow::Break => break,
                    Flow::Normal | Flow::Continue => {}
                }
            },
            StmtKind::If { branches, else_body } => {
                for (cond, body) in branches {
                    if self.condition(cond)? {
                        return self.block(body);
                    }
                }
                if let Some(body) = else_body {
                    return self.block(body);
                }
            }
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Continue => return Ok(Flow::Continue),
        }
        Ok(Flow::Normal)
    }

    fn condition(&mut self, cond: &Expr) -> Result<bool> {
        let v = self.eval(cond)?;
        v.truthy().ok_or_else(|| {
            ScriptError::at(
                ErrorKind::Type,
                format!("a {} cannot be used as a condition", v.type_name()),
                cond.pos,
            )
        })
    }

    /// Evaluates an expression that must produce exactly one value.
    pub fn eval(&mut self, expr: &Expr) -> Result<Value> {
        self.tick(expr.pos)?;
        let value = match &expr.kind {
            ExprKind::Number(n) => Value::Num(*n),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Ident(_) | ExprKind::Call { .. } => {
                let mut values = self.eval_multi(expr, 1)?;
                if values.is_empty() {
                    let name = match &expr.kind {
                        ExprKind::Ident(n) => n.as_str(),
                        ExprKind::Call { name, .. } => name.name.as_str(),
                        _ => unreachable!(),
                    };
                    return Err(ScriptError::at(
                        ErrorKind::Type,
                        format!("'{name}' does not return a value"),
                        expr.pos,
                    ));
                }
                values.swap_remove(0)
            }
            ExprKind::End => match self.end_stack.last() {
                Some(&n) => Value::Num(n as f64),
                None => {
                    return Err(ScriptError::at(
                        ErrorKind::Syntax,
                        "'end' can only be used inside an index expression",
                        expr.pos,
                    ))
                }
            },
            ExprKind::Range { start, step, end } => {
                let start_v = self.scalar_operand(start, "range start")?;
                let step_v = match step {
                    Some(s) => self.scalar_operand(s, "range step")?,
                    None => 1.0,
                };
                let end_v = self.scalar_operand(end, "range end")?;
                self.range(start_v, step_v, end_v, expr.pos)?
            }
            ExprKind::Concat(items) => {
                let mut values = Vec::with_capacity(items.len());
                for item in items {
                    values.push(self.eval(item)?);
                }
                concat(values).map_err(|m| ScriptError::at(ErrorKind::Shape, m, expr.pos))?
            }
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinOp::And | BinOp::Or => {
                    let l = self.condition(lhs)?;
                    let short = matches!((op, l), (BinOp::And, false) | (BinOp::Or, true));
                    if short {
                        Value::Bool(l)
                    } else {
                        Value::Bool(self.condition(rhs)?)
                    }
                }
                _ => {
                    let l = self.eval(lhs)?;
                    let r = self.eval(rhs)?;
                    binary(*op, &l, &r).map_err(|m| ScriptError::at(ErrorKind::Shape, m, expr.pos))?
                }
            },
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                let nums = numeric_operand(&v).map_err(|m| ScriptError::at(ErrorKind::Type, m, expr.pos))?;
                match op {
                    UnOp::Neg => Value::from_vec(nums.into_iter().map(|x| -x).collect()),
                    UnOp::Not => {
                        if nums.len() == 1 {
                            Value::Bool(nums[0] == 0.0)
                        } else {
                            Value::Vector(nums.into_iter().map(|x| f64::from(u8::from(x == 0.0))).collect())
                        }
                    }
                }
            }
        };
        self.check_value(&value, expr.pos)?;
        Ok(value)
    }

    fn scalar_operand(&mut self, expr: &Expr, what: &str) -> Result<f64> {
        let v = self.eval(expr)?;
        v.as_scalar().ok_or_else(|| {
            ScriptError::at(
                ErrorKind::Type,
                format!("{what} must be a scalar, got a {} of length {}", v.type_name(), v.len()),
                expr.pos,
            )
        })
    }

    fn range(&self, start: f64, step: f64, end: f64, pos: Position) -> Result<Value> {
        if step == 0.0 || (step > 0.0 && start > end) || (step < 0.0 && start < end) {
            return Ok(Value::empty());
        }
        let count = ((end - start) / step + 1e-10).floor() + 1.0;
        if count > self.limits.max_vector_len as f64 {
            return Err(ScriptError::at(
                ErrorKind::ResourceExceeded,
                format!(
                    "range of {count} elements exceeds the vector length limit of {}",
                    self.limits.max_vector_len
                ),
                pos,
            ));
        }
        let count = count as usize;
        Ok(Value::from_vec((0..count).map(|i| start + i as f64 * step).collect()))
    }

    /// Evaluates a name or call that may yield zero or several values.
    fn eval_multi(&mut self, expr: &Expr, nargout: usize) -> Result<Vec<Value>> {
        match &expr.kind {
            ExprKind::Ident(name) => {
                if let Some(v) = self.ws.get(name) {
                    return Ok(vec![v.clone()]);
                }
                if self.registry.contains(name) {
                    let ident = Ident {
                        name: name.clone(),
                        pos: expr.pos,
                    };
                    return self.call_builtin(&ident, Vec::new(), nargout);
                }
                Err(ScriptError::at(
                    ErrorKind::UndefinedIdentifier,
                    format!("undefined identifier '{name}'"),
                    expr.pos,
                ))
            }
            ExprKind::Call { name, args } => {
                if let Some(base) = self.ws.get(&name.name) {
                    let base = base.clone();
                    self.end_stack.push(base.len());
                    let indices: Result<Vec<Value>> = args.iter().map(|a| self.eval(a)).collect();
                    self.end_stack.pop();
                    let indices = indices?;
                    let v = index_value(&base, &indices).map_err(|m| {
                        ScriptError::at(ErrorKind::Index, format!("{m} (indexing '{}')", name.name), name.pos)
                    })?;
                    return Ok(vec![v]);
                }
                if !self.registry.contains(&name.name) {
                    return Err(ScriptError::at(
                        ErrorKind::UnknownFunction,
                        format!("undefined function or variable '{}'", name.name),
                        name.pos,
                    ));
                }
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(a)?);
                }
                self.call_builtin(name, values, nargout)
            }
            _ => Ok(vec![self.eval(expr)?]),
        }
    }

    fn call_builtin(&mut self, name: &Ident, args: Vec<Value>, nargout: usize) -> Result<Vec<Value>> {
        let builtin = self.registry.get(&name.name).expect("checked by caller").clone();
        let arity = builtin.arity();
        if !arity.accepts(args.len()) {
            let expected = match arity.max_args {
                Some(max) if max == arity.min_args => format!("{max}"),
                Some(max) => format!("{} to {max}", arity.min_args),
                None => format!("at least {}", arity.min_args),
            };
            return Err(ScriptError::at(
                ErrorKind::Builtin,
                format!("{} expects {expected} arguments, got {}", name.name, args.len()),
                name.pos,
            ));
        }
        if nargout > arity.max_outputs.max(1) {
            return Err(ScriptError::at(
                ErrorKind::Builtin,
                format!("{} returns at most {} outputs", name.name, arity.max_outputs),
                name.pos,
            ));
        }
        let mut ctx = CallContext {
            ws: &mut self.ws,
            figures: &mut self.figures,
            printed: &mut self.printed,
            rng: &mut self.rng,
            limits: &self.limits,
            nargout,
        };
        let values = builtin.call(&mut ctx, &args).map_err(|e| match e {
            BuiltinError::Invalid(m) => ScriptError::at(ErrorKind::Builtin, m, name.pos),
            BuiltinError::Resource(m) => ScriptError::at(ErrorKind::ResourceExceeded, m, name.pos),
        })?;
        for v in &values {
            self.check_value(v, name.pos)?;
        }
        Ok(values)
    }

    fn indexed_assign(&mut self, target: &Ident, indices: &[Expr], rhs: Value) -> Result<Value> {
        let base = self.ws.get(&target.name).cloned().unwrap_or_else(Value::empty);
        self.end_stack.push(base.len());
        let idx: Result<Vec<Value>> = indices.iter().map(|a| self.eval(a)).collect();
        self.end_stack.pop();
        let idx = idx?;
        assign_index(base, &idx, rhs, self.limits.max_vector_len).map_err(|m| {
            ScriptError::at(
                ErrorKind::Index,
                format!("{m} (assigning '{}')", target.name),
                target.pos,
            )
        })
    }
}

fn numeric_operand(v: &Value) -> std::result::Result<Vec<f64>, String> {
    v.to_numbers()
        .ok_or_else(|| format!("a {} cannot be used in arithmetic", v.type_name()))
}

fn binary(op: BinOp, l: &Value, r: &Value) -> std::result::Result<Value, String> {
    let a = numeric_operand(l)?;
    let b = numeric_operand(r)?;
    let n = match (a.len(), b.len()) {
        (1, m) | (m, 1) => m,
        (x, y) if x == y => x,
        (x, y) => {
            return Err(format!(
                "operands of '{}' have mismatched lengths {x} and {y}",
                op.symbol()
            ))
        }
    };
    let get = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
    let f: fn(f64, f64) -> f64 = match op {
        BinOp::Add => |x, y| x + y,
        BinOp::Sub => |x, y| x - y,
        BinOp::Mul => |x, y| x * y,
        BinOp::Div => |x, y| x / y,
        BinOp::Pow => f64::powf,
        BinOp::Eq => |x, y| f64::from(u8::from(x == y)),
        BinOp::Ne => |x, y| f64::from(u8::from(x != y)),
        BinOp::Lt => |x, y| f64::from(u8::from(x < y)),
        BinOp::Le => |x, y| f64::from(u8::from(x <= y)),
        BinOp::Gt => |x, y| f64::from(u8::from(x > y)),
        BinOp::Ge => |x, y| f64::from(u8::from(x >= y)),
        BinOp::ElemAnd => |x, y| f64::from(u8::from(x != 0.0 && y != 0.0)),
        BinOp::ElemOr => |x, y| f64::from(u8::from(x != 0.0 || y != 0.0)),
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators handled by caller"),
    };
    let out: Vec<f64> = (0..n).map(|i| f(get(&a, i), get(&b, i))).collect();
    let is_cmp = matches!(
        op,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::ElemAnd | BinOp::ElemOr
    );
    if is_cmp && out.len() == 1 {
        Ok(Value::Bool(out[0] != 0.0))
    } else {
        Ok(Value::from_vec(out))
    }
}

/// Bracket concatenation. Numbers join into vectors; any string turns the
/// result into a string (numbers become character codes); any list turns it
/// into a list with non-list items appended as elements.
pub fn concat(values: Vec<Value>) -> std::result::Result<Value, String> {
    if values.iter().any(|v| matches!(v, Value::List(_))) {
        let mut out = Vec::new();
        for v in values {
            match v {
                Value::List(items) => out.extend(items),
                other => out.push(other),
            }
        }
        return Ok(Value::List(out));
    }
    if values.iter().any(|v| matches!(v, Value::Str(_))) {
        let mut out = String::new();
        for v in values {
            match v {
                Value::Str(s) => out.push_str(&s),
                other => {
                    for code in other.to_numbers().unwrap_or_default() {
                        out.push(code_to_char(code)?);
                    }
                }
            }
        }
        return Ok(Value::Str(out));
    }
    let mut out = Vec::new();
    for v in values {
        out.extend(v.to_numbers().unwrap_or_default());
    }
    Ok(Value::from_vec(out))
}

pub fn code_to_char(code: f64) -> std::result::Result<char, String> {
    if code >= 0.0 && code.fract() == 0.0 && code <= u32::MAX as f64 {
        if let Some(c) = char::from_u32(code as u32) {
            return Ok(c);
        }
    }
    Err(format!("{code} is not a valid character code"))
}

/// Resolves index arguments into 0-based positions. Two-index forms accept
/// only row 1, as all arrays are one-dimensional.
fn positions(indices: &[Value], len: Option<usize>) -> std::result::Result<Vec<usize>, String> {
    let idx = match indices {
        [single] => single,
        [row, col] => {
            if row.as_scalar() != Some(1.0) {
                return Err("arrays are one-dimensional; the row index must be 1".into());
            }
            col
        }
        [] => return Err("missing index".into()),
        _ => return Err("too many indices".into()),
    };
    if matches!(idx, Value::Str(_) | Value::List(_)) {
        return Err(format!("a {} cannot be used as an index", idx.type_name()));
    }
    let nums = idx.to_numbers().unwrap_or_default();
    let mut out = Vec::with_capacity(nums.len());
    for x in nums {
        if x.fract() != 0.0 || x < 1.0 {
            return Err(format!(
                "index {} is invalid; indices must be positive integers starting at 1",
                crate::value::format_number(x)
            ));
        }
        if let Some(len) = len {
            if x > len as f64 {
                return Err(format!(
                    "index {} exceeds the length {len}",
                    crate::value::format_number(x)
                ));
            }
        }
        out.push(x as usize - 1);
    }
    Ok(out)
}

pub fn index_value(base: &Value, indices: &[Value]) -> std::result::Result<Value, String> {
    let pos = positions(indices, Some(base.len()))?;
    Ok(match base {
        Value::Num(_) | Value::Bool(_) => {
            if pos.len() == 1 {
                base.clone()
            } else {
                Value::from_vec(pos.iter().map(|_| base.as_scalar().unwrap_or_default()).collect())
            }
        }
        Value::Vector(v) => Value::from_vec(pos.iter().map(|&i| v[i]).collect()),
        Value::Str(s) => {
            let chars: Vec<char> = s.chars().collect();
            Value::Str(pos.iter().map(|&i| chars[i]).collect())
        }
        Value::List(items) => {
            if pos.len() == 1 {
                items[pos[0]].clone()
            } else {
                Value::List(pos.iter().map(|&i| items[i].clone()).collect())
            }
        }
    })
}

fn assign_index(base: Value, indices: &[Value], rhs: Value, cap: usize) -> std::result::Result<Value, String> {
    let pos = positions(indices, None)?;
    if let Some(&max) = pos.iter().max() {
        if max >= cap {
            return Err(format!("index {} exceeds the vector length limit", max + 1));
        }
    }
    match base {
        Value::List(mut items) => {
            if pos.len() != 1 {
                return Err("list elements must be assigned one at a time".into());
            }
            let i = pos[0];
            if i >= items.len() {
                items.resize(i + 1, Value::empty());
            }
            items[i] = rhs;
            Ok(Value::List(items))
        }
        Value::Str(s) => {
            let mut chars: Vec<char> = s.chars().collect();
            let new: Vec<char> = match &rhs {
                Value::Str(r) => r.chars().collect(),
                other => other
                    .to_numbers()
                    .ok_or("cannot store a list in a string")?
                    .into_iter()
                    .map(code_to_char)
                    .collect::<std::result::Result<_, _>>()?,
            };
            let fill = broadcast(&new, pos.len())?;
            for (k, &i) in pos.iter().enumerate() {
                if i >= chars.len() {
                    chars.resize(i + 1, ' ');
                }
                chars[i] = fill(k);
            }
            Ok(Value::Str(chars.into_iter().collect()))
        }
        other => {
            let mut v = other.to_numbers().unwrap_or_default();
            let new = match &rhs {
                Value::List(_) => return Err("cannot store a list in a numeric vector".into()),
                Value::Str(_) => return Err("cannot store a string in a numeric vector".into()),
                r => r.to_numbers().unwrap_or_default(),
            };
            let fill = broadcast(&new, pos.len())?;
            for (k, &i) in pos.iter().enumerate() {
                if i >= v.len() {
                    v.resize(i + 1, 0.0);
                }
                v[i] = fill(k);
            }
            Ok(Value::from_vec(v))
        }
    }
}

fn broadcast<T: Copy>(src: &[T], n: usize) -> std::result::Result<impl Fn(usize) -> T + '_, String> {
    if src.len() == 1 || src.len() == n {
        Ok(move |k: usize| if src.len() == 1 { src[0] } else { src[k] })
    } else {
        Err(format!("cannot assign {} elements to {n} positions", src.len()))
    }
}
