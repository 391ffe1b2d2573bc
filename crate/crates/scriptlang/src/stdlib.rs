//! General-purpose builtins: plotting, conversions and elementwise math.

use crate::figure::Curve;
use crate::interp::code_to_char;
use crate::registry::{Args, Arity, BuiltinError, CallContext, Registry, RegistryError};
use crate::value::{format_number, Value};

type BResult = Result<Vec<Value>, BuiltinError>;

/// Registry holding only the language builtins.
pub fn registry() -> Registry {
    let mut reg = Registry::new();
    register(&mut reg).expect("stdlib names are unique");
    reg
}

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register_fn("plot", Arity::range(1, 3), plot)?;
    reg.register_fn("figure", Arity::range(0, 1).outputs(0), figure)?;
    reg.register_fn("title", Arity::exact(1).outputs(0), |ctx, a| label(ctx, a, "title"))?;
    reg.register_fn("xlabel", Arity::exact(1).outputs(0), |ctx, a| label(ctx, a, "xlabel"))?;
    reg.register_fn("ylabel", Arity::exact(1).outputs(0), |ctx, a| label(ctx, a, "ylabel"))?;
    reg.register_fn("disp", Arity::exact(1).outputs(0), disp)?;
    reg.register_fn("double", Arity::exact(1), double)?;
    reg.register_fn("char", Arity::exact(1), char_fn)?;
    reg.register_fn("num2str", Arity::exact(1), num2str)?;
    reg.register_fn("strcmp", Arity::exact(2), strcmp)?;
    reg.register_fn("xor", Arity::exact(2), xor)?;
    reg.register_fn("zeros", Arity::range(1, 2), |ctx, a| filled(ctx, a, "zeros", 0.0))?;
    reg.register_fn("ones", Arity::range(1, 2), |ctx, a| filled(ctx, a, "ones", 1.0))?;
    reg.register_fn("length", Arity::exact(1), |_, a| {
        Ok(vec![Value::Num(a[0].len() as f64)])
    })?;
    reg.register_fn("numel", Arity::exact(1), |_, a| Ok(vec![Value::Num(a[0].len() as f64)]))?;
    reg.register_fn("isempty", Arity::exact(1), |_, a| {
        Ok(vec![Value::Bool(a[0].is_empty())])
    })?;
    reg.register_fn("floor", Arity::exact(1), |_, a| map(a, "floor", f64::floor))?;
    reg.register_fn("ceil", Arity::exact(1), |_, a| map(a, "ceil", f64::ceil))?;
    reg.register_fn("round", Arity::exact(1), |_, a| map(a, "round", f64::round))?;
    reg.register_fn("abs", Arity::exact(1), |_, a| map(a, "abs", f64::abs))?;
    reg.register_fn("sqrt", Arity::exact(1), sqrt)?;
    reg.register_fn("mod", Arity::exact(2), modulo)?;
    reg.register_fn("sum", Arity::exact(1), |_, a| {
        let v = Args::new("sum", a).vector(0)?;
        Ok(vec![Value::Num(v.iter().sum())])
    })?;
    reg.register_fn("mean", Arity::exact(1), mean)?;
    reg.register_fn("max", Arity::range(1, 2), |_, a| extremum(a, "max", f64::max))?;
    reg.register_fn("min", Arity::range(1, 2), |_, a| extremum(a, "min", f64::min))?;
    reg.register_fn("record", Arity::exact(2).outputs(0), record)?;
    Ok(())
}

fn plot(ctx: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let (data, label) = match args.split_last() {
        Some((Value::Str(s), rest)) => (rest, Some(s.clone())),
        _ => (args, None),
    };
    let a = Args::new("plot", data);
    let curve = match data.len() {
        1 => {
            let y = a.vector(0)?;
            if y.is_empty() {
                return Err(BuiltinError::invalid("plot: nothing to plot (empty data)"));
            }
            Curve::from_y(y, label)
        }
        2 => {
            let x = a.vector(0)?;
            let y = a.vector(1)?;
            if x.len() != y.len() {
                return Err(BuiltinError::invalid(format!(
                    "plot: x has length {} but y has length {}",
                    x.len(),
                    y.len()
                )));
            }
            if y.is_empty() {
                return Err(BuiltinError::invalid("plot: nothing to plot (empty data)"));
            }
            Curve::new(x, y, label)
        }
        _ => {
            return Err(BuiltinError::invalid(
                "plot: expected plot(y) or plot(x, y), optionally followed by a label",
            ))
        }
    };
    ctx.add_curve(curve.expect("lengths checked"))?;
    Ok(vec![])
}

fn figure(ctx: &mut CallContext<'_>, args: &[Value]) -> BResult {
    if args.is_empty() {
        ctx.new_figure()?;
    } else {
        let n = Args::new("figure", args).count(0)?;
        if n == 0 {
            return Err(BuiltinError::invalid("figure: index must be at least 1"));
        }
        ctx.select_figure(n)?;
    }
    Ok(vec![])
}

fn label(ctx: &mut CallContext<'_>, args: &[Value], which: &str) -> BResult {
    let text = Args::new(which, args).string(0)?.to_string();
    let fig = ctx.figures_mut()?;
    match which {
        "title" => fig.title = Some(text),
        "xlabel" => fig.xlabel = Some(text),
        _ => fig.ylabel = Some(text),
    }
    Ok(vec![])
}

fn disp(ctx: &mut CallContext<'_>, args: &[Value]) -> BResult {
    ctx.print(&format!("{}\n", args[0]))?;
    Ok(vec![])
}

fn double(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let v = args[0]
        .to_numbers()
        .ok_or_else(|| BuiltinError::invalid("double: cannot convert a list"))?;
    Ok(vec![Value::from_vec(v)])
}

fn char_fn(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    match &args[0] {
        Value::Str(s) => Ok(vec![Value::Str(s.clone())]),
        other => {
            let codes = other
                .to_numbers()
                .ok_or_else(|| BuiltinError::invalid("char: cannot convert a list"))?;
            let s = codes
                .into_iter()
                .map(code_to_char)
                .collect::<Result<String, _>>()
                .map_err(|m| BuiltinError::invalid(format!("char: {m}")))?;
            Ok(vec![Value::Str(s)])
        }
    }
}

fn num2str(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let s = match &args[0] {
        Value::Str(s) => s.clone(),
        Value::List(_) => return Err(BuiltinError::invalid("num2str: cannot convert a list")),
        other => other
            .to_numbers()
            .unwrap_or_default()
            .iter()
            .map(|x| format_number(*x))
            .collect::<Vec<_>>()
            .join(" "),
    };
    Ok(vec![Value::Str(s)])
}

fn strcmp(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let eq = matches!((&args[0], &args[1]), (Value::Str(a), Value::Str(b)) if a == b);
    Ok(vec![Value::Bool(eq)])
}

fn xor(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let a = Args::new("xor", args);
    let x = a.vector(0)?;
    let y = a.vector(1)?;
    let n = match (x.len(), y.len()) {
        (1, m) | (m, 1) => m,
        (p, q) if p == q => p,
        (p, q) => {
            return Err(BuiltinError::invalid(format!(
                "xor: inputs have mismatched lengths {p} and {q}"
            )))
        }
    };
    let get = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
    let out = (0..n)
        .map(|i| f64::from(u8::from((get(&x, i) != 0.0) != (get(&y, i) != 0.0))))
        .collect();
    Ok(vec![Value::from_vec(out)])
}

fn filled(ctx: &mut CallContext<'_>, args: &[Value], name: &str, fill: f64) -> BResult {
    let a = Args::new(name, args);
    let n = if args.len() == 2 {
        let (r, c) = (a.count(0)?, a.count(1)?);
        if r > 1 && c > 1 {
            return Err(BuiltinError::invalid(format!(
                "{name}: only one-dimensional arrays are supported"
            )));
        }
        r * c
    } else {
        a.count(0)?
    };
    ctx.check_len(n)?;
    Ok(vec![Value::from_vec(vec![fill; n])])
}

fn map(args: &[Value], name: &str, f: fn(f64) -> f64) -> BResult {
    let v = Args::new(name, args).vector(0)?;
    Ok(vec![Value::from_vec(v.into_iter().map(f).collect())])
}

fn sqrt(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let v = Args::new("sqrt", args).vector(0)?;
    if v.iter().any(|&x| x < 0.0) {
        return Err(BuiltinError::invalid(
            "sqrt: negative input (complex numbers are not supported)",
        ));
    }
    Ok(vec![Value::from_vec(v.into_iter().map(f64::sqrt).collect())])
}

fn modulo(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let a = Args::new("mod", args);
    let x = a.vector(0)?;
    let m = a.vector(1)?;
    let n = match (x.len(), m.len()) {
        (1, k) | (k, 1) => k,
        (p, q) if p == q => p,
        (p, q) => {
            return Err(BuiltinError::invalid(format!(
                "mod: inputs have mismatched lengths {p} and {q}"
            )))
        }
    };
    let get = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
    let out = (0..n)
        .map(|i| {
            let (a, b) = (get(&x, i), get(&m, i));
            if b == 0.0 {
                a
            } else {
                a - (a / b).floor() * b
            }
        })
        .collect();
    Ok(vec![Value::from_vec(out)])
}

fn mean(_: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let v = Args::new("mean", args).vector(0)?;
    if v.is_empty() {
        return Err(BuiltinError::invalid("mean: empty input"));
    }
    Ok(vec![Value::Num(v.iter().sum::<f64>() / v.len() as f64)])
}

fn extremum(args: &[Value], name: &str, f: fn(f64, f64) -> f64) -> BResult {
    let a = Args::new(name, args);
    let x = a.vector(0)?;
    if args.len() == 1 {
        let first = *x
            .first()
            .ok_or_else(|| BuiltinError::invalid(format!("{name}: empty input")))?;
        return Ok(vec![Value::Num(x.into_iter().fold(first, f))]);
    }
    let y = a.vector(1)?;
    let n = match (x.len(), y.len()) {
        (1, k) | (k, 1) => k,
        (p, q) if p == q => p,
        (p, q) => {
            return Err(BuiltinError::invalid(format!(
                "{name}: inputs have mismatched lengths {p} and {q}"
            )))
        }
    };
    let get = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
    Ok(vec![Value::from_vec(
        (0..n).map(|i| f(get(&x, i), get(&y, i))).collect(),
    )])
}

/// `record(tag, value)` appends `value` to the hidden list `__rec_<tag>`,
/// the trace container used by for-loop style exercises.
fn record(ctx: &mut CallContext<'_>, args: &[Value]) -> BResult {
    let tag = Args::new("record", args).string(0)?;
    if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(BuiltinError::invalid("record: tag must be letters, digits or '_'"));
    }
    let name = format!("__rec_{tag}");
    let mut items = match ctx.hidden(&name) {
        Some(Value::List(items)) => items.clone(),
        _ => Vec::new(),
    };
    ctx.check_len(items.len() + 1)?;
    items.push(args[1].clone());
    ctx.set_hidden(&name, Value::List(items))?;
    Ok(vec![])
}
