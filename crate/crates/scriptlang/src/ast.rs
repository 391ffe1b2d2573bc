//! Syntax tree and its canonical source rendering.

use std::fmt::{self, Write as _};

use crate::error::Position;

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub pos: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    ElemAnd,
    ElemOr,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Eq => "==",
            BinOp::Ne => "~=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::ElemAnd => "&",
            BinOp::ElemOr => "|",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Str(String),
    Bool(bool),
    Ident(String),
    /// `name(args)`: indexing when `name` is a variable, a builtin call otherwise.
    Call {
        name: Ident,
        args: Vec<Expr>,
    },
    Range {
        start: Box<Expr>,
        step: Option<Box<Expr>>,
        end: Box<Expr>,
    },
    Concat(Vec<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    /// `end` inside an index expression.
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        target: Ident,
        indices: Option<Vec<Expr>>,
        value: Expr,
        print: bool,
    },
    MultiAssign {
        targets: Vec<Ident>,
        value: Expr,
        print: bool,
    },
    Expr {
        expr: Expr,
        print: bool,
    },
    For {
        var: Ident,
        iter: Expr,
        body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    If {
        branches: Vec<(Expr, Vec<Stmt>)>,
        else_body: Option<Vec<Stmt>>,
    },
    Break,
    Continue,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

impl Program {
    /// Every identifier used in call position (`name(...)` or a bare name),
    /// in source order. Assignment targets and loop variables are excluded.
    pub fn referenced_names(&self) -> Vec<Ident> {
        let mut out = Vec::new();
        for stmt in &self.stmts {
            collect_stmt(stmt, &mut out);
        }
        out
    }

    /// Canonical source text. Binary and unary expressions are fully
    /// parenthesised so the output re-parses to the same tree.
    pub fn unparse(&self) -> String {
        let mut out = String::new();
        write_block(&mut out, &self.stmts, 0);
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.unparse())
    }
}

fn collect_stmt(stmt: &Stmt, out: &mut Vec<Ident>) {
    match &stmt.kind {
        StmtKind::Assign { indices, value, .. } => {
            for e in indices.iter().flatten() {
                collect_expr(e, out);
            }
            collect_expr(value, out);
        }
        StmtKind::MultiAssign { value, .. } => collect_expr(value, out),
        StmtKind::Expr { expr, .. } => collect_expr(expr, out),
        StmtKind::For { iter, body, .. } => {
            collect_expr(iter, out);
            body.iter().for_each(|s| collect_stmt(s, out));
        }
        StmtKind::While { cond, body } => {
            collect_expr(cond, out);
            body.iter().for_each(|s| collect_stmt(s, out));
        }
        StmtKind::If { branches, else_body } => {
            for (cond, body) in branches {
                collect_expr(cond, out);
                body.iter().for_each(|s| collect_stmt(s, out));
            }
            for s in else_body.iter().flatten() {
                collect_stmt(s, out);
            }
        }
        StmtKind::Break | StmtKind::Continue => {}
    }
}

fn collect_expr(expr: &Expr, out: &mut Vec<Ident>) {
    match &expr.kind {
        ExprKind::Ident(name) => out.push(Ident {
            name: name.clone(),
            pos: expr.pos,
        }),
        ExprKind::Call { name, args } => {
            out.push(name.clone());
            args.iter().for_each(|a| collect_expr(a, out));
        }
        ExprKind::Range { start, step, end } => {
            collect_expr(start, out);
            if let Some(step) = step {
                collect_expr(step, out);
            }
            collect_expr(end, out);
        }
        ExprKind::Concat(items) => items.iter().for_each(|a| collect_expr(a, out)),
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_expr(lhs, out);
            collect_expr(rhs, out);
        }
        ExprKind::Unary { operand, .. } => collect_expr(operand, out),
        ExprKind::Number(_) | ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::End => {}
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for stmt in stmts {
        write_stmt(out, stmt, depth);
    }
}

fn terminator(print: bool) -> &'static str {
    if print {
        ""
    } else {
        ";"
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match &stmt.kind {
        StmtKind::Assign {
            target,
            indices,
            value,
            print,
        } => {
            out.push_str(&target.name);
            if let Some(indices) = indices {
                write_args(out, indices);
            }
            let _ = writeln!(out, " = {}{}", expr_to_string(value), terminator(*print));
        }
        StmtKind::MultiAssign { targets, value, print } => {
            let names: Vec<&str> = targets.iter().map(|t| t.name.as_str()).collect();
            let _ = writeln!(
                out,
                "[{}] = {}{}",
                names.join(", "),
                expr_to_string(value),
                terminator(*print)
            );
        }
        StmtKind::Expr { expr, print } => {
            let _ = writeln!(out, "{}{}", expr_to_string(expr), terminator(*print));
        }
        StmtKind::For { var, iter, body } => {
            let _ = writeln!(out, "for {} = {}", var.name, expr_to_string(iter));
            write_block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("end\n");
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while {}", expr_to_string(cond));
            write_block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("end\n");
        }
        StmtKind::If { branches, else_body } => {
            for (i, (cond, body)) in branches.iter().enumerate() {
                if i > 0 {
                    indent(out, depth);
                    out.push_str("elseif ");
                } else {
                    out.push_str("if ");
                }
                out.push_str(&expr_to_string(cond));
                out.push('\n');
                write_block(out, body, depth + 1);
            }
            if let Some(body) = else_body {
                indent(out, depth);
                out.push_str("else\n");
                write_block(out, body, depth + 1);
            }
            indent(out, depth);
            out.push_str("end\n");
        }
        StmtKind::Break => out.push_str("break;\n"),
        StmtKind::Continue => out.push_str("continue;\n"),
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&expr_to_string(a));
    }
    out.push(')');
}

pub fn expr_to_string(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr);
    out
}

fn write_expr(out: &mut String, expr: &Expr) {
    match &expr.kind {
        ExprKind::Number(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Str(s) => {
            out.push('\'');
            out.push_str(&s.replace('\'', "''"));
            out.push('\'');
        }
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Ident(name) => out.push_str(name),
        ExprKind::Call { name, args } => {
            out.push_str(&name.name);
            write_args(out, args);
        }
        ExprKind::Range { start, step, end } => {
            out.push('(');
            write_expr(out, start);
            out.push(':');
            if let Some(step) = step {
                write_expr(out, step);
                out.push(':');
            }
            write_expr(out, end);
            out.push(')');
        }
        ExprKind::Concat(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item);
            }
            out.push(']');
        }
        ExprKind::Binary { op, lhs, rhs } => {
            out.push('(');
            write_expr(out, lhs);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs);
            out.push(')');
        }
        ExprKind::Unary { op, operand } => {
            out.push('(');
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '~',
            });
            write_expr(out, operand);
            out.push(')');
        }
        ExprKind::End => out.push_str("end"),
    }
}
