//! Recursive-descent parser producing a [`Program`].
//!
//! Operator precedence, loosest first: `||`, `&&`, comparisons, ranges,
//! `+ -`, `* /`, unary `- + ~`, `^`. Inside `[...]` whitespace separates
//! elements, so `[a -b]` has two elements while `[a - b]` has one.

use crate::ast::{BinOp, Expr, ExprKind, Ident, Program, Stmt, StmtKind, UnOp};
use crate::error::{ErrorKind, Position, ScriptError};
use crate::lexer::{tokenize, Token, TokenKind};

/// Maximum syntactic nesting; deeper input is rejected rather than risking
/// the native stack.
const MAX_DEPTH: usize = 64;

pub fn parse_source(source: &str) -> Result<Program, ScriptError> {
    let tokens = tokenize(source)?;
    let eof = end_position(source);
    Parser::new(tokens, eof).program()
}

pub fn parse(tokens: Vec<Token>) -> Result<Program, ScriptError> {
    let eof = tokens
        .last()
        .map(|t| Position::new(t.pos.line, t.pos.col + 1))
        .unwrap_or(Position::new(1, 1));
    Parser::new(tokens, eof).program()
}

fn end_position(source: &str) -> Position {
    let line = source.matches('\n').count() as u32 + 1;
    let col = source.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) as u32 + 1;
    Position::new(line, col)
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
    eof: Position,
    /// One entry per open bracket or parenthesis; `true` for `[`.
    groups: Vec<bool>,
    /// Number of enclosing `name(...)` argument lists, where `end` is an expression.
    index_depth: usize,
    depth: usize,
}

impl Parser {
    fn new(tokens: Vec<Token>, eof: Position) -> Self {
        Self {
            tokens,
            idx: 0,
            eof,
            groups: Vec::new(),
            index_depth: 0,
            depth: 0,
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.idx + offset)
    }

    fn pos(&self) -> Position {
        self.peek().map(|t| t.pos).unwrap_or(self.eof)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.idx).cloned();
        if tok.is_some() {
            self.idx += 1;
        }
        tok
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek_kind() == Some(kind)
    }

    fn in_matrix(&self) -> bool {
        self.groups.last().copied().unwrap_or(false)
    }

    fn error(&self, expected: &str) -> ScriptError {
        match self.peek() {
            Some(tok) => ScriptError::at(
                ErrorKind::Syntax,
                format!("expected {expected}, found {}", tok.kind.describe()),
                tok.pos,
            ),
            None => ScriptError::at(
                ErrorKind::Syntax,
                format!("unexpected end of input, expected {expected}"),
                self.eof,
            ),
        }
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> Result<Token, ScriptError> {
        if self.at(&kind) {
            Ok(self.advance().expect("peeked"))
        } else {
            Err(self.error(expected))
        }
    }

    fn enter(&mut self) -> Result<(), ScriptError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ScriptError::at(
                ErrorKind::Syntax,
                "expression nested too deeply",
                self.pos(),
            ));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn program(mut self) -> Result<Program, ScriptError> {
        let stmts = self.block(&[])?;
        if let Some(tok) = self.peek() {
            return Err(ScriptError::at(
                ErrorKind::Syntax,
                format!("unexpected {}", tok.kind.describe()),
                tok.pos,
            ));
        }
        Ok(Program { stmts })
    }

    fn skip_separators(&mut self) {
        while matches!(
            self.peek_kind(),
            Some(TokenKind::Semicolon | TokenKind::Comma | TokenKind::Newline)
        ) {
            self.advance();
        }
    }

    fn block(&mut self, terminators: &[TokenKind]) -> Result<Vec<Stmt>, ScriptError> {
        let mut stmts = Vec::new();
        loop {
            self.skip_separators();
            match self.peek_kind() {
                None => break,
                Some(kind) if terminators.contains(kind) => break,
                Some(TokenKind::End | TokenKind::Else | TokenKind::Elseif) => {
                    let tok = self.peek().expect("peeked");
                    return Err(ScriptError::at(
                        ErrorKind::Syntax,
                        format!("'{}' without a matching block", tok.kind.symbol()),
                        tok.pos,
                    ));
                }
                Some(_) => stmts.push(self.statement()?),
            }
        }
        Ok(stmts)
    }

    fn statement(&mut self) -> Result<Stmt, ScriptError> {
        self.enter()?;
        let pos = self.pos();
        let kind = match self.peek_kind() {
            Some(TokenKind::For) => self.for_stmt()?,
            Some(TokenKind::While) => self.while_stmt()?,
            Some(TokenKind::If) => self.if_stmt()?,
            Some(TokenKind::Break) => {
                self.advance();
                self.end_simple()?;
                StmtKind::Break
            }
            Some(TokenKind::Continue) => {
                self.advance();
                self.end_simple()?;
                StmtKind::Continue
            }
            _ => self.simple_stmt()?,
        };
        self.leave();
        Ok(Stmt { kind, pos })
    }

    /// Consumes the separator after a simple statement and reports whether
    /// its result should be echoed.
    fn end_simple(&mut self) -> Result<bool, ScriptError> {
        match self.peek_kind() {
            Some(TokenKind::Semicolon) => {
                self.advance();
                Ok(false)
            }
            Some(TokenKind::Comma | TokenKind::Newline) => {
                self.advance();
                Ok(true)
            }
            None | Some(TokenKind::End | TokenKind::Else | TokenKind::Elseif) => Ok(true),
            _ => Err(self.error("';' or end of line")),
        }
    }

    fn simple_stmt(&mut self) -> Result<StmtKind, ScriptError> {
        let expr = self.expr()?;
        if !self.at(&TokenKind::Assign) {
            let print = self.end_simple()?;
            return Ok(StmtKind::Expr { expr, print });
        }
        let assign_tok = self.advance().expect("peeked");
        if self.peek().is_none() || self.at(&TokenKind::Newline) || self.at(&TokenKind::Semicolon) {
            return Err(self.error("an expression after '='"));
        }
        let value = self.expr()?;
        let print = self.end_simple()?;
        match expr.kind {
            ExprKind::Ident(name) => Ok(StmtKind::Assign {
                target: Ident { name, pos: expr.pos },
                indices: None,
                value,
                print,
            }),
            ExprKind::Call { name, args } => Ok(StmtKind::Assign {
                target: name,
                indices: Some(args),
                value,
                print,
            }),
            ExprKind::Concat(items) if !items.is_empty() => {
                let mut targets = Vec::with_capacity(items.len());
                for item in items {
                    match item.kind {
                        ExprKind::Ident(name) => targets.push(Ident { name, pos: item.pos }),
                        _ => {
                            return Err(ScriptError::at(
                                ErrorKind::Syntax,
                                "multiple assignment targets must be plain names",
                                item.pos,
                            ))
                        }
                    }
                }
                Ok(StmtKind::MultiAssign { targets, value, print })
            }
            _ => Err(ScriptError::at(
                ErrorKind::Syntax,
                "left-hand side of '=' is not assignable",
                assign_tok.pos,
            )),
        }
    }

    fn ident(&mut self) -> Result<Ident, ScriptError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(name),
                pos,
                ..
            }) => {
                let ident = Ident {
                    name: name.clone(),
                    pos: *pos,
                };
                self.advance();
                Ok(ident)
            }
            _ => Err(self.error("an identifier")),
        }
    }

    fn for_stmt(&mut self) -> Result<StmtKind, ScriptError> {
        self.advance();
        let var = self.ident()?;
        self.expect(TokenKind::Assign, "'=' in for statement")?;
        let iter = self.expr()?;
        let body = self.block(&[TokenKind::End])?;
        self.expect(TokenKind::End, "'end' closing the for loop")?;
        Ok(StmtKind::For { var, iter, body })
    }

    fn while_stmt(&mut self) -> Result<StmtKind, ScriptError> {
        self.advance();
        let cond = self.expr()?;
        let body = self.block(&[TokenKind::End])?;
        self.expect(TokenKind::End, "'end' closing the while loop")?;
        Ok(StmtKind::While { cond, body })
    }

    fn if_stmt(&mut self) -> Result<StmtKind, ScriptError> {
        self.advance();
        let terms = [TokenKind::Elseif, TokenKind::Else, TokenKind::End];
        let mut branches = Vec::new();
        let cond = self.expr()?;
        let body = self.block(&terms)?;
        branches.push((cond, body));
        let mut else_body = None;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Elseif) => {
                    self.advance();
                    let cond = self.expr()?;
                    let body = self.block(&terms)?;
                    branches.push((cond, body));
                }
                Some(TokenKind::Else) => {
                    self.advance();
                    else_body = Some(self.block(&[TokenKind::End])?);
                    self.expect(TokenKind::End, "'end' closing the if statement")?;
                    break;
                }
                _ => {
                    self.expect(TokenKind::End, "'end' closing the if statement")?;
                    break;
                }
            }
        }
        Ok(StmtKind::If { branches, else_body })
    }

    fn expr(&mut self) -> Result<Expr, ScriptError> {
        self.enter()?;
        let e = self.or_expr();
        self.leave();
        e
    }

    fn binary(op: BinOp, lhs: Expr, rhs: Expr, pos: Position) -> Expr {
        Expr {
            kind: ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            pos,
        }
    }

    fn or_expr(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.and_expr()?;
        while self.at(&TokenKind::OrOr) {
            let pos = self.advance().expect("peeked").pos;
            let rhs = self.and_expr()?;
            lhs = Self::binary(BinOp::Or, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.elem_or()?;
        while self.at(&TokenKind::AndAnd) {
            let pos = self.advance().expect("peeked").pos;
            let rhs = self.elem_or()?;
            lhs = Self::binary(BinOp::And, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn elem_or(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.elem_and()?;
        while self.at(&TokenKind::Pipe) {
            let pos = self.advance().expect("peeked").pos;
            let rhs = self.elem_and()?;
            lhs = Self::binary(BinOp::ElemOr, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn elem_and(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.cmp_expr()?;
        while self.at(&TokenKind::Amp) {
            let pos = self.advance().expect("peeked").pos;
            let rhs = self.cmp_expr()?;
            lhs = Self::binary(BinOp::ElemAnd, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.range_expr()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Eq) => BinOp::Eq,
                Some(TokenKind::Ne) => BinOp::Ne,
                Some(TokenKind::Lt) => BinOp::Lt,
                Some(TokenKind::Le) => BinOp::Le,
                Some(TokenKind::Gt) => BinOp::Gt,
                Some(TokenKind::Ge) => BinOp::Ge,
                _ => return Ok(lhs),
            };
            let pos = self.advance().expect("peeked").pos;
            let rhs = self.range_expr()?;
            lhs = Self::binary(op, lhs, rhs, pos);
        }
    }

    fn range_expr(&mut self) -> Result<Expr, ScriptError> {
        let start = self.additive()?;
        if !self.at(&TokenKind::Colon) {
            return Ok(start);
        }
        let pos = start.pos;
        self.advance();
        let second = self.additive()?;
        let (step, end) = if self.at(&TokenKind::Colon) {
            self.advance();
            (Some(Box::new(second)), self.additive()?)
        } else {
            (None, second)
        };
        Ok(Expr {
            kind: ExprKind::Range {
                start: Box::new(start),
                step,
                end: Box::new(end),
            },
            pos,
        })
    }

    /// Inside brackets, `a -b` starts a new element rather than subtracting.
    fn element_break(&self) -> bool {
        if !self.in_matrix() {
            return false;
        }
        match (self.peek(), self.peek_at(1)) {
            (Some(op), Some(next)) => op.space_before && !next.space_before,
            _ => false,
        }
    }

    fn additive(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            if self.element_break() {
                return Ok(lhs);
            }
            let pos = self.advance().expect("peeked").pos;
            let rhs = self.multiplicative()?;
            lhs = Self::binary(op, lhs, rhs, pos);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            let pos = self.advance().expect("peeked").pos;
            let rhs = self.unary()?;
            lhs = Self::binary(op, lhs, rhs, pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, ScriptError> {
        let op = match self.peek_kind() {
            Some(TokenKind::Minus) => Some(UnOp::Neg),
            Some(TokenKind::Not) => Some(UnOp::Not),
            Some(TokenKind::Plus) => {
                self.advance();
                return self.unary();
            }
            _ => None,
        };
        match op {
            Some(op) => {
                self.enter()?;
                let pos = self.advance().expect("peeked").pos;
                let operand = self.unary()?;
                self.leave();
                Ok(Expr {
                    kind: ExprKind::Unary {
                        op,
                        operand: Box::new(operand),
                    },
                    pos,
                })
            }
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.primary()?;
        while self.at(&TokenKind::Caret) {
            let pos = self.advance().expect("peeked").pos;
            let rhs = match self.peek_kind() {
                Some(TokenKind::Minus | TokenKind::Plus | TokenKind::Not) => self.unary()?,
                _ => self.primary()?,
            };
            lhs = Self::binary(BinOp::Pow, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, ScriptError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("an expression"));
        };
        let pos = tok.pos;
        let kind = match tok.kind {
            TokenKind::Number(n) => {
                self.advance();
                ExprKind::Number(n)
            }
            TokenKind::Str(s) => {
                self.advance();
                ExprKind::Str(s)
            }
            TokenKind::True => {
                self.advance();
                ExprKind::Bool(true)
            }
            TokenKind::False => {
                self.advance();
                ExprKind::Bool(false)
            }
            TokenKind::End if self.index_depth > 0 => {
                self.advance();
                ExprKind::End
            }
            TokenKind::Ident(name) => {
                self.advance();
                let call = self
                    .peek()
                    .is_some_and(|t| t.kind == TokenKind::LParen && !(self.in_matrix() && t.space_before));
                if call {
                    let args = self.call_args()?;
                    ExprKind::Call {
                        name: Ident { name, pos },
                        args,
                    }
                } else {
                    ExprKind::Ident(name)
                }
            }
            TokenKind::LParen => {
                self.advance();
                self.groups.push(false);
                let inner = self.expr();
                self.groups.pop();
                let inner = inner?;
                self.expect(TokenKind::RParen, "')'")?;
                return Ok(inner);
            }
            TokenKind::LBracket => {
                self.advance();
                self.enter()?;
                self.groups.push(true);
                let items = self.concat_items();
                self.groups.pop();
                self.leave();
                ExprKind::Concat(items?)
            }
            _ => return Err(self.error("an expression")),
        };
        Ok(Expr { kind, pos })
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ScriptError> {
        self.advance();
        self.groups.push(false);
        self.index_depth += 1;
        let result = self.call_args_inner();
        self.index_depth -= 1;
        self.groups.pop();
        result
    }

    fn call_args_inner(&mut self) -> Result<Vec<Expr>, ScriptError> {
        let mut args = Vec::new();
        if self.at(&TokenKind::RParen) {
            self.advance();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.advance();
                }
                Some(TokenKind::RParen) => {
                    self.advance();
                    return Ok(args);
                }
                _ => return Err(self.error("',' or ')'")),
            }
        }
    }

    fn concat_items(&mut self) -> Result<Vec<Expr>, ScriptError> {
        let saved_index = std::mem::replace(&mut self.index_depth, 0);
        let result = self.concat_items_inner();
        self.index_depth = saved_index;
        result
    }

    fn concat_items_inner(&mut self) -> Result<Vec<Expr>, ScriptError> {
        let mut items = Vec::new();
        loop {
            while matches!(
                self.peek_kind(),
                Some(TokenKind::Comma | TokenKind::Semicolon | TokenKind::Newline)
            ) {
                self.advance();
            }
            match self.peek() {
                None => return Err(self.error("']'")),
                Some(t) if t.kind == TokenKind::RBracket => {
                    self.advance();
                    return Ok(items);
                }
                Some(_) => {}
            }
            items.push(self.expr()?);
            match self.peek() {
                Some(t)
                    if matches!(
                        t.kind,
                        TokenKind::Comma | TokenKind::Semicolon | TokenKind::Newline | TokenKind::RBracket
                    ) => {}
                Some(t) if t.space_before => {}
                _ => return Err(self.error("',' or ']'")),
            }
        }
    }
}
