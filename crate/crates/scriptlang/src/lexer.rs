//! Tokenizer for LabScript source.
//!
//! Comments start with `%` and run to the end of the line; `...` continues a
//! statement on the next line. Quotes always open a string literal since the
//! language has no transpose operator.

use crate::error::{ErrorKind, Position, ScriptError};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    For,
    While,
    If,
    Elseif,
    Else,
    End,
    Break,
    Continue,
    True,
    False,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Amp,
    Pipe,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Colon,
    Comma,
    Semicolon,
    Newline,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

impl TokenKind {
    /// Short human-readable rendering used in syntax error hints.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier '{name}'"),
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Newline => "end of line".to_string(),
            other => format!("'{}'", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Ident(_) => "identifier",
            TokenKind::Number(_) => "number",
            TokenKind::Str(_) => "string",
            TokenKind::For => "for",
            TokenKind::While => "while",
            TokenKind::If => "if",
            TokenKind::Elseif => "elseif",
            TokenKind::Else => "else",
            TokenKind::End => "end",
            TokenKind::Break => "break",
            TokenKind::Continue => "continue",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::Assign => "=",
            TokenKind::Eq => "==",
            TokenKind::Ne => "~=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Amp => "&",
            TokenKind::Pipe => "|",
            TokenKind::Not => "~",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Caret => "^",
            TokenKind::Colon => ":",
            TokenKind::Comma => ",",
            TokenKind::Semicolon => ";",
            TokenKind::Newline => "newline",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Position,
    /// Whitespace separated this token from the previous one. Inside
    /// brackets this decides between `[a -b]` (two elements) and `[a - b]`.
    pub space_before: bool,
}

pub fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "for" => TokenKind::For,
        "while" => TokenKind::While,
        "if" => TokenKind::If,
        "elseif" => TokenKind::Elseif,
        "else" => TokenKind::Else,
        "end" => TokenKind::End,
        "break" => TokenKind::Break,
        "continue" => TokenKind::Continue,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        _ => return None,
    })
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Position {
        Position::new(self.line, self.col)
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ScriptError> {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut space_before = false;

    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        match c {
            ' ' | '\t' | '\r' => {
                cur.bump();
                space_before = true;
                continue;
            }
            '%' => {
                cur.skip_line();
                space_before = true;
                continue;
            }
            '.' if cur.peek2() == Some('.') => {
                // `...` continuation: swallow the rest of the line and the newline.
                let mut dots = 0;
                while cur.peek() == Some('.') {
                    cur.bump();
                    dots += 1;
                }
                if dots != 3 {
                    return Err(ScriptError::at(ErrorKind::Lexical, "unexpected '..'", pos));
                }
                cur.skip_line();
                cur.bump();
                space_before = true;
                continue;
            }
            _ => {}
        }

        let kind = if c == '\n' {
            cur.bump();
            TokenKind::Newline
        } else if c.is_ascii_digit() || (c == '.' && cur.peek2().is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur, pos)?
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            keyword(&word).unwrap_or(TokenKind::Ident(word))
        } else if c == '\'' || c == '"' {
            lex_string(&mut cur, c, pos)?
        } else {
            lex_operator(&mut cur, c, pos)?
        };
        tokens.push(Token {
            kind,
            pos,
            space_before,
        });
        space_before = false;
    }
    Ok(tokens)
}

fn lex_number(cur: &mut Cursor<'_>, pos: Position) -> Result<TokenKind, ScriptError> {
    let mut text = String::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_digit() {
            text.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    // A '.' followed by an operator belongs to `.*`, `./` or `.^`.
    if cur.peek() == Some('.') && !matches!(cur.peek2(), Some('*' | '/' | '^' | '.')) {
        text.push('.');
        cur.bump();
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                cur.bump();
            } else {
                break;
            }
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let next = cur.peek2();
        if next.is_some_and(|d| d.is_ascii_digit() || d == '+' || d == '-') {
            text.push('e');
            cur.bump();
            if let Some(sign @ ('+' | '-')) = cur.peek() {
                text.push(sign);
                cur.bump();
            }
            let mut digits = 0;
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    cur.bump();
                    digits += 1;
                } else {
                    break;
                }
            }
            if digits == 0 {
                return Err(ScriptError::at(ErrorKind::Lexical, "malformed exponent in number", pos));
            }
        }
    }
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(TokenKind::Number)
        .ok_or_else(|| ScriptError::at(ErrorKind::Lexical, format!("invalid number '{text}'"), pos))
}

fn lex_string(cur: &mut Cursor<'_>, quote: char, pos: Position) -> Result<TokenKind, ScriptError> {
    cur.bump();
    let mut text = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => {
                return Err(ScriptError::at(ErrorKind::Lexical, "unterminated string literal", pos));
            }
            Some(c) if c == quote => {
                if cur.peek() == Some(quote) {
                    cur.bump();
                    text.push(quote);
                } else {
                    return Ok(TokenKind::Str(text));
                }
            }
            Some(c) => text.push(c),
        }
    }
}

fn lex_operator(cur: &mut Cursor<'_>, c: char, pos: Position) -> Result<TokenKind, ScriptError> {
    cur.bump();
    let next = cur.peek();
    let mut two = |kind: TokenKind| {
        cur.bump();
        kind
    };
    Ok(match (c, next) {
        ('=', Some('=')) => two(TokenKind::Eq),
        ('~' | '!', Some('=')) => two(TokenKind::Ne),
        ('<', Some('=')) => two(TokenKind::Le),
        ('>', Some('=')) => two(TokenKind::Ge),
        ('&', Some('&')) => two(TokenKind::AndAnd),
        ('|', Some('|')) => two(TokenKind::OrOr),
        ('.', Some('*')) => two(TokenKind::Star),
        ('.', Some('/')) => two(TokenKind::Slash),
        ('.', Some('^')) => two(TokenKind::Caret),
        ('&', _) => TokenKind::Amp,
        ('|', _) => TokenKind::Pipe,
        ('=', _) => TokenKind::Assign,
        ('<', _) => TokenKind::Lt,
        ('>', _) => TokenKind::Gt,
        ('~' | '!', _) => TokenKind::Not,
        ('+', _) => TokenKind::Plus,
        ('-', _) => TokenKind::Minus,
        ('*', _) => TokenKind::Star,
        ('/', _) => TokenKind::Slash,
        ('^', _) => TokenKind::Caret,
        (':', _) => TokenKind::Colon,
        (',', _) => TokenKind::Comma,
        (';', _) => TokenKind::Semicolon,
        ('(', _) => TokenKind::LParen,
        (')', _) => TokenKind::RParen,
        ('[', _) => TokenKind::LBracket,
        (']', _) => TokenKind::RBracket,
        _ => {
            return Err(ScriptError::at(
                ErrorKind::Lexical,
                format!("illegal character '{}'", c.escape_default()),
                pos,
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn ident(s: &str) -> TokenKind {
        TokenKind::Ident(s.to_string())
    }

    #[test]
    fn comment_is_stripped() {
        assert_eq!(
            kinds("x = [1 2] % hi"),
            vec![
                ident("x"),
                TokenKind::Assign,
                TokenKind::LBracket,
                TokenKind::Number(1.0),
                TokenKind::Number(2.0),
                TokenKind::RBracket
            ]
        );
    }

    #[test]
    fn range_tokens() {
        assert_eq!(kinds("a:b"), vec![ident("a"), TokenKind::Colon, ident("b")]);
    }

    #[test]
    fn concatenation_fix_line() {
        let toks = tokenize("tx_bs = [tx_bs byte]").unwrap();
        assert_eq!(toks.len(), 6);
        let idents = toks.iter().filter(|t| t.kind == ident("tx_bs")).count();
        assert_eq!(idents, 2);
        assert_eq!(toks[3].pos, Position::new(1, 10));
        assert!(toks[4].space_before);
    }

    #[test]
    fn illegal_character_reports_position() {
        let err = tokenize("x = 1\ny = 2 # 3").unwrap_err();
        assert_eq!(err.kind, ErrorKind::Lexical);
        assert_eq!(err.pos, Some(Position::new(2, 7)));
    }

    #[test]
    fn numbers_and_elementwise_ops() {
        assert_eq!(
            kinds("1.5e-3 .5 2.*x"),
            vec![
                TokenKind::Number(1.5e-3),
                TokenKind::Number(0.5),
                TokenKind::Number(2.0),
                TokenKind::Star,
                ident("x")
            ]
        );
    }

    #[test]
    fn strings_with_escaped_quotes() {
        assert_eq!(kinds("'it''s'"), vec![TokenKind::Str("it's".into())]);
        assert!(tokenize("'open").is_err());
    }

    #[test]
    fn continuation_joins_lines() {
        assert_eq!(
            kinds("x = 1 + ...\n 2"),
            vec![
                ident("x"),
                TokenKind::Assign,
                TokenKind::Number(1.0),
                TokenKind::Plus,
                TokenKind::Number(2.0)
            ]
        );
    }

    #[test]
    fn comparison_operators() {
        assert_eq!(
            kinds("a ~= b == c <= d && e || ~f"),
            vec![
                ident("a"),
                TokenKind::Ne,
                ident("b"),
                TokenKind::Eq,
                ident("c"),
                TokenKind::Le,
                ident("d"),
                TokenKind::AndAnd,
                ident("e"),
                TokenKind::OrOr,
                TokenKind::Not,
                ident("f")
            ]
        );
    }
}
