//! Recursive-descent parser for the bivariate expression language.
//!
//! Grammar (public contract of every `--f` flag):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := atom ('^' factor)?          // right-associative
//! atom   := number | 'x' | 'y' | 'pi' | 'e'
//!         | fn '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` parses as `-(x^2)`.
//! Whitespace is insignificant. Numbers are decimal with an optional
//! exponent part; the constants `pi` and `e` become numeric literals at
//! parse time.

use super::{BinOp, Func, Node, NodeKind};
use crate::error::{Error, Result};

const FUNCTIONS: [(&str, Func); 6] = [
    ("sin", Func::Sin),
    ("cos", Func::Cos),
    ("exp", Func::Exp),
    ("log", Func::Log),
    ("sqrt", Func::Sqrt),
    ("abs", Func::Abs),
];

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(_) => "number".into(),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its byte span.
    fn next(&mut self) -> Result<(Token, (usize, usize))> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Token::Eof, (start, start)));
        }
        let c = self.src[self.pos];
        let simple = match c {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok((tok, (start, self.pos)));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.lex_number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_owned();
            return Ok((Token::Ident(name), (start, self.pos)));
        }
        Err(Error::Parse {
            offset: start,
            expected: format!("a token (found byte {:?})", c as char),
        })
    }

    fn lex_number(&mut self, start: usize) -> Result<(Token, (usize, usize))> {
        let mut saw_digit = false;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            saw_digit = true;
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                saw_digit = true;
                self.pos += 1;
            }
        }
        if !saw_digit {
            return Err(Error::Parse { offset: start, expected: "a digit".into() });
        }
        // Exponent part only if it is a complete one; `2e` alone would
        // otherwise swallow an identifier.
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mut probe = self.pos + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| Error::Parse {
            offset: start,
            expected: format!("a valid number (found `{text}`)"),
        })?;
        Ok((Token::Num(value), (start, self.pos)))
    }
}

pub(super) struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: (Token, (usize, usize)),
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let lookahead = lexer.next()?;
        Ok(Self { lexer, lookahead })
    }

    fn advance(&mut self) -> Result<(Token, (usize, usize))> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.lookahead, next))
    }

    fn expect(&mut self, want: Token) -> Result<(usize, usize)> {
        if self.lookahead.0 == want {
            Ok(self.advance()?.1)
        } else {
            Err(Error::Parse {
                offset: self.lookahead.1 .0,
                expected: format!("{} (found {})", want.describe(), self.lookahead.0.describe()),
            })
        }
    }

    pub(super) fn parse_to_end(mut self) -> Result<Node> {
        let root = self.expr()?;
        if self.lookahead.0 != Token::Eof {
            return Err(Error::Parse {
                offset: self.lookahead.1 .0,
                expected: format!(
                    "an operator or end of input (found {})",
                    self.lookahead.0.describe()
                ),
            });
        }
        Ok(root)
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.lookahead.0 {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Node::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.lookahead.0 {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Node::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.lookahead.0 == Token::Minus {
            let (_, span) = self.advance()?;
            let inner = self.unary()?;
            let full = (span.0, inner.span.1);
            return Ok(Node { kind: NodeKind::Neg(Box::new(inner)), span: full });
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.lookahead.0 == Token::Caret {
            self.advance()?;
            let exponent = self.factor()?; // right-associative
            let span = (base.span.0, exponent.span.1);
            return Ok(Node {
                kind: NodeKind::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let (tok, span) = self.advance()?;
        match tok {
            Token::Num(v) => Ok(Node { kind: NodeKind::Num(v), span }),
            Token::LParen => {
                let inner = self.expr()?;
                let close = self.expect(Token::RParen)?;
                Ok(Node { kind: inner.kind, span: (span.0, close.1) })
            }
            Token::Ident(name) => self.ident_atom(name, span),
            other => Err(Error::Parse {
                offset: span.0,
                expected: format!(
                    "a number, variable, constant, function call or `(` (found {})",
                    other.describe()
                ),
            }),
        }
    }

    fn ident_atom(&mut self, name: String, span: (usize, usize)) -> Result<Node> {
        match name.as_str() {
            "x" => return Ok(Node { kind: NodeKind::X, span }),
            "y" => return Ok(Node { kind: NodeKind::Y, span }),
            "pi" => return Ok(Node { kind: NodeKind::Num(std::f64::consts::PI), span }),
            "e" => return Ok(Node { kind: NodeKind::Num(std::f64::consts::E), span }),
            _ => {}
        }
        if let Some((_, func)) = FUNCTIONS.iter().find(|(n, _)| *n == name) {
            self.expect(Token::LParen)?;
            let arg = self.expr()?;
            let close = self.expect(Token::RParen)?;
            return Ok(Node {
                kind: NodeKind::Call(*func, Box::new(arg)),
                span: (span.0, close.1),
            });
        }
        Err(Error::UnknownIdentifier { offset: span.0, name })
    }
}
