//! Expression language for integrands.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | factor
//! factor  := literal | 'x' | func '(' 'x' ')' | '(' expr ')'
//! literal := decimal | integer '/2^' integer
//! func    := 'exp' | 'sin' | 'cos'
//! ```
//!
//! Function arguments must be the bare variable: the function library has
//! no composition.

use std::fmt;

use thiserror::Error;

use crate::dyadic::{Decimal, Dyadic, Rounding};
use crate::funclib::{self, C2Function};

/// Fractional bits used to snap non-dyadic decimal literals.
pub const LITERAL_BITS: u32 = 64;

/// Largest accepted `q` in a `p/2^q` literal.
const MAX_LITERAL_SHIFT: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Decimal(String),
    /// `numerator / 2^shift`, as written.
    Dyadic {
        numerator: String,
        shift: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Literal),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Call(Func),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at byte {offset}")]
    UnexpectedChar { ch: char, offset: usize },
    #[error("expected {expected} at byte {offset}")]
    Expected {
        expected: &'static str,
        offset: usize,
    },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unsupported composition: `{func}` takes only the bare variable `x` (byte {offset})")]
    UnsupportedComposition { func: &'static str, offset: usize },
    #[error("trailing input at byte {offset}")]
    Trailing { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::UnexpectedChar { offset, .. }
            | ParseError::Expected { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::UnsupportedComposition { offset, .. }
            | ParseError::Trailing { offset } => Some(*offset),
            ParseError::UnexpectedEnd { .. } => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElaborateError {
    #[error("literal `{0}` cannot be represented as an exact dyadic")]
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((Tok::Num(src[start..i].to_string()), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::UnexpectedChar { ch, offset: start });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> Option<usize> {
        self.toks.get(self.pos).map(|&(_, o)| o)
    }

    fn fail(&self, expected: &'static str) -> ParseError {
        match self.offset() {
            Some(offset) => ParseError::Expected { expected, offset },
            None => ParseError::UnexpectedEnd { expected },
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, expected: &'static str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.fail(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(text)) => {
                self.pos += 1;
                self.literal(text, offset.unwrap_or(0))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let offset = offset.unwrap_or(0);
                if name == "x" {
                    return Ok(Expr::Var);
                }
                let func = match name.as_str() {
                    "exp" => Func::Exp,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    _ => return Err(ParseError::UnknownFunction { name, offset }),
                };
                self.expect(&Tok::LParen, "`(`")?;
                let arg_offset = self.offset();
                let arg = self.expr()?;
                if arg != Expr::Var {
                    return Err(ParseError::UnsupportedComposition {
                        func: func.name(),
                        offset: arg_offset.unwrap_or(offset),
                    });
                }
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Expr::Call(func))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.fail("a literal, `x`, a function call or `(`")),
        }
    }

    fn literal(&mut self, text: String, offset: usize) -> Result<Expr, ParseError> {
        if !self.eat(&Tok::Slash) {
            if Decimal::parse(&text).is_err() {
                return Err(ParseError::Expected {
                    expected: "a decimal literal",
                    offset,
                });
            }
            return Ok(Expr::Lit(Literal::Decimal(text)));
        }
        if !is_integer(&text) {
            return Err(ParseError::Expected {
                expected: "an integer numerator before `/2^`",
                offset,
            });
        }
        match self.peek() {
            Some(Tok::Num(two)) if two == "2" => self.pos += 1,
            _ => return Err(self.fail("`2` after `/`")),
        }
        self.expect(&Tok::Caret, "`^`")?;
        match self.peek().cloned() {
            Some(Tok::Num(shift)) if is_integer(&shift) => {
                self.pos += 1;
                Ok(Expr::Lit(Literal::Dyadic {
                    numerator: text,
                    shift,
                }))
            }
            _ => Err(self.fail("an integer exponent")),
        }
    }
}

fn is_integer(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let e = p.expr()?;
    if let Some(offset) = p.offset() {
        return Err(ParseError::Trailing { offset });
    }
    Ok(e)
}

impl Literal {
    /// Exact value, or the 64-bit snap together with its error bound.
    fn value(&self) -> Result<(Dyadic, Dyadic), ElaborateError> {
        match self {
            Literal::Decimal(text) => {
                let dec =
                    Decimal::parse(text).map_err(|_| ElaborateError::Literal(text.clone()))?;
                match dec.exact_dyadic() {
                    Some(v) => Ok((v, Dyadic::zero())),
                    None => Ok((
                        dec.to_dyadic(LITERAL_BITS, Rounding::NearestEven),
                        Dyadic::pow2(-(LITERAL_BITS as i64) - 1),
                    )),
                }
            }
            Literal::Dyadic { numerator, shift } => {
                let shown = format!("{numerator}/2^{shift}");
                let q: u64 = shift
                    .parse()
                    .ok()
                    .filter(|&q| q <= MAX_LITERAL_SHIFT)
                    .ok_or_else(|| ElaborateError::Literal(shown.clone()))?;
                let p: num_bigint::BigInt = numerator
                    .parse()
                    .map_err(|_| ElaborateError::Literal(shown))?;
                Ok((Dyadic::new(p, -(q as i64)), Dyadic::zero()))
            }
        }
    }
}

/// Builds the [`C2Function`] denoted by `e`.
///
/// Non-dyadic decimals are snapped to [`LITERAL_BITS`] fractional bits and
/// the snap error is added to the constant's `b0`.
pub fn elaborate(e: &Expr) -> Result<C2Function, ElaborateError> {
    Ok(match e {
        Expr::Lit(lit) => {
            let (value, snap) = lit.value()?;
            let f = funclib::poly(vec![value]);
            if snap.is_zero() {
                f
            } else {
                f.widen_b0(&snap)
            }
        }
        Expr::Var => funclib::poly(vec![Dyadic::zero(), Dyadic::one()]),
        Expr::Neg(a) => funclib::scale(&Dyadic::from_int(-1), &elaborate(a)?),
        Expr::Add(a, b) => funclib::sum(&elaborate(a)?, &elaborate(b)?),
        Expr::Sub(a, b) => funclib::sum(
            &elaborate(a)?,
            &funclib::scale(&Dyadic::from_int(-1), &elaborate(b)?),
        ),
        Expr::Mul(a, b) => funclib::product(&elaborate(a)?, &elaborate(b)?),
        Expr::Call(Func::Exp) => funclib::exp_fn(),
        Expr::Call(Func::Sin) => funclib::sin_fn(),
        Expr::Call(Func::Cos) => funclib::cos_fn(),
    })
}

/// Parses and elaborates in one step, keeping the source as description.
pub fn compile(source: &str) -> Result<C2Function, CompileError> {
    let e = parse(source)?;
    let f = elaborate(&e)?;
    Ok(f.with_description(source.trim()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Elaborate(#[from] ElaborateError),
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Lit(_) | Expr::Var | Expr::Call(_) => 4,
    }
}

struct Operand<'a>(&'a Expr, bool);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Minimal-parenthesis rendering that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(Literal::Decimal(t)) => f.write_str(t),
            Expr::Lit(Literal::Dyadic { numerator, shift }) => write!(f, "{numerator}/2^{shift}"),
            Expr::Var => f.write_str("x"),
            Expr::Call(func) => write!(f, "{}(x)", func.name()),
            Expr::Neg(a) => write!(f, "-{}", Operand(a, precedence(a) < 3)),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) {
                    '+'
                } else {
                    '-'
                };
                write!(
                    f,
                    "{} {op} {}",
                    Operand(a, precedence(a) < 1),
                    Operand(b, precedence(b) <= 1)
                )
            }
            Expr::Mul(a, b) => write!(
                f,
                "{}*{}",
                Operand(a, precedence(a) < 2),
                Operand(b, precedence(b) <= 2)
            ),
        }
    }
}
