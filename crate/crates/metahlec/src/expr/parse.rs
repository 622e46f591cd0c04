//! Recursive-descent parser for the C-like expression surface syntax.
//!
//! Operator precedence follows C. Additions over plain C expressions:
//! sized literals (`16'd255`, `8'hff`, `4'b1010`), bit slices (`x[7:0]`,
//! `x[3]`), concatenation (`{a, b}`), the width functions `zext`/`sext`,
//! the sign reinterpretations `signed`/`unsigned` and the reductions
//! `orr`/`andr`/`xorr`. `≠` is accepted as an alias for `!=`.

use super::{BinaryOp, Expr, ExtendKind, Signedness, UnaryOp, MAX_WIDTH};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    /// Numeric literal; `width` is `Some` for sized forms like `8'd255`.
    Number { value: u128, width: Option<u32> },
    Op(&'static str),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Question,
    Colon,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn lex_number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        let value = self.lex_digits(10, "decimal")?;
        // A following apostrophe turns the number into a width prefix.
        if self.peek_byte() == Some(b'\'') {
            self.pos += 1;
            let base = match self.peek_byte() {
                Some(b'd') | Some(b'D') => 10,
                Some(b'h') | Some(b'H') => 16,
                Some(b'b') | Some(b'B') => 2,
                _ => {
                    return Err(ParseError::new(
                        self.pos,
                        "expected base marker 'd', 'h' or 'b' after width prefix",
                    ))
                }
            };
            self.pos += 1;
            let width = u32::try_from(value)
                .ok()
                .filter(|w| (1..=MAX_WIDTH).contains(w))
                .ok_or_else(|| {
                    ParseError::new(start, format!("literal width {value} outside 1..={MAX_WIDTH}"))
                })?;
            let digits_at = self.pos;
            let v = self.lex_digits(base, "literal")?;
            if width < MAX_WIDTH && v >= (1u128 << width) {
                return Err(ParseError::new(
                    digits_at,
                    format!("literal value {v} does not fit in {width} bits"),
                ));
            }
            return Ok(Tok::Number { value: v, width: Some(width) });
        }
        // `0x` hex form. The leading digits must then be exactly "0".
        if value == 0
            && self.pos == start + 1
            && matches!(self.peek_byte(), Some(b'x') | Some(b'X'))
        {
            self.pos += 1;
            let v = self.lex_digits(16, "hexadecimal")?;
            return Ok(Tok::Number { value: v, width: None });
        }
        Ok(Tok::Number { value, width: None })
    }

    fn lex_digits(&mut self, base: u128, what: &str) -> Result<u128, ParseError> {
        let start = self.pos;
        let mut value: u128 = 0;
        let mut any = false;
        while let Some(b) = self.peek_byte() {
            let d = match b {
                b'0'..=b'9' => (b - b'0') as u128,
                b'a'..=b'f' => (b - b'a') as u128 + 10,
                b'A'..=b'F' => (b - b'A') as u128 + 10,
                b'_' => {
                    self.pos += 1;
                    continue;
                }
                _ => break,
            };
            if d >= base {
                break;
            }
            value = value
                .checked_mul(base)
                .and_then(|v| v.checked_add(d))
                .ok_or_else(|| ParseError::new(start, format!("{what} literal overflows 128 bits")))?;
            self.pos += 1;
            any = true;
        }
        if !any {
            return Err(ParseError::new(self.pos, format!("expected {what} digits")));
        }
        Ok(value)
    }

    /// Returns the next token and its starting byte offset, or `None` at
    /// end of input.
    fn next(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let Some(b) = self.peek_byte() else { return Ok(None) };
        let tok = match b {
            b'0'..=b'9' => self.lex_number()?,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self
                    .peek_byte()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'{' => {
                self.pos += 1;
                Tok::LBrace
            }
            b'}' => {
                self.pos += 1;
                Tok::RBrace
            }
            b'[' => {
                self.pos += 1;
                Tok::LBracket
            }
            b']' => {
                self.pos += 1;
                Tok::RBracket
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'?' => {
                self.pos += 1;
                Tok::Question
            }
            b':' => {
                self.pos += 1;
                Tok::Colon
            }
            b'+' => self.op1("+"),
            b'-' => self.op1("-"),
            b'*' => self.op1("*"),
            b'/' => self.op1("/"),
            b'%' => self.op1("%"),
            b'~' => self.op1("~"),
            b'^' => self.op1("^"),
            b'&' => self.op2(b'&', "&&", "&"),
            b'|' => self.op2(b'|', "||", "|"),
            b'=' => {
                if self.bytes.get(self.pos + 1) == Some(&b'=') {
                    self.pos += 2;
                    Tok::Op("==")
                } else {
                    return Err(ParseError::new(at, "single '=' is not an operator; use '=='"));
                }
            }
            b'!' => self.op2(b'=', "!=", "!"),
            b'<' => {
                if self.bytes.get(self.pos + 1) == Some(&b'<') {
                    self.pos += 2;
                    Tok::Op("<<")
                } else {
                    self.op2(b'=', "<=", "<")
                }
            }
            b'>' => {
                if self.bytes.get(self.pos + 1) == Some(&b'>') {
                    self.pos += 2;
                    Tok::Op(">>")
                } else {
                    self.op2(b'=', ">=", ">")
                }
            }
            _ => {
                // Only multi-byte token we accept: the U+2260 alias of `!=`.
                if self.src[self.pos..].starts_with('\u{2260}') {
                    self.pos += '\u{2260}'.len_utf8();
                    Tok::Op("!=")
                } else {
                    let ch = self.src[self.pos..].chars().next().unwrap();
                    return Err(ParseError::new(at, format!("unexpected character '{ch}'")));
                }
            }
        };
        Ok(Some((tok, at)))
    }

    fn op1(&mut self, sym: &'static str) -> Tok {
        self.pos += 1;
        Tok::Op(sym)
    }

    /// Two-character operator if the next byte matches, else the single.
    fn op2(&mut self, second: u8, double: &'static str, single: &'static str) -> Tok {
        if self.bytes.get(self.pos + 1) == Some(&second) {
            self.pos += 2;
            Tok::Op(double)
        } else {
            self.pos += 1;
            Tok::Op(single)
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

/// Parses one expression; trailing input is an error.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer::new(src);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let end = src.len();
    let mut p = Parser { toks, idx: 0, end };
    let e = p.ternary()?;
    if let Some((_, at)) = p.peek_at() {
        return Err(ParseError::new(at, "unexpected trailing input"));
    }
    Ok(e)
}

fn binary_from_symbol(sym: &str) -> Option<BinaryOp> {
    use BinaryOp::*;
    Some(match sym {
        "||" => LogOr,
        "&&" => LogAnd,
        "|" => Or,
        "^" => Xor,
        "&" => And,
        "==" => Eq,
        "!=" => Ne,
        "<" => Lt,
        "<=" => Le,
        ">" => Gt,
        ">=" => Ge,
        "<<" => Shl,
        ">>" => Shr,
        "+" => Add,
        "-" => Sub,
        "*" => Mul,
        "/" => Div,
        "%" => Rem,
        _ => return None,
    })
}

/// Binding strength for precedence climbing; higher binds tighter.
pub(super) fn precedence(op: BinaryOp) -> u8 {
    use BinaryOp::*;
    match op {
        LogOr => 1,
        LogAnd => 2,
        Or => 3,
        Xor => 4,
        And => 5,
        Eq | Ne => 6,
        Lt | Le | Gt | Ge => 7,
        Shl | Shr => 8,
        Add | Sub => 9,
        Mul | Div | Rem => 10,
    }
}

impl Parser {
    fn peek_at(&self) -> Option<(&Tok, usize)> {
        self.toks.get(self.idx).map(|(t, at)| (t, *at))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(_, at)| *at)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        let at = self.here();
        match self.bump() {
            Some(t) if &t == want => Ok(()),
            _ => Err(ParseError::new(at, format!("expected {what}"))),
        }
    }

    fn ternary(&mut self) -> Result<Expr, ParseError> {
        let cond = self.binary(1)?;
        if self.peek() == Some(&Tok::Question) {
            self.bump();
            let then = self.ternary()?;
            self.expect(&Tok::Colon, "':' in conditional expression")?;
            let other = self.ternary()?;
            return Ok(Expr::Ite(Box::new(cond), Box::new(then), Box::new(other)));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(sym)) = self.peek() {
            let Some(op) = binary_from_symbol(sym) else { break };
            let prec = precedence(op);
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Op("-")) => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Some(Tok::Op("~")) => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::BitNot, Box::new(self.unary()?)))
            }
            Some(Tok::Op("!")) => {
                self.bump();
                Ok(Expr::Unary(UnaryOp::LogNot, Box::new(self.unary()?)))
            }
            Some(Tok::Op("+")) => {
                // Unary plus is accepted and dropped, as in C.
                self.bump();
                self.unary()
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.peek() == Some(&Tok::LBracket) {
            self.bump();
            let hi = self.index_literal("slice index")?;
            let lo = if self.peek() == Some(&Tok::Colon) {
                self.bump();
                self.index_literal("slice low index")?
            } else {
                hi
            };
            let at = self.here();
            self.expect(&Tok::RBracket, "']' after slice")?;
            if lo > hi {
                return Err(ParseError::new(
                    at,
                    format!("slice [{hi}:{lo}] has low index above high index"),
                ));
            }
            e = Expr::Slice(Box::new(e), hi, lo);
        }
        Ok(e)
    }

    fn index_literal(&mut self, what: &str) -> Result<u32, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Number { value, width: None }) => u32::try_from(value)
                .map_err(|_| ParseError::new(at, format!("{what} too large"))),
            _ => Err(ParseError::new(at, format!("expected integer {what}"))),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Number { value, width }) => Ok(Expr::Literal { value, width }),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.call(at, &name)
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::LParen) => {
                let e = self.ternary()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::LBrace) => {
                let mut parts = vec![self.ternary()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    parts.push(self.ternary()?);
                }
                self.expect(&Tok::RBrace, "'}' after concatenation")?;
                Ok(Expr::Concat(parts))
            }
            _ => Err(ParseError::new(at, "expected expression")),
        }
    }

    fn call(&mut self, at: usize, name: &str) -> Result<Expr, ParseError> {
        self.expect(&Tok::LParen, "'('")?;
        let e = match name {
            "zext" | "sext" => {
                let arg = self.ternary()?;
                self.expect(&Tok::Comma, format!("',' between {name} arguments").as_str())?;
                let wat = self.here();
                let width = self.index_literal("width")?;
                if !(1..=MAX_WIDTH).contains(&width) {
                    return Err(ParseError::new(
                        wat,
                        format!("extend width {width} outside 1..={MAX_WIDTH}"),
                    ));
                }
                let kind = if name == "zext" { ExtendKind::Zero } else { ExtendKind::Sign };
                Expr::Extend(kind, Box::new(arg), width)
            }
            "orr" | "andr" | "xorr" => {
                let arg = self.ternary()?;
                let op = match name {
                    "orr" => UnaryOp::RedOr,
                    "andr" => UnaryOp::RedAnd,
                    _ => UnaryOp::RedXor,
                };
                Expr::Unary(op, Box::new(arg))
            }
            "signed" | "unsigned" => {
                let arg = self.ternary()?;
                let sign = if name == "signed" { Signedness::Signed } else { Signedness::Unsigned };
                Expr::Cast(sign, Box::new(arg))
            }
            _ => return Err(ParseError::new(at, format!("unknown function '{name}'"))),
        };
        self.expect(&Tok::RParen, "')' after arguments")?;
        Ok(e)
    }
}
