//! Expression mini-language for closed-form oracles.
//!
//! Grammar: numeric literals, variables `x1..xd`, unary minus, binary
//! `+ - * / ^`, the functions `exp log sin cos`, and parentheses. `^` is
//! right-associative and binds tightest, then unary minus, then `* /`,
//! then `+ -`, so `2^3^2 = 512` and `-x1^2 = -(x1^2)`.
//!
//! Evaluation is complex-valued: `log` is the principal branch and powers
//! with non-integer exponents go through exp/log. All errors carry the byte
//! offset they were detected at.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

/// Abstract syntax tree. Numeric literals are non-negative by construction;
/// negative constants appear as `Neg(Num(_))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 0-based variable index; `x1` is `Var(0)`.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// A parsed expression together with the variable dimension it was declared
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    dim: usize,
    root: Expr,
}

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
    Comma,
}

struct Lexer<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(usize, Token)>> {
        let mut lx = Lexer { text: text.as_bytes(), pos: 0 };
        let mut tokens = Vec::new();
        while let Some((off, tok)) = lx.next_token()? {
            tokens.push((off, tok));
        }
        Ok(tokens)
    }

    fn next_token(&mut self) -> Result<Option<(usize, Token)>> {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.text.len() {
            return Ok(None);
        }
        let start = self.pos;
        let b = self.text[start];
        let tok = match b {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b',' => Token::Comma,
            b'0'..=b'9' | b'.' => {
                return self.lex_number(start).map(Some);
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                while self.pos < self.text.len()
                    && (self.text[self.pos].is_ascii_alphanumeric())
                {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.text[start..self.pos])
                    .expect("ascii alnum slice");
                return Ok(Some((start, Token::Ident(s.to_string()))));
            }
            other => {
                return Err(Error::parse(
                    start,
                    format!("unexpected character {:?}", other as char),
                ));
            }
        };
        self.pos += 1;
        Ok(Some((start, tok)))
    }

    fn lex_number(&mut self, start: usize) -> Result<(usize, Token)> {
        let mut saw_digit = false;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
            saw_digit = true;
        }
        if self.pos < self.text.len() && self.text[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                self.pos += 1;
                saw_digit = true;
            }
        }
        if !saw_digit {
            return Err(Error::parse(start, "malformed number"));
        }
        if self.pos < self.text.len() && matches!(self.text[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.text.len() && matches!(self.text[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. "2e" followed by junk);
                // leave the identifier to the next token.
                self.pos = mark;
            }
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii number slice");
        let v: f64 = s
            .parse()
            .map_err(|_| Error::parse(start, format!("malformed number {s:?}")))?;
        Ok((start, Token::Num(v)))
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.peek().map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some((_, tok)) = self.peek() {
            let op = match tok {
                Token::Plus => true,
                Token::Minus => false,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            lhs = if op {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some((_, tok)) = self.peek() {
            let mul = match tok {
                Token::Star => true,
                Token::Slash => false,
                _ => break,
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = if mul {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some((_, Token::Minus)) = self.peek() {
            self.advance();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some((_, Token::Caret)) = self.peek() {
            self.advance();
            // Right-associative; the exponent may start with unary minus.
            let exponent = self.unary_in_exponent()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary_in_exponent(&mut self) -> Result<Expr> {
        if let Some((_, Token::Minus)) = self.peek() {
            self.advance();
            let inner = self.unary_in_exponent()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        let Some((off, tok)) = self.advance() else {
            return Err(Error::parse(offset, "expected expression, found end of input"));
        };
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Ident(name) => self.ident(off, &name),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            other => Err(Error::parse(off, format!("unexpected token {other:?}"))),
        }
    }

    fn ident(&mut self, off: usize, name: &str) -> Result<Expr> {
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let idx: usize = rest
                    .parse()
                    .map_err(|_| Error::parse(off, format!("bad variable index in {name:?}")))?;
                if idx == 0 || idx > self.dim {
                    return Err(Error::parse(
                        off,
                        format!("variable {name} out of range for dimension {}", self.dim),
                    ));
                }
                return Ok(Expr::Var(idx - 1));
            }
        }
        let func = match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => {
                return Err(Error::parse(off, format!("unknown identifier {name:?}")));
            }
        };
        match self.advance() {
            Some((_, Token::LParen)) => {}
            other => {
                let at = other.map(|(o, _)| o).unwrap_or(self.end);
                return Err(Error::parse(at, format!("{name} requires parentheses")));
            }
        }
        let arg = self.expr()?;
        if let Some((off_c, Token::Comma)) = self.peek() {
            return Err(Error::parse(
                *off_c,
                format!("{name} takes exactly one argument"),
            ));
        }
        self.expect_rparen()?;
        Ok(Expr::Call(func, Box::new(arg)))
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.advance() {
            Some((_, Token::RParen)) => Ok(()),
            Some((off, tok)) => Err(Error::parse(off, format!("expected ')', found {tok:?}"))),
            None => Err(Error::parse(self.end, "expected ')', found end of input")),
        }
    }
}

/// Parse `text` against `dim` variables.
pub fn parse_expression(text: &str, dim: usize) -> Result<Expression> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let tokens = Lexer::tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0, end: text.len(), dim };
    let root = parser.expr()?;
    if let Some((off, tok)) = parser.peek() {
        return Err(Error::parse(*off, format!("trailing input starting with {tok:?}")));
    }
    Ok(Expression { dim, root })
}

impl Expression {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn from_ast(dim: usize, root: Expr) -> Self {
        Self { dim, root }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(eval_node(&self.root, x))
    }

    /// Canonical text form; parsing it back yields an identical AST.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        print_node(&self.root, &mut out);
        out
    }
}

fn eval_node(e: &Expr, x: &[f64]) -> Complex64 {
    match e {
        Expr::Num(v) => Complex64::new(*v, 0.0),
        Expr::Var(i) => Complex64::new(x[*i], 0.0),
        Expr::Neg(a) => -eval_node(a, x),
        Expr::Add(a, b) => eval_node(a, x) + eval_node(b, x),
        Expr::Sub(a, b) => eval_node(a, x) - eval_node(b, x),
        Expr::Mul(a, b) => eval_node(a, x) * eval_node(b, x),
        Expr::Div(a, b) => eval_node(a, x) / eval_node(b, x),
        Expr::Pow(a, b) => complex_pow(eval_node(a, x), eval_node(b, x)),
        Expr::Call(f, a) => {
            let v = eval_node(a, x);
            match f {
                Func::Exp => v.exp(),
                Func::Log => v.ln(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
            }
        }
    }
}

/// Power with exact handling of small integer exponents; everything else is
/// the principal complex power.
fn complex_pow(base: Complex64, exponent: Complex64) -> Complex64 {
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= 64.0 {
        return base.powi(exponent.re as i32);
    }
    if base.im == 0.0 && exponent.im == 0.0 && base.re > 0.0 {
        return Complex64::new(base.re.powf(exponent.re), 0.0);
    }
    base.powc(exponent)
}

fn print_node(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(v) => out.push_str(&format!("{v:?}")),
        Expr::Var(i) => out.push_str(&format!("x{}", i + 1)),
        Expr::Neg(a) => {
            out.push_str("(-");
            print_node(a, out);
            out.push(')');
        }
        Expr::Add(a, b) => print_binary(a, '+', b, out),
        Expr::Sub(a, b) => print_binary(a, '-', b, out),
        Expr::Mul(a, b) => print_binary(a, '*', b, out),
        Expr::Div(a, b) => print_binary(a, '/', b, out),
        Expr::Pow(a, b) => print_binary(a, '^', b, out),
        Expr::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            print_node(a, out);
            out.push(')');
        }
    }
}

fn print_binary(a: &Expr, op: char, b: &Expr, out: &mut String) {
    out.push('(');
    print_node(a, out);
    out.push(op);
    print_node(b, out);
    out.push(')');
}
