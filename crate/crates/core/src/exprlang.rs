//! The small expression language used for all coordinate data.
//!
//! Grammar (no implicit multiplication, `^` right-associative and binding
//! tighter than unary minus, so `-x^2` means `-(x^2)`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' factor)?
//! base   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers are chart coordinates, the constants `pi` and `e`, or one of
//! the built-in functions `sin cos exp log sinh cosh tanh sqrt`.

use crate::error::{Error, Result};
use crate::jets::Jet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl UnaryOp {
    fn function_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    fn printed(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => { out.push((i, Tok::Plus)); i += 1; }
            '-' => { out.push((i, Tok::Minus)); i += 1; }
            '*' => { out.push((i, Tok::Star)); i += 1; }
            '/' => { out.push((i, Tok::Slash)); i += 1; }
            '^' => { out.push((i, Tok::Caret)); i += 1; }
            '(' => { out.push((i, Tok::LParen)); i += 1; }
            ')' => { out.push((i, Tok::RParen)); i += 1; }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // Optional exponent part: e.g. 1.5e-3.
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && (matches!(bytes[i + 1] as char, '0'..='9')
                        || (matches!(bytes[i + 1] as char, '+' | '-')
                            && i + 2 < bytes.len()
                            && matches!(bytes[i + 2] as char, '0'..='9')))
                {
                    i += 2;
                    while i < bytes.len() && matches!(bytes[i] as char, '0'..='9') {
                        i += 1;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push((start, Tok::Num(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [String],
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let at = self.here();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::Syntax { pos: at, msg: format!("expected {what}") }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            // `^` binds tighter than unary minus: -x^2 = -(x^2).
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        let base = self.base()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exponent = self.factor()?; // right-associative
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Number(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    let op = UnaryOp::function_name(&name)
                        .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Unary(op, Box::new(arg)))
                } else {
                    if name != "pi" && name != "e" && !self.vars.iter().any(|v| *v == name) {
                        return Err(Error::UnknownIdentifier(name));
                    }
                    Ok(Expr::Var(name))
                }
            }
            _ => Err(Error::Syntax { pos: at, msg: "expected a number, identifier or `(`".into() }),
        }
    }
}

/// Parse `src` over the given coordinate names.
pub fn parse(src: &str, vars: &[String]) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, vars, len: src.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Syntax { pos: p.here(), msg: "trailing input".into() });
    }
    Ok(e)
}

/// Evaluate an expression against named coordinate jets. All jets must share
/// one dimension; `pi` and `e` evaluate to constants of that dimension.
pub fn eval(expr: &Expr, env: &[(&str, &Jet)]) -> Result<Jet> {
    let n = env
        .first()
        .map(|(_, j)| j.dim())
        .ok_or_else(|| Error::Eval("empty evaluation environment".into()))?;
    eval_inner(expr, env, n)
}

fn eval_inner(expr: &Expr, env: &[(&str, &Jet)], n: usize) -> Result<Jet> {
    match expr {
        Expr::Number(v) => Ok(Jet::constant(*v, n)),
        Expr::Var(name) => {
            if let Some((_, j)) = env.iter().find(|(v, _)| v == name) {
                return Ok((*j).clone());
            }
            match name.as_str() {
                "pi" => Ok(Jet::constant(std::f64::consts::PI, n)),
                "e" => Ok(Jet::constant(std::f64::consts::E, n)),
                _ => Err(Error::UnknownIdentifier(name.clone())),
            }
        }
        Expr::Unary(op, a) => {
            let a = eval_inner(a, env, n)?;
            Ok(match op {
                UnaryOp::Neg => a.neg(),
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Log => a.ln()?,
                UnaryOp::Sinh => a.sinh(),
                UnaryOp::Cosh => a.cosh(),
                UnaryOp::Tanh => a.tanh(),
                UnaryOp::Sqrt => a.sqrt()?,
            })
        }
        Expr::Binary(op, a, b) => {
            let a = eval_inner(a, env, n)?;
            let b = eval_inner(b, env, n)?;
            Ok(match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => a.div(&b)?,
                BinOp::Pow => a.pow(&b)?,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Printing. The printed form reparses to a structurally identical tree.

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min: u8) -> fmt::Result {
    if child.precedence() < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => {
                if *v < 0.0 {
                    // Negative literals only arise from programmatic trees;
                    // print them parenthesized-free as a negation.
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                // The body of a unary minus is a factor: powers stay bare
                // (-x^2 reparses as -(x^2)) but sums and products need parens.
                write_child(f, a, 3)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.printed()),
            Expr::Binary(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => ("+", 1, 2),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 4),
                };
                write_child(f, a, lmin)?;
                write!(f, "{sym}")?;
                write_child(f, b, rmin)
            }
        }
    }
}
