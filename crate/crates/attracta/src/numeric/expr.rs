//! Arithmetic expression grammar for config files.
//!
//! Supports `+ - * / ^`, parentheses, unary minus, the constants `pi` and
//! `e`, the functions `sin cos tan exp ln sqrt abs tanh`, and variables:
//! `t` for rate expressions, `x1..xs` for nonlinearity components.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Index into the evaluation bindings.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Tanh,
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
        };
        f.write_str(s)
    }
}

impl Expr {
    /// Parse `src` against a list of allowed variable names; `Var(i)` refers
    /// to `vars[i]`.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Config(format!(
                "unexpected trailing input in expression `{src}`"
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, bindings: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => bindings[*i],
            Expr::Neg(e) => -e.eval(bindings),
            Expr::Add(a, b) => a.eval(bindings) + b.eval(bindings),
            Expr::Sub(a, b) => a.eval(bindings) - b.eval(bindings),
            Expr::Mul(a, b) => a.eval(bindings) * b.eval(bindings),
            Expr::Div(a, b) => a.eval(bindings) / b.eval(bindings),
            Expr::Pow(a, b) => a.eval(bindings).powf(b.eval(bindings)),
            Expr::Call(f, e) => {
                let v = e.eval(bindings);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                    Func::Tanh => v.tanh(),
                }
            }
        }
    }

    /// Which variables actually appear; drives the dependency mask used to
    /// skip delay integrals over coordinates a component ignores.
    pub fn used_vars(&self, mark: &mut [bool]) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(i) => mark[*i] = true,
            Expr::Neg(e) | Expr::Call(_, e) => e.used_vars(mark),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.used_vars(mark);
                b.used_vars(mark);
            }
        }
    }
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
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2;
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::Config(format!("bad number `{text}`")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_alphanumeric() || d == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            _ => {
                return Err(Error::Config(format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Plus => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Star => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Token::Slash => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    // right-associative power binds tighter than unary minus on the left
    fn factor(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Config("missing `)`".into())),
                }
            }
            Some(Token::Ident(name)) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "tan" => Some(Func::Tan),
                    "exp" => Some(Func::Exp),
                    "ln" | "log" => Some(Func::Ln),
                    "sqrt" => Some(Func::Sqrt),
                    "abs" => Some(Func::Abs),
                    "tanh" => Some(Func::Tanh),
                    _ => None,
                };
                if let Some(f) = func {
                    match self.bump() {
                        Some(Token::LParen) => {
                            let arg = self.expr()?;
                            match self.bump() {
                                Some(Token::RParen) => Ok(Expr::Call(f, Box::new(arg))),
                                _ => Err(Error::Config(format!("missing `)` after {f}(..."))),
                            }
                        }
                        _ => Err(Error::Config(format!("{f} must be called as {f}(...)"))),
                    }
                } else if name == "pi" {
                    Ok(Expr::Num(std::f64::consts::PI))
                } else if name == "e" {
                    Ok(Expr::Num(std::f64::consts::E))
                } else if let Some(idx) = self.vars.iter().position(|v| *v == name) {
                    Ok(Expr::Var(idx))
                } else {
                    Err(Error::Config(format!("unknown identifier `{name}`")))
                }
            }
            other => Err(Error::Config(format!("unexpected token {other:?}"))),
        }
    }
}
