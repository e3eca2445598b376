//! Infix parser for expressions and region predicates.
//!
//! ```text
//! pred  := conj ("||" conj)*
//! conj  := atom_p ("&&" atom_p)*
//! atom_p:= expr ("<" | ">" | "!=") expr | "(" pred ")"
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := primary ("^" ["-"] integer)?
//! primary := number | name | func "(" args ")" | "(" expr ")"
//! ```
//! Functions: `sin`, `cos`, `exp`, `pow(e, n)`; constant `pi`.

use crate::error::{Error, Result};
use crate::liecalc::expr::{CmpOp, Expr, Predicate};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
}

fn err(pos: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        message: message.into(),
    }
}

/// Tokens with 1-based column positions.
fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    const OPS: [&str; 13] = ["&&", "||", "!=", "<", ">", "+", "-", "*", "/", "^", "(", ")", ","];
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| err(col, format!("bad number '{text}'")))?;
            out.push((Tok::Num(v), col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        for op in OPS {
            let len = op.len();
            if i + len <= chars.len() && chars[i..i + len].iter().copied().eq(op.chars()) {
                out.push((Tok::Op(op), col));
                i += len;
                continue 'outer;
            }
        }
        return Err(err(col, format!("unexpected character '{c}'")));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &str, vars: &'a [String]) -> Result<Self> {
        Ok(Self {
            toks: lex(src)?,
            pos: 0,
            vars,
            end_col: src.chars().count() + 1,
        })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Op(o)) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: &str) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(err(self.col(), format!("expected '{op}'")))
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return Err(err(self.col(), "unexpected trailing input"));
        }
        Ok(())
    }

    fn predicate(&mut self) -> Result<Predicate> {
        let mut p = self.conjunction()?;
        while self.eat("||") {
            p = Predicate::Or(Box::new(p), Box::new(self.conjunction()?));
        }
        Ok(p)
    }

    fn conjunction(&mut self) -> Result<Predicate> {
        let mut p = self.atom_predicate()?;
        while self.eat("&&") {
            p = Predicate::And(Box::new(p), Box::new(self.atom_predicate()?));
        }
        Ok(p)
    }

    fn atom_predicate(&mut self) -> Result<Predicate> {
        let save = self.pos;
        match self.comparison() {
            Ok(p) => Ok(p),
            Err(e) => {
                self.pos = save;
                if self.eat("(") {
                    if let Ok(p) = self.predicate() {
                        if self.eat(")") {
                            return Ok(p);
                        }
                    }
                }
                Err(e)
            }
        }
    }

    fn comparison(&mut self) -> Result<Predicate> {
        let lhs = self.expr()?;
        let op = if self.eat("<") {
            CmpOp::Lt
        } else if self.eat(">") {
            CmpOp::Gt
        } else if self.eat("!=") {
            CmpOp::Ne
        } else {
            return Err(err(self.col(), "expected a comparison '<', '>' or '!='"));
        };
        let rhs = self.expr()?;
        Ok(Predicate::Cmp(lhs, op, rhs))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat("+") {
                e = e + self.term()?;
            } else if self.eat("-") {
                e = e - self.term()?;
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat("*") {
                e = e * self.unary()?;
            } else if self.eat("/") {
                e = e / self.unary()?;
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat("-") {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn integer(&mut self) -> Result<i32> {
        let neg = self.eat("-");
        let col = self.col();
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= 64.0 => {
                let v = *v as i32;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => Err(err(col, "exponent must be an integer literal with |n| ≤ 64")),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat("^") {
            let n = if self.eat("(") {
                let n = self.integer()?;
                self.expect(")")?;
                n
            } else {
                self.integer()?
            };
            return Ok(base.powi(n));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        self.expect("(")?;
                        let a = self.expr()?;
                        self.expect(")")?;
                        Ok(match name.as_str() {
                            "sin" => a.sin(),
                            "cos" => a.cos(),
                            _ => a.exp(),
                        })
                    }
                    "pow" => {
                        self.expect("(")?;
                        let a = self.expr()?;
                        self.expect(",")?;
                        let n = self.integer()?;
                        self.expect(")")?;
                        Ok(a.powi(n))
                    }
                    _ => Err(err(col, format!("unknown name '{name}'"))),
                }
            }
            Some(Tok::Op("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => Err(err(col, "expected a number, name or '('")),
        }
    }
}

fn owned(vars: &[impl AsRef<str>]) -> Vec<String> {
    vars.iter().map(|v| v.as_ref().to_string()).collect()
}

/// `x1, …, xn`.
pub fn default_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

pub fn parse_expr(src: &str, vars: &[impl AsRef<str>]) -> Result<Expr> {
    let vars = owned(vars);
    let mut p = Parser::new(src, &vars)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_predicate(src: &str, vars: &[impl AsRef<str>]) -> Result<Predicate> {
    let vars = owned(vars);
    let mut p = Parser::new(src, &vars)?;
    let e = p.predicate()?;
    p.finish()?;
    Ok(e)
}
