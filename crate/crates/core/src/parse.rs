//! Text syntax for [`FunctionExpr`].
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*        divisor must be constant
//! unary   := ('-' | '+') unary | power
//! power   := compose ('^' integer)?
//! compose := atom (('∘' | '@') atom)*          f∘g substitutes g for z in f
//! atom    := number | number 'i' | 'z' | name | name '(' expr (',' expr)* ')'
//!          | '(' expr ')'
//! ```
//!
//! Functions: `exp`, `sin`, `cos`, `sinh`, `cosh` (one argument) and
//! `poly(c0, c1, ..)`, the polynomial `c0 + c1 z + ..` with constant
//! arguments. Names other than `z` are looked up in the caller's bindings,
//! then in the built-ins `i`, `pi` and `e`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::complex::{c64, real, C64};
use crate::error::{Error, Result};
use crate::funcexpr::FunctionExpr;
use crate::polynomial::Polynomial;

pub type Bindings = BTreeMap<String, C64>;

pub fn parse(text: &str) -> Result<FunctionExpr> {
    parse_with(text, &Bindings::new())
}

pub fn parse_with(text: &str, bindings: &Bindings) -> Result<FunctionExpr> {
    let mut p = Parser { src: text, pos: 0, bindings };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    bindings: &'a Bindings,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<FunctionExpr> {
        let mut items = vec![self.term()?];
        loop {
            if self.eat('+') {
                items.push(self.term()?);
            } else if self.eat('-') {
                items.push(FunctionExpr::scaled(real(-1.0), self.term()?));
            } else {
                break;
            }
        }
        Ok(FunctionExpr::sum(items))
    }

    fn term(&mut self) -> Result<FunctionExpr> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.peek() == Some('/') {
                let at = self.pos;
                self.pos += 1;
                match self.unary()? {
                    FunctionExpr::Const(c) if c != C64::new(0.0, 0.0) => {
                        factors.push(FunctionExpr::Const(c.inv()))
                    }
                    _ => {
                        return Err(Error::Parse {
                            pos: at,
                            msg: "division only by nonzero constants".to_string(),
                        })
                    }
                }
            } else {
                break;
            }
        }
        Ok(FunctionExpr::product(factors))
    }

    fn unary(&mut self) -> Result<FunctionExpr> {
        if self.eat('-') {
            return Ok(FunctionExpr::scaled(real(-1.0), self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<FunctionExpr> {
        let base = self.compose()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        let digits: String = self.rest().chars().take_while(|c| c.is_ascii_digit()).collect();
        let n: usize = digits
            .parse()
            .map_err(|_| Error::Parse { pos: at, msg: "expected a nonnegative integer exponent".to_string() })?;
        if n > 64 {
            return Err(Error::Parse { pos: at, msg: "exponent above 64".to_string() });
        }
        self.pos += digits.len();
        Ok(match base {
            FunctionExpr::Const(c) => FunctionExpr::Const(c.powu(n as u32)),
            other => FunctionExpr::poly(Polynomial::monomial(n, real(1.0)), other),
        })
    }

    fn compose(&mut self) -> Result<FunctionExpr> {
        let mut f = self.atom()?;
        while self.eat('∘') || self.eat('@') {
            let g = self.atom()?;
            f = substitute(&f, &g);
        }
        Ok(f)
    }

    fn number(&mut self) -> Result<C64> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let value: f64 = self.src[start..end]
            .parse()
            .map_err(|_| self.err("malformed number"))?;
        self.pos = end;
        // `2i`, but not the start of an identifier such as `2in`
        let mut chars = self.rest().chars();
        if chars.next() == Some('i') && !chars.next().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.pos += 1;
            return Ok(c64(0.0, value));
        }
        Ok(real(value))
    }

    fn ident(&mut self) -> String {
        let name: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        self.pos += name.len();
        name
    }

    fn atom(&mut self) -> Result<FunctionExpr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(FunctionExpr::Const(self.number()?)),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let at = self.pos;
                let name = self.ident();
                if self.peek() == Some('(') {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    return call(&name, args, at);
                }
                if name == "z" {
                    return Ok(FunctionExpr::z());
                }
                if let Some(&c) = self.bindings.get(&name) {
                    return Ok(FunctionExpr::Const(c));
                }
                match name.as_str() {
                    "i" => Ok(FunctionExpr::Const(c64(0.0, 1.0))),
                    "pi" => Ok(FunctionExpr::Const(real(core::f64::consts::PI))),
                    "e" => Ok(FunctionExpr::Const(real(core::f64::consts::E))),
                    _ => Err(Error::Parse { pos: at, msg: format!("unknown name '{name}'") }),
                }
            }
            Some(c) => Err(self.err(&format!("unexpected character '{c}'"))),
        }
    }
}

fn call(name: &str, mut args: Vec<FunctionExpr>, at: usize) -> Result<FunctionExpr> {
    let err = |msg: String| Error::Parse { pos: at, msg };
    if name == "poly" {
        let coeffs = args
            .into_iter()
            .map(|a| match a {
                FunctionExpr::Const(c) => Ok(c),
                _ => Err(err("poly() takes constant coefficients".to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(FunctionExpr::poly(Polynomial::new(coeffs), FunctionExpr::z()));
    }
    if args.len() != 1 {
        return Err(err(format!("{name}() takes one argument")));
    }
    let x = args.pop().unwrap();
    let neg = || FunctionExpr::scaled(real(-1.0), x.clone());
    Ok(match name {
        "exp" => FunctionExpr::exp(x),
        "sin" => FunctionExpr::sin(x),
        "cos" => FunctionExpr::cos(x),
        "cosh" => FunctionExpr::scaled(
            real(0.5),
            FunctionExpr::sum(vec![FunctionExpr::exp(x.clone()), FunctionExpr::exp(neg())]),
        ),
        "sinh" => FunctionExpr::scaled(
            real(0.5),
            FunctionExpr::sum(vec![
                FunctionExpr::exp(x.clone()),
                FunctionExpr::scaled(real(-1.0), FunctionExpr::exp(neg())),
            ]),
        ),
        _ => return Err(err(format!("unknown function '{name}'"))),
    })
}

/// `f∘g`: replaces the variable of `f` by `g`. Affine `g` is kept as a
/// composition node.
pub fn substitute(f: &FunctionExpr, g: &FunctionExpr) -> FunctionExpr {
    use FunctionExpr::*;
    if let Affine { a, b } = g {
        return FunctionExpr::compose_affine(f.clone(), *a, *b);
    }
    match f {
        Const(c) => Const(*c),
        Affine { a, b } => FunctionExpr::sum(vec![FunctionExpr::scaled(*a, g.clone()), Const(*b)]),
        Exp(h) => FunctionExpr::exp(substitute(h, g)),
        Sin(h) => FunctionExpr::sin(substitute(h, g)),
        Cos(h) => FunctionExpr::cos(substitute(h, g)),
        Poly(p, h) => FunctionExpr::poly(p.clone(), substitute(h, g)),
        Sum(items) => FunctionExpr::sum(items.iter().map(|h| substitute(h, g)).collect()),
        Product(items) => FunctionExpr::product(items.iter().map(|h| substitute(h, g)).collect()),
        Scale(c, h) => FunctionExpr::scaled(*c, substitute(h, g)),
        Compose { outer, a, b } => {
            let inner = FunctionExpr::sum(vec![FunctionExpr::scaled(*a, g.clone()), Const(*b)]);
            substitute(outer, &inner)
        }
    }
}
