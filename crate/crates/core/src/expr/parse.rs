//! Recursive-descent parser for real and complex expressions.
//!
//! Grammar (both flavours):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! Integer literals are exact, so `3/2` is the rational three halves.

use num_complex::Complex64;
use num_rational::Rational64;

use super::complex::ComplexExpr;
use super::scalar::ScalarExpr;
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Dec(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_digit()) {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let mut decimal = false;
            if i < bytes.len() && bytes[i] == b'.' {
                decimal = true;
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let save = i;
                i += 1;
                if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    decimal = true;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text = &src[start..i];
            let tok = if decimal {
                Tok::Dec(text.parse::<f64>().map_err(|_| ExprError::Parse {
                    pos: start,
                    message: format!("bad number '{text}'"),
                })?)
            } else {
                match text.parse::<i64>() {
                    Ok(v) => Tok::Int(v),
                    Err(_) => Tok::Dec(text.parse::<f64>().unwrap_or(f64::INFINITY)),
                }
            };
            out.push((tok, start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
            continue;
        }
        return Err(ExprError::Parse {
            pos: i,
            message: format!("unexpected character '{c}'"),
        });
    }
    Ok(out)
}

/// Operations a parse target must provide.
trait Target: Sized + Clone {
    fn int(v: i64) -> Self;
    fn dec(v: f64) -> Self;
    fn ident(name: &str, pos: usize) -> Result<Self, ExprError>;
    fn add(a: Self, b: Self) -> Self;
    fn sub(a: Self, b: Self) -> Self;
    fn mul(a: Self, b: Self) -> Self;
    fn div(a: Self, b: Self) -> Self;
    fn neg(a: Self) -> Self;
    fn pow(a: Self, b: Self, pos: usize) -> Result<Self, ExprError>;
    fn call(name: &str, args: Vec<Self>, pos: usize) -> Result<Self, ExprError>;
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    at: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ExprError::Parse {
                pos: self.pos(),
                message: format!("expected '{c}'"),
            })
        }
    }

    fn sum<T: Target>(&mut self) -> Result<T, ExprError> {
        let mut acc = self.product::<T>()?;
        loop {
            if self.eat('+') {
                acc = T::add(acc, self.product()?);
            } else if self.eat('-') {
                acc = T::sub(acc, self.product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product<T: Target>(&mut self) -> Result<T, ExprError> {
        let mut acc = self.unary::<T>()?;
        loop {
            if self.eat('*') {
                acc = T::mul(acc, self.unary()?);
            } else if self.eat('/') {
                acc = T::div(acc, self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary<T: Target>(&mut self) -> Result<T, ExprError> {
        if self.eat('-') {
            return Ok(T::neg(self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power<T: Target>(&mut self) -> Result<T, ExprError> {
        let base = self.atom::<T>()?;
        if self.peek() == Some(&Tok::Sym('^')) {
            let pos = self.pos();
            self.at += 1;
            let e = self.unary::<T>()?;
            return T::pow(base, e, pos);
        }
        Ok(base)
    }

    fn atom<T: Target>(&mut self) -> Result<T, ExprError> {
        let pos = self.pos();
        let tok = self.peek().cloned().ok_or(ExprError::Parse {
            pos,
            message: "unexpected end of input".into(),
        })?;
        self.at += 1;
        match tok {
            Tok::Int(v) => Ok(T::int(v)),
            Tok::Dec(v) => Ok(T::dec(v)),
            Tok::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.eat('(') {
                    let mut args = vec![self.sum()?];
                    while self.eat(',') {
                        args.push(self.sum()?);
                    }
                    self.expect(')')?;
                    T::call(&name, args, pos)
                } else {
                    T::ident(&name, pos)
                }
            }
            Tok::Sym(c) => Err(ExprError::Parse {
                pos,
                message: format!("unexpected '{c}'"),
            }),
        }
    }
}

fn run<T: Target>(src: &str) -> Result<T, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks: &toks,
        at: 0,
        end: src.len(),
    };
    let e = p.sum::<T>()?;
    if p.at != toks.len() {
        return Err(ExprError::Parse {
            pos: p.pos(),
            message: "trailing input".into(),
        });
    }
    Ok(e)
}

fn arity(name: &str, args: &[impl Sized], n: usize, pos: usize) -> Result<(), ExprError> {
    if args.len() != n {
        return Err(ExprError::Parse {
            pos,
            message: format!("{name} takes {n} argument(s), got {}", args.len()),
        });
    }
    Ok(())
}

/// Rational approximation of a float exponent, when it is a short fraction.
fn small_fraction(v: f64) -> Option<Rational64> {
    for den in 1..=1000i64 {
        let n = v * den as f64;
        if (n - n.round()).abs() < 1e-12 * den as f64 && n.abs() < 1e12 {
            return Some(Rational64::new(n.round() as i64, den));
        }
    }
    None
}

impl Target for ScalarExpr {
    fn int(v: i64) -> Self {
        ScalarExpr::int(v)
    }
    fn dec(v: f64) -> Self {
        ScalarExpr::constant(v)
    }
    fn ident(name: &str, pos: usize) -> Result<Self, ExprError> {
        match name {
            "x1" => Ok(ScalarExpr::x1()),
            "x2" => Ok(ScalarExpr::x2()),
            "pi" => Ok(ScalarExpr::constant(std::f64::consts::PI)),
            _ => Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            }),
        }
    }
    fn add(a: Self, b: Self) -> Self {
        a + b
    }
    fn sub(a: Self, b: Self) -> Self {
        a - b
    }
    fn mul(a: Self, b: Self) -> Self {
        a * b
    }
    fn div(a: Self, b: Self) -> Self {
        a / b
    }
    fn neg(a: Self) -> Self {
        -a
    }
    fn pow(a: Self, b: Self, _pos: usize) -> Result<Self, ExprError> {
        if let Some(r) = b.as_rational() {
            return Ok(a.powr(r));
        }
        if let Some(v) = b.as_constant() {
            if let Some(r) = small_fraction(v) {
                return Ok(a.powr(r));
            }
        }
        Ok((b * a.ln()).exp())
    }
    fn call(name: &str, args: Vec<Self>, pos: usize) -> Result<Self, ExprError> {
        let one = |f: fn(&ScalarExpr) -> ScalarExpr| -> Result<ScalarExpr, ExprError> {
            arity(name, &args, 1, pos)?;
            Ok(f(&args[0]))
        };
        match name {
            "exp" => one(ScalarExpr::exp),
            "ln" => one(ScalarExpr::ln),
            "sin" => one(ScalarExpr::sin),
            "cos" => one(ScalarExpr::cos),
            "sinh" => one(ScalarExpr::sinh),
            "cosh" => one(ScalarExpr::cosh),
            "sqrt" => one(ScalarExpr::sqrt),
            "cbrt" => one(ScalarExpr::cbrt),
            "atan2" => {
                arity(name, &args, 2, pos)?;
                Ok(ScalarExpr::atan2(&args[0], &args[1]))
            }
            _ => Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            }),
        }
    }
}

impl Target for ComplexExpr {
    fn int(v: i64) -> Self {
        ComplexExpr::real(v as f64)
    }
    fn dec(v: f64) -> Self {
        ComplexExpr::real(v)
    }
    fn ident(name: &str, pos: usize) -> Result<Self, ExprError> {
        match name {
            "z" => Ok(ComplexExpr::z()),
            "i" => Ok(ComplexExpr::i()),
            "pi" => Ok(ComplexExpr::real(std::f64::consts::PI)),
            _ => Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            }),
        }
    }
    fn add(a: Self, b: Self) -> Self {
        a + b
    }
    fn sub(a: Self, b: Self) -> Self {
        a - b
    }
    fn mul(a: Self, b: Self) -> Self {
        a * b
    }
    fn div(a: Self, b: Self) -> Self {
        a / b
    }
    fn neg(a: Self) -> Self {
        a.neg()
    }
    fn pow(a: Self, b: Self, _pos: usize) -> Result<Self, ExprError> {
        match b.as_constant() {
            Some(c) if c.im == 0.0 => Ok(a.powf(c.re)),
            Some(c) => Ok((ComplexExpr::constant(c) * a.ln()).exp()),
            None => Ok((b * a.ln()).exp()),
        }
    }
    fn call(name: &str, args: Vec<Self>, pos: usize) -> Result<Self, ExprError> {
        match name {
            "exp" | "ln" | "sqrt" => {
                arity(name, &args, 1, pos)?;
                let a = &args[0];
                Ok(match name {
                    "exp" => a.exp(),
                    "ln" => a.ln(),
                    _ => a.powf(0.5),
                })
            }
            _ => Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            }),
        }
    }
}

/// Parse a real expression in `x1`, `x2`.
pub fn parse_scalar(src: &str) -> Result<ScalarExpr, ExprError> {
    run::<ScalarExpr>(src)
}

/// Parse an analytic expression in `z` (with `i` the imaginary unit).
pub fn parse_complex(src: &str) -> Result<ComplexExpr, ExprError> {
    run::<ComplexExpr>(src)
}

/// Parse a complex constant such as `2`, `1.5-0.5*i`.
pub fn parse_complex_constant(src: &str) -> Result<Complex64, ExprError> {
    let e = parse_complex(src)?;
    e.as_constant().ok_or(ExprError::Parse {
        pos: 0,
        message: format!("'{src}' is not a constant"),
    })
}
