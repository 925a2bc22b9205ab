//! Text forms for functions on `[0, T]` and for kernels.
//!
//! ```text
//! fn      := "poly" "(" num ("," num)* ")"
//!          | "indicator" "(" num "," num ")"
//!          | "legendre" "(" int ")"
//!          | "scale" "(" num "," fn ")"
//!          | "sum" "(" fn ("," fn)* ")"
//!          | "prod" "(" fn ("," fn)* ")"
//! num     := real | real "/" real
//!
//! kernel  := term ("+" term)*
//! term    := "term" "(" complex ("," axis)+ ")"
//! axis    := "[" complex ("," complex)* ";" complex ";" complex "]"
//! complex := real | real "i" | "i" | "-i" | real ("+" | "-") ureal "i"
//! ```
//!
//! An axis `[p0, p1, ...; a; b]` stands for `(p0 + p1 u + ...) exp(-a u² + b u)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gauss_poly::{Axis, GaussPolyFn, Term};
use crate::l2::L2Fn;

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn rest(&self) -> &'a str {
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
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return self.err("expected a name");
        }
        let s = &self.rest()[..len];
        self.pos += len;
        Ok(s)
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    /// A float literal with optional sign and exponent; no surrounding spaces
    /// are consumed after the literal.
    fn real_literal(&mut self) -> Result<f64> {
        self.skip_ws();
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            // named constants
            for (name, val) in [("pi", std::f64::consts::PI)] {
                if self.rest()[i..].starts_with(name) {
                    let sign = if bytes.first() == Some(&b'-') { -1.0 } else { 1.0 };
                    self.pos += i + name.len();
                    return Ok(sign * val);
                }
            }
            return self.err("expected a number");
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.rest()[..i];
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos += i;
                Ok(v)
            }
            Err(_) => self.err(format!("bad number `{text}`")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let v = self.real_literal()?;
        if self.eat('/') {
            let d = self.real_literal()?;
            if d == 0.0 {
                return self.err("division by zero");
            }
            return Ok(v / d);
        }
        Ok(v)
    }

    fn complex(&mut self) -> Result<C64> {
        self.skip_ws();
        let r = self.rest();
        if r.starts_with('i') {
            self.pos += 1;
            return Ok(C64::new(0.0, 1.0));
        }
        if r.starts_with("-i") {
            self.pos += 2;
            return Ok(C64::new(0.0, -1.0));
        }
        if r.starts_with("+i") {
            self.pos += 2;
            return Ok(C64::new(0.0, 1.0));
        }
        let re = self.real_literal()?;
        let r = self.rest();
        if r.starts_with('i') {
            self.pos += 1;
            return Ok(C64::new(0.0, re));
        }
        if r.starts_with('+') || r.starts_with('-') {
            let sign = if r.starts_with('-') { -1.0 } else { 1.0 };
            if r[1..].starts_with('i') {
                self.pos += 2;
                return Ok(C64::new(re, sign));
            }
            let save = self.pos;
            let im = self.real_literal()?;
            if self.rest().starts_with('i') {
                self.pos += 1;
                return Ok(C64::new(re, im));
            }
            self.pos = save;
            return self.err("imaginary part must end with `i`");
        }
        Ok(C64::new(re, 0.0))
    }
}

fn l2_expr(cur: &mut Cursor, t: f64) -> Result<L2Fn> {
    let start = cur.pos;
    let name = cur.ident()?;
    cur.expect('(')?;
    let f = match name {
        "poly" => {
            let mut coeffs = vec![cur.number()?];
            while cur.eat(',') {
                coeffs.push(cur.number()?);
            }
            L2Fn::poly(t, &coeffs)?
        }
        "indicator" => {
            let a = cur.number()?;
            cur.expect(',')?;
            let b = cur.number()?;
            if !(a < b) {
                return cur.err("indicator needs a < b");
            }
            L2Fn::indicator(t, a, b)?
        }
        "legendre" => {
            let k = cur.number()?;
            if k < 0.0 || k.fract() != 0.0 || k > 64.0 {
                return cur.err("legendre index must be an integer in 0..=64");
            }
            L2Fn::shifted_legendre(t, k as usize)?
        }
        "scale" => {
            let c = cur.number()?;
            cur.expect(',')?;
            l2_expr(cur, t)?.scale(c)
        }
        "sum" | "prod" => {
            let mut acc = l2_expr(cur, t)?;
            while cur.eat(',') {
                let next = l2_expr(cur, t)?;
                acc = if name == "sum" {
                    acc.add(&next)?
                } else {
                    acc.mul(&next)?
                };
            }
            acc
        }
        other => {
            cur.pos = start;
            return cur.err(format!("unknown function `{other}`"));
        }
    };
    cur.expect(')')?;
    let text = cur.src[start..cur.pos].trim().to_string();
    Ok(f.with_label(text))
}

/// Parses a function on `[0, t_end]`.
pub fn parse_l2(src: &str, t_end: f64) -> Result<L2Fn> {
    let mut cur = Cursor::new(src);
    let f = l2_expr(&mut cur, t_end)?;
    if !cur.at_end() {
        return cur.err("trailing input");
    }
    Ok(f)
}

fn axis(cur: &mut Cursor) -> Result<Axis> {
    cur.expect('[')?;
    let mut poly = vec![cur.complex()?];
    while cur.eat(',') {
        poly.push(cur.complex()?);
    }
    cur.expect(';')?;
    let rate = cur.complex()?;
    cur.expect(';')?;
    let shift = cur.complex()?;
    cur.expect(']')?;
    Ok(Axis::new(poly, rate, shift))
}

fn term(cur: &mut Cursor) -> Result<Term> {
    let name = cur.ident()?;
    if name != "term" {
        return cur.err(format!("expected `term`, found `{name}`"));
    }
    cur.expect('(')?;
    let coeff = cur.complex()?;
    let mut axes = Vec::new();
    while cur.eat(',') {
        axes.push(axis(cur)?);
    }
    if axes.is_empty() {
        return cur.err("a term needs at least one axis");
    }
    cur.expect(')')?;
    Ok(Term::new(coeff, axes))
}

/// Parses a kernel; the arity is taken from the first term.
pub fn parse_kernel(src: &str) -> Result<GaussPolyFn> {
    let mut cur = Cursor::new(src);
    let mut terms = vec![term(&mut cur)?];
    while cur.eat('+') {
        terms.push(term(&mut cur)?);
    }
    if !cur.at_end() {
        return cur.err("trailing input");
    }
    let arity = terms[0].axes.len();
    GaussPolyFn::new(arity, terms)
}

pub fn parse_complex(src: &str) -> Result<C64> {
    let mut cur = Cursor::new(src);
    let z = cur.complex()?;
    if !cur.at_end() {
        return cur.err("trailing input");
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let cases = [
            ("1", C64::new(1.0, 0.0)),
            ("2i", C64::new(0.0, 2.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("1+2i", C64::new(1.0, 2.0)),
            ("0.5-0.25i", C64::new(0.5, -0.25)),
            ("1e-3+2e-4i", C64::new(1e-3, 2e-4)),
            ("-1.5e2-i", C64::new(-150.0, -1.0)),
        ];
        for (s, z) in cases {
            assert_eq!(parse_complex(s).unwrap(), z, "{s}");
        }
        assert!(parse_complex("1+2").is_err());
    }

    #[test]
    fn l2_forms() {
        let f = parse_l2("sum(poly(1, 0.5), scale(2, indicator(0, 1/2)))", 1.0).unwrap();
        assert!((f.eval(0.25) - (1.125 + 2.0)).abs() < 1e-15);
        assert!((f.eval(0.75) - 1.375).abs() < 1e-15);
        let g = parse_l2("prod(legendre(1), legendre(1))", 1.0).unwrap();
        assert!((g.eval(0.0) - 1.0).abs() < 1e-15);
        assert!(parse_l2("poly(1", 1.0).is_err());
        assert!(parse_l2("cos(1)", 1.0).is_err());
        assert!(parse_l2("indicator(1, 0)", 1.0).is_err());
    }

    #[test]
    fn exact_forms_round_trip() {
        let f = parse_l2("sum(poly(1, -2, 0.125), prod(poly(3), indicator(0.25, 0.75)))", 1.0).unwrap();
        let g = parse_l2(&f.to_expr(), 1.0).unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert_eq!(f.eval(t), g.eval(t));
        }
    }

    #[test]
    fn kernels_round_trip() {
        let src = "term(1-0.5i, [1, 0+2i; 0.5; 0], [1; 1+0.1i; -0.2i]) + term(3, [0, 1; 2; 0], [1; 0.7; 0])";
        let k = parse_kernel(src).unwrap();
        assert_eq!(k.arity(), 2);
        assert_eq!(k.terms().len(), 2);
        let again = parse_kernel(&k.to_string()).unwrap();
        assert_eq!(k, again);
        assert!(parse_kernel("term(1, [1; 1; 0]) + term(1, [1; 1; 0], [1; 1; 0])").is_err());
    }
}
