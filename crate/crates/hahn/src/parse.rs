//! Parsing of the textual surface syntax: exact rationals, exponents
//! (scalars, parenthesized fractions, bracketed vectors), field literals
//! (`3/2`, `(1+2r)` with `r` the radical generator), matrices, and the
//! series grammar `c*t^e` terms joined by signs with a trailing accuracy
//! marker `+ O(t^e)`.
//!
//! Printing (the `Display` impls) and parsing are inverse to each other on
//! canonical forms; syntax errors carry the character offset.

use num::{BigInt, One, Zero};

use crate::coeffs::{FieldDescriptor, FieldElement};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, GroupDescriptor};
use crate::rational::Rat;
use crate::series::Series;

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            text,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::SyntaxError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn peek_raw(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        match self.peek_raw() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if self.peek_raw() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek_raw()
            .map(|c| c.is_ascii_digit())
            .unwrap_or(false)
        {
            self.bump();
        }
        if self.pos == start {
            return Err(self.error("expected digits"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<BigInt>()
            .map_err(|e| self.error(format!("bad integer `{s}`: {e}")))
    }

    /// `[-] digits [/ digits]`
    fn rational(&mut self) -> Result<Rat> {
        self.skip_ws();
        let neg = self.eat('-');
        let numer = self.digits()?;
        let denom = if self.eat('/') {
            let d = self.digits()?;
            if d.is_zero() {
                return Err(self.error("zero denominator"));
            }
            d
        } else {
            BigInt::one()
        };
        let q = Rat::new(numer, denom);
        Ok(if neg { -q } else { q })
    }

    /// A field literal: plain rational, or `(p ± q r)` over a quadratic
    /// extension (also accepts a parenthesized plain rational).
    fn field_literal(&mut self, field: &FieldDescriptor) -> Result<FieldElement> {
        if self.peek() != Some('(') {
            return Ok(field.from_rat(self.rational()?));
        }
        self.expect('(')?;
        let p = self.rational()?;
        self.skip_ws();
        match self.peek_raw() {
            Some(')') => {
                self.bump();
                Ok(field.from_rat(p))
            }
            Some(c @ ('+' | '-')) => {
                self.bump();
                let q = self.rational()?;
                self.expect('r')?;
                self.expect(')')?;
                let q = if c == '-' { -q } else { q };
                field.element(p, q)
            }
            _ => Err(self.error("expected `)`, `+` or `-` in field literal")),
        }
    }

    /// An exponent literal: `3`, `-3`, `(p/q)`, or `[q, q, ...]`.
    fn exponent(&mut self, dimension: usize) -> Result<Exponent> {
        self.skip_ws();
        let coords = match self.peek_raw() {
            Some('[') => {
                self.bump();
                let mut coords = vec![self.rational()?];
                while self.eat(',') {
                    coords.push(self.rational()?);
                }
                self.expect(']')?;
                coords
            }
            Some('(') => {
                self.bump();
                let q = self.rational()?;
                self.expect(')')?;
                vec![q]
            }
            _ => vec![self.rational()?],
        };
        if coords.len() != dimension {
            return Err(self.error(format!(
                "exponent has {} coordinates, group needs {dimension}",
                coords.len()
            )));
        }
        Ok(Exponent::new(coords))
    }

    /// `t` or `t^<exponent>`.
    fn t_part(&mut self, group: &GroupDescriptor) -> Result<Exponent> {
        self.expect('t')?;
        if self.eat('^') {
            self.exponent(group.dimension())
        } else if group.dimension() == 1 {
            Ok(Exponent::new(vec![Rat::one()]))
        } else {
            Err(self.error("bare `t` needs a one-dimensional exponent group"))
        }
    }

    /// One term: `coeff`, `t^e`, or `coeff*t^e`.
    fn term(
        &mut self,
        group: &GroupDescriptor,
        field: &FieldDescriptor,
    ) -> Result<(FieldElement, Exponent)> {
        self.skip_ws();
        if self.peek_raw() == Some('t') {
            return Ok((field.one(), self.t_part(group)?));
        }
        let coeff = self.field_literal(field)?;
        if self.eat('*') {
            let e = self.t_part(group)?;
            Ok((coeff, e))
        } else {
            Ok((coeff, group.zero()))
        }
    }

    fn series(
        &mut self,
        group: &GroupDescriptor,
        field: &FieldDescriptor,
        default_cutoff: &Exponent,
    ) -> Result<Series> {
        let mut terms: Vec<(Exponent, FieldElement)> = Vec::new();
        let mut cutoff = default_cutoff.clone();
        let mut negate = self.eat('-');
        loop {
            self.skip_ws();
            if self.peek_raw() == Some('O') {
                self.bump();
                self.expect('(')?;
                let e = self.t_part(group)?;
                self.expect(')')?;
                cutoff = e;
                break;
            }
            let (c, e) = self.term(group, field)?;
            let c = if negate { field.neg(&c) } else { c };
            if !group.contains(&e) {
                return Err(Error::LevelExceeded {
                    what: e.to_string(),
                    level: group.level(),
                });
            }
            terms.push((e, c));
            self.skip_ws();
            match self.peek_raw() {
                Some('+') => {
                    self.bump();
                    negate = false;
                }
                Some('-') => {
                    self.bump();
                    negate = true;
                }
                None => break,
                Some(c) => return Err(self.error(format!("expected `+`, `-` or end, found `{c}`"))),
            }
        }
        if !self.at_end() {
            return Err(self.error("trailing input"));
        }
        Series::from_terms(group.clone(), *field, terms, cutoff)
    }
}

/// Parse a full series literal such as `1 + 2*t^1 - (1+1r)*t^[1, 0] + O(t^8)`.
/// Exponents must lie on the group lattice; the `O(...)` marker, when
/// present, overrides the default cutoff.
pub fn parse_series(
    text: &str,
    group: &GroupDescriptor,
    field: &FieldDescriptor,
    default_cutoff: &Exponent,
) -> Result<Series> {
    Cursor::new(text).series(group, field, default_cutoff)
}

/// Parse an exact rational, consuming the whole input.
pub fn parse_rational(text: &str) -> Result<Rat> {
    let mut c = Cursor::new(text);
    let q = c.rational()?;
    if !c.at_end() {
        return Err(c.error("trailing input"));
    }
    Ok(q)
}

/// Parse an exponent literal with the given dimension.
pub fn parse_exponent(text: &str, dimension: usize) -> Result<Exponent> {
    let mut c = Cursor::new(text);
    let e = c.exponent(dimension)?;
    if !c.at_end() {
        return Err(c.error("trailing input"));
    }
    Ok(e)
}

/// Parse a field literal (`3/2` or `(1+2r)`).
pub fn parse_field_element(text: &str, field: &FieldDescriptor) -> Result<FieldElement> {
    let mut c = Cursor::new(text);
    let v = c.field_literal(field)?;
    if !c.at_end() {
        return Err(c.error("trailing input"));
    }
    Ok(v)
}

/// Parse a rational matrix literal `[[1, 1], [0, 1]]`.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<Rat>>> {
    let mut c = Cursor::new(text);
    c.expect('[')?;
    let mut rows = Vec::new();
    loop {
        c.expect('[')?;
        let mut row = vec![c.rational()?];
        while c.eat(',') {
            row.push(c.rational()?);
        }
        c.expect(']')?;
        rows.push(row);
        if !c.eat(',') {
            break;
        }
    }
    c.expect(']')?;
    if !c.at_end() {
        return Err(c.error("trailing input"));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};

    fn z() -> GroupDescriptor {
        GroupDescriptor::int_lattice(1).unwrap()
    }

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn e1(n: i64) -> Exponent {
        Exponent::new(vec![rint(n)])
    }

    #[test]
    fn basic_series() {
        let s = parse_series("1 + 2*t^1 - t^3", &z(), &q(), &e1(8)).unwrap();
        let expected = Series::from_terms(
            z(),
            q(),
            vec![
                (e1(0), q().one()),
                (e1(1), q().from_rat(rint(2))),
                (e1(3), q().from_rat(rint(-1))),
            ],
            e1(8),
        )
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn ramified_monomial() {
        let g = GroupDescriptor::rational_lattice(1, 2).unwrap();
        let s = parse_series("t^(1/2)", &g, &q(), &e1(4)).unwrap();
        assert_eq!(s.valuation().unwrap().coords()[0], rat(1, 2));

        // Off-lattice exponents are rejected.
        assert!(matches!(
            parse_series("t^(1/3)", &g, &q(), &e1(4)),
            Err(Error::LevelExceeded { .. })
        ));
    }

    #[test]
    fn syntax_error_position() {
        match parse_series("t^^2", &z(), &q(), &e1(8)) {
            Err(Error::SyntaxError { position, .. }) => assert_eq!(position, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_coefficients_and_vectors() {
        let g = GroupDescriptor::int_lattice(2).unwrap();
        let k = FieldDescriptor::quadratic(2).unwrap();
        let cutoff = Exponent::new(vec![rint(8), rint(0)]);
        let s = parse_series("1 + 2*t^(1/1)", &z(), &k, &e1(8));
        assert!(s.is_ok());
        let s = parse_series("1 + 2*t^[0, 1] - (1+1r)*t^[1, 0]", &g, &k, &cutoff).unwrap();
        assert_eq!(
            s.coeff(&Exponent::new(vec![rint(1), rint(0)])),
            k.element(rint(-1), rint(-1)).unwrap()
        );
        // Radical literals are rejected over the plain rationals.
        assert!(parse_series("(1+1r)", &z(), &q(), &e1(8)).is_err());
    }

    #[test]
    fn o_marker_sets_cutoff() {
        let s = parse_series("1 + t^1 + O(t^3)", &z(), &q(), &e1(8)).unwrap();
        assert_eq!(s.cutoff(), &e1(3));
        let zero = parse_series("0 + O(t^5)", &z(), &q(), &e1(8)).unwrap();
        assert!(zero.is_zero());
        assert_eq!(zero.cutoff(), &e1(5));
    }

    #[test]
    fn print_parse_round_trip() {
        let g = GroupDescriptor::rational_lattice(1, 2).unwrap();
        let s = Series::from_terms(
            g.clone(),
            q(),
            vec![
                (Exponent::new(vec![rat(-1, 2)]), q().from_rat(rint(2))),
                (Exponent::new(vec![rint(0)]), q().from_rat(rat(-3, 2))),
                (Exponent::new(vec![rat(5, 2)]), q().one()),
            ],
            Exponent::new(vec![rint(4)]),
        )
        .unwrap();
        let printed = s.to_string();
        let reparsed = parse_series(&printed, &g, &q(), &Exponent::new(vec![rint(9)])).unwrap();
        assert_eq!(s, reparsed);

        let k = FieldDescriptor::quadratic(-1).unwrap();
        let g2 = GroupDescriptor::int_lattice(2).unwrap();
        let s = Series::from_terms(
            g2.clone(),
            k,
            vec![
                (
                    Exponent::new(vec![rint(0), rint(-3)]),
                    k.element(rint(0), rat(1, 3)).unwrap(),
                ),
                (
                    Exponent::new(vec![rint(1), rint(2)]),
                    k.element(rat(-1, 2), rint(5)).unwrap(),
                ),
            ],
            Exponent::new(vec![rint(2), rint(0)]),
        )
        .unwrap();
        let reparsed = parse_series(
            &s.to_string(),
            &g2,
            &k,
            &Exponent::new(vec![rint(9), rint(9)]),
        )
        .unwrap();
        assert_eq!(s, reparsed);
    }

    #[test]
    fn scalar_parsers() {
        assert_eq!(parse_rational("-7/3").unwrap(), rat(-7, 3));
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_exponent("[1, -2/3]", 2).unwrap().coords()[1], rat(-2, 3));
        assert!(parse_exponent("[1]", 2).is_err());
        let m = parse_matrix("[[1, 1/2], [0, 1]]").unwrap();
        assert_eq!(m[0][1], rat(1, 2));
        let k = FieldDescriptor::quadratic(5).unwrap();
        assert_eq!(
            parse_field_element("(1-2r)", &k).unwrap(),
            k.element(rint(1), rint(-2)).unwrap()
        );
    }
}
