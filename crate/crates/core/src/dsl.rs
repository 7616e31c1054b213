//! A small expression language for pulse sequences.
//!
//! ```text
//! expr    := atom ( "[" expr "]" )*
//! atom    := literal | proj | name [ "(" int ")" ] | "cpdd{" int "," int "," int "}"
//! literal := [IXYZ]+            (last-applied pulse leftmost)
//! proj    := "px" | "py" | "pz"
//! name    := "cdd" | "ga8" | "oudd" | "pdd" | "ga8a" | "ga8b"
//! ```
//!
//! Keywords are case-insensitive. `A[B]` concatenates with `A` outer, so
//! `px[py[pz]]` is `p_x[p_y[p_z]]`. `pdd`, `ga8a` and `ga8b` take no
//! parameter; `cdd`, `ga8` and `oudd` require one.

use std::fmt;

use thiserror::Error;

use crate::pauli::PauliAxis;
use crate::sequence::{self, CpddClass, PulseSequence, SequenceError};

/// Inclusive parameter ranges of the parameterized schemes.
pub const CDD_LEVELS: (u32, u32) = (1, 6);
pub const GA8_LEVELS: (u32, u32) = (1, 4);
pub const OUDD_ORDERS: (u32, u32) = (1, 8);
/// Largest `n_x + n_y + n_z` accepted by `cpdd{…}` (K ≤ 4096).
pub const MAX_CLASS_TOTAL: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Cdd,
    Ga8,
    Oudd,
    Pdd,
    Ga8a,
    Ga8b,
}

impl Scheme {
    fn from_keyword(s: &str) -> Option<Scheme> {
        match s {
            "cdd" => Some(Scheme::Cdd),
            "ga8" => Some(Scheme::Ga8),
            "oudd" => Some(Scheme::Oudd),
            "pdd" => Some(Scheme::Pdd),
            "ga8a" => Some(Scheme::Ga8a),
            "ga8b" => Some(Scheme::Ga8b),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Scheme::Cdd => "cdd",
            Scheme::Ga8 => "ga8",
            Scheme::Oudd => "oudd",
            Scheme::Pdd => "pdd",
            Scheme::Ga8a => "ga8a",
            Scheme::Ga8b => "ga8b",
        }
    }

    fn range(self) -> Option<(u32, u32)> {
        match self {
            Scheme::Cdd => Some(CDD_LEVELS),
            Scheme::Ga8 => Some(GA8_LEVELS),
            Scheme::Oudd => Some(OUDD_ORDERS),
            Scheme::Pdd | Scheme::Ga8a | Scheme::Ga8b => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqExpr {
    /// Axis string in conventional order (last-applied pulse leftmost).
    Literal(String),
    Projection(PauliAxis),
    Concat {
        outer: Box<SeqExpr>,
        inner: Box<SeqExpr>,
    },
    Named {
        scheme: Scheme,
        param: Option<u32>,
    },
    ClassSpec(CpddClass),
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Literal(s) => f.write_str(s),
            SeqExpr::Projection(a) => write!(f, "p{}", a.as_char().to_ascii_lowercase()),
            SeqExpr::Concat { outer, inner } => write!(f, "{outer}[{inner}]"),
            SeqExpr::Named { scheme, param: Some(p) } => write!(f, "{}({p})", scheme.keyword()),
            SeqExpr::Named { scheme, param: None } => f.write_str(scheme.keyword()),
            SeqExpr::ClassSpec(c) => write!(f, "cpdd{{{},{},{}}}", c.nx, c.ny, c.nz),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("at byte {offset}: unknown name '{name}'")]
    UnknownName { offset: usize, name: String },
    #[error("at byte {offset}: {message}")]
    OutOfRange { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownName { offset, .. }
            | ParseError::OutOfRange { offset, .. } => *offset,
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { offset, message: message.into() })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, ch: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == ch => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => self.syntax(self.pos, format!("expected '{ch}', found '{c}'")),
            None => self.syntax(self.pos, format!("expected '{ch}', found end of input")),
        }
    }

    fn word(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..].find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(self.src.len() - start);
        self.pos += len;
        (start, &self.src[start..start + len])
    }

    fn int(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..].find(|c: char| !c.is_ascii_digit()).unwrap_or(self.src.len() - start);
        if len == 0 {
            return match self.src[start..].chars().next() {
                Some(c) => self.syntax(start, format!("expected an integer, found '{c}'")),
                None => self.syntax(start, "expected an integer, found end of input"),
            };
        }
        self.pos += len;
        self.src[start..start + len]
            .parse()
            .map_err(|_| ParseError::OutOfRange { offset: start, message: "integer too large".into() })
    }

    fn expr(&mut self) -> Result<SeqExpr, ParseError> {
        let mut e = self.atom()?;
        while self.peek() == Some('[') {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(']')?;
            e = SeqExpr::Concat { outer: Box::new(e), inner: Box::new(inner) };
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<SeqExpr, ParseError> {
        let (start, word) = self.word();
        if word.is_empty() {
            return match self.src[start..].chars().next() {
                Some(c) => self.syntax(start, format!("unexpected '{c}'")),
                None => self.syntax(start, "unexpected end of input"),
            };
        }
        let lower = word.to_ascii_lowercase();
        match lower.as_str() {
            "px" => return Ok(SeqExpr::Projection(PauliAxis::X)),
            "py" => return Ok(SeqExpr::Projection(PauliAxis::Y)),
            "pz" => return Ok(SeqExpr::Projection(PauliAxis::Z)),
            "cpdd" => return self.class_spec(start),
            _ => {}
        }
        if let Some(scheme) = Scheme::from_keyword(&lower) {
            return self.named(scheme);
        }
        if lower.chars().all(|c| matches!(c, 'i' | 'x' | 'y' | 'z')) {
            return Ok(SeqExpr::Literal(word.to_ascii_uppercase()));
        }
        Err(ParseError::UnknownName { offset: start, name: word.to_string() })
    }

    fn named(&mut self, scheme: Scheme) -> Result<SeqExpr, ParseError> {
        let has_paren = self.peek() == Some('(');
        match (scheme.range(), has_paren) {
            (Some((lo, hi)), true) => {
                self.pos += 1;
                let at = {
                    self.skip_ws();
                    self.pos
                };
                let n = self.int()?;
                self.expect(')')?;
                if n < lo || n > hi {
                    return Err(ParseError::OutOfRange {
                        offset: at,
                        message: format!("{}({n}) outside {lo}..={hi}", scheme.keyword()),
                    });
                }
                Ok(SeqExpr::Named { scheme, param: Some(n) })
            }
            (Some(_), false) => self
                .syntax(self.pos, format!("'{}' requires a parameter, e.g. {}(2)", scheme.keyword(), scheme.keyword())),
            (None, true) => self.syntax(self.pos, format!("'{}' takes no parameter", scheme.keyword())),
            (None, false) => Ok(SeqExpr::Named { scheme, param: None }),
        }
    }

    fn class_spec(&mut self, start: usize) -> Result<SeqExpr, ParseError> {
        self.expect('{')?;
        let nx = self.int()?;
        self.expect(',')?;
        let ny = self.int()?;
        self.expect(',')?;
        let nz = self.int()?;
        self.expect('}')?;
        let class = CpddClass::new(nx, ny, nz);
        let total = nx as u64 + ny as u64 + nz as u64;
        if total == 0 || total > MAX_CLASS_TOTAL as u64 {
            return Err(ParseError::OutOfRange {
                offset: start,
                message: format!("class {class} needs 1..={MAX_CLASS_TOTAL} projections in total"),
            });
        }
        Ok(SeqExpr::ClassSpec(class))
    }
}

pub fn parse(text: &str) -> Result<SeqExpr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(c) => p.syntax(p.pos, format!("unexpected '{c}' after expression")),
    }
}

/// Builds the pulse sequence an expression denotes.
pub fn elaborate(expr: &SeqExpr) -> Result<PulseSequence, SequenceError> {
    match expr {
        SeqExpr::Literal(s) => PulseSequence::from_paper_order(s),
        SeqExpr::Projection(a) => sequence::projection(*a),
        SeqExpr::Concat { outer, inner } => Ok(sequence::concat(&elaborate(outer)?, &elaborate(inner)?)),
        SeqExpr::Named { scheme, param } => match (scheme, *param) {
            (Scheme::Cdd, Some(l)) => sequence::cdd(l),
            (Scheme::Ga8, Some(l)) => sequence::ga8(l),
            (Scheme::Oudd, Some(k)) => sequence::from_class(sequence::oudd(k)),
            (Scheme::Pdd, None) => Ok(sequence::pdd()),
            (Scheme::Ga8a, None) => Ok(sequence::ga8a()),
            (Scheme::Ga8b, None) => Ok(sequence::ga8b()),
            (Scheme::Cdd | Scheme::Ga8 | Scheme::Oudd, None) => {
                Err(SequenceError::ZeroLevel { name: scheme.keyword() })
            }
            (Scheme::Pdd | Scheme::Ga8a | Scheme::Ga8b, Some(_)) => {
                Err(SequenceError::UnexpectedParameter { name: scheme.keyword() })
            }
        },
        SeqExpr::ClassSpec(c) => sequence::from_class(*c),
    }
}

/// Conventional text form; parses back as a literal with the same axes.
pub fn print(seq: &PulseSequence) -> String {
    seq.paper_order()
}

/// `parse` then `elaborate`, with both error kinds folded into one.
pub fn compile(text: &str) -> Result<PulseSequence, crate::Error> {
    Ok(elaborate(&parse(text)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use PauliAxis::{X, Y, Z};

    fn concat(o: SeqExpr, i: SeqExpr) -> SeqExpr {
        SeqExpr::Concat { outer: Box::new(o), inner: Box::new(i) }
    }

    #[test]
    fn nested_projections() {
        let e = parse("px[py[pz]]").unwrap();
        assert_eq!(e, concat(SeqExpr::Projection(X), concat(SeqExpr::Projection(Y), SeqExpr::Projection(Z))));
        assert_eq!(print(&elaborate(&e).unwrap()), "IZXZIZXZ");
        assert_eq!(e.to_string(), "px[py[pz]]");
    }

    #[test]
    fn named_schemes() {
        let cdd1 = elaborate(&parse("cdd(1)").unwrap()).unwrap();
        let pxpy = elaborate(&parse("px[py]").unwrap()).unwrap();
        assert_eq!(cdd1.class(), pxpy.class());
        assert_eq!(cdd1.len(), 4);
        let oudd2 = elaborate(&parse("oudd(2)").unwrap()).unwrap();
        assert_eq!((oudd2.class(), oudd2.len()), (Some(CpddClass::new(1, 1, 1)), 8));
        assert_eq!(elaborate(&parse("CDD(2)").unwrap()).unwrap().len(), 16);
        assert_eq!(print(&elaborate(&parse("ga8a").unwrap()).unwrap()), "IZXZIZXZ");
        assert_eq!(print(&elaborate(&parse("pdd").unwrap()).unwrap()), "XYXY");
        let b = elaborate(&parse("ga8b").unwrap()).unwrap();
        assert_eq!(b.class(), Some(CpddClass::new(0, 1, 2)));
    }

    #[test]
    fn class_spec_uses_canonical_order() {
        let s = elaborate(&parse("cpdd{0,1,2}").unwrap()).unwrap();
        assert_eq!(s.provenance(), Some(&[Y, Z, Z][..]));
        assert_eq!(s.suppression_order(), Some(1));
        assert_eq!(parse(" cpdd{ 1 , 1 , 1 } ").unwrap(), SeqExpr::ClassSpec(CpddClass::new(1, 1, 1)));
    }

    #[test]
    fn literals() {
        assert_eq!(parse("ZZ").unwrap(), SeqExpr::Literal("ZZ".into()));
        let s = elaborate(&parse("zz").unwrap()).unwrap();
        assert_eq!(print(&s), "ZZ");
        assert_eq!(s.provenance(), None);
        assert_eq!(print(&elaborate(&parse("XX[YY]").unwrap()).unwrap()), "ZYZY");
    }

    #[test]
    fn printing() {
        assert_eq!(print(&sequence::projection(Z).unwrap()), "ZZ");
        assert_eq!(print(&sequence::cpdd_from_order(&[Z, Y, X]).unwrap()), "IZXZIZXZ");
        let c = sequence::concat(&sequence::projection(X).unwrap(), &sequence::projection(Y).unwrap());
        assert_eq!(print(&c), "ZYZY");
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse("px[py").unwrap_err().offset(), 5);
        assert!(matches!(parse("foo"), Err(ParseError::UnknownName { offset: 0, .. })));
        assert!(matches!(parse("px[ bar]"), Err(ParseError::UnknownName { offset: 4, .. })));
        assert!(matches!(parse("cdd(0)"), Err(ParseError::OutOfRange { offset: 4, .. })));
        assert!(matches!(parse("cdd(99)"), Err(ParseError::OutOfRange { .. })));
        assert!(matches!(parse("cdd"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("pdd(2)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("cpdd{0,0,0}"), Err(ParseError::OutOfRange { .. })));
        assert!(matches!(parse("cpdd{1,2}"), Err(ParseError::Syntax { offset: 8, .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("px]"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("cdd(99999999999)"), Err(ParseError::OutOfRange { .. })));
    }

    #[test]
    fn elaboration_errors_surface() {
        let bad = SeqExpr::Projection(PauliAxis::I);
        assert_eq!(elaborate(&bad), Err(SequenceError::IdentityProjection));
    }
}
