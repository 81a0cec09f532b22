use std::fmt;

use super::{tape_of_letter, Formula, Signature, VarRef};
use crate::pos::Pos;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(char),
    UnexpectedEnd,
    Expected(&'static str),
    UnknownRelation(String),
    ArityMismatch { relation: String, expected: usize, found: usize },
    BadVariable(String),
    /// A quantifier re-binds a variable already bound by an enclosing one.
    ShadowedBinding(String),
    MixedConnectives,
    TrailingInput,
}

/// Parse failure. `offset` is the 1-based byte column where the problem was
/// detected; an unexpected end of input reports `text.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::Lexical(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input (unbalanced parenthesis?)"),
            ParseErrorKind::Expected(what) => write!(f, "expected {what}"),
            ParseErrorKind::UnknownRelation(r) => write!(f, "unknown relation {r}"),
            ParseErrorKind::ArityMismatch { relation, expected, found } => {
                write!(f, "relation {relation} takes {expected} arguments, found {found}")
            }
            ParseErrorKind::BadVariable(v) => write!(f, "malformed variable {v}"),
            ParseErrorKind::ShadowedBinding(v) => write!(f, "variable {v} is already bound"),
            ParseErrorKind::MixedConnectives => write!(f, "mixed connectives need parentheses"),
            ParseErrorKind::TrailingInput => write!(f, "trailing input"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Op {
    And,
    Or,
    Implies,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    at: usize,
    sig: &'a Signature,
    bound: Vec<VarRef>,
}

/// Parses `text` against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser { src: text, bytes: text.as_bytes(), at: 0, sig, bound: Vec::new() };
    let f = p.formula()?;
    p.skip_ws();
    if p.at < p.bytes.len() {
        return Err(p.err(ParseErrorKind::TrailingInput));
    }
    Ok(f)
}

impl<'a> Parser<'a> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.at + 1, kind }
    }

    fn skip_ws(&mut self) {
        while self.at < self.bytes.len() && self.bytes[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.at).copied()
    }

    fn expect(&mut self, token: &'static str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.at >= self.bytes.len() {
            return Err(self.err(ParseErrorKind::UnexpectedEnd));
        }
        if self.src[self.at..].starts_with(token) {
            self.at += token.len();
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Expected(token)))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.at;
        match self.bytes.get(self.at) {
            None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
            Some(c) if c.is_ascii_lowercase() => {}
            Some(&c) => return Err(self.err(ParseErrorKind::Lexical(c as char))),
        }
        while self.at < self.bytes.len()
            && (self.bytes[self.at].is_ascii_lowercase()
                || self.bytes[self.at].is_ascii_digit()
                || self.bytes[self.at] == b'_')
        {
            self.at += 1;
        }
        Ok((start, &self.src[start..self.at]))
    }

    fn var(&mut self) -> Result<VarRef, ParseError> {
        let (start, word) = self.ident()?;
        let bad = || ParseError { offset: start + 1, kind: ParseErrorKind::BadVariable(word.to_owned()) };
        let mut chars = word.chars();
        let letter = chars.next().ok_or_else(bad)?;
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let tape = tape_of_letter(letter).ok_or_else(bad)?;
        let pos: Pos = digits.parse().map_err(|_| bad())?;
        Ok(VarRef { tape, pos })
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
            Some(b'!') => {
                self.at += 1;
                Ok(Formula::not(self.formula()?))
            }
            Some(b'(') => {
                self.at += 1;
                self.parenthesized()
            }
            Some(c) if c.is_ascii_lowercase() => self.word_formula(),
            Some(c) => Err(self.err(ParseErrorKind::Lexical(c as char))),
        }
    }

    fn op(&mut self) -> Result<Option<Op>, ParseError> {
        match self.peek() {
            Some(b'&') => {
                self.at += 1;
                Ok(Some(Op::And))
            }
            Some(b'|') => {
                self.at += 1;
                Ok(Some(Op::Or))
            }
            Some(b'-') => {
                self.expect("->")?;
                Ok(Some(Op::Implies))
            }
            Some(b')') => Ok(None),
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
            Some(_) => Err(self.err(ParseErrorKind::Expected("connective or ')'"))),
        }
    }

    fn parenthesized(&mut self) -> Result<Formula, ParseError> {
        let first = self.formula()?;
        let op = match self.op()? {
            Some(op) => op,
            None => return Err(self.err(ParseErrorKind::Expected("connective"))),
        };
        let mut parts = vec![first, self.formula()?];
        loop {
            match self.op()? {
                None => break,
                Some(next) if next == op && op != Op::Implies => parts.push(self.formula()?),
                Some(_) => return Err(self.err(ParseErrorKind::MixedConnectives)),
            }
        }
        self.expect(")")?;
        Ok(match op {
            Op::And => Formula::and(parts),
            Op::Or => Formula::or(parts),
            Op::Implies => {
                let b = parts.pop().unwrap();
                let a = parts.pop().unwrap();
                Formula::implies(a, b)
            }
        })
    }

    fn word_formula(&mut self) -> Result<Formula, ParseError> {
        let (start, word) = self.ident()?;
        match word {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            "exists" | "forall" => {
                let vstart = self.at;
                let v = self.var()?;
                if self.bound.contains(&v) {
                    return Err(ParseError {
                        offset: vstart + 1,
                        kind: ParseErrorKind::ShadowedBinding(v.to_string()),
                    });
                }
                self.expect(".")?;
                self.bound.push(v.clone());
                let body = self.formula();
                self.bound.pop();
                let body = body?;
                Ok(if word == "exists" { Formula::exists(v, body) } else { Formula::forall(v, body) })
            }
            "eq" => {
                self.expect("(")?;
                let a = self.var()?;
                self.expect(",")?;
                let b = self.var()?;
                self.expect(")")?;
                Ok(Formula::Eq(a, b))
            }
            rel => {
                let expected = self.sig.arity(rel).ok_or(ParseError {
                    offset: start + 1,
                    kind: ParseErrorKind::UnknownRelation(rel.to_owned()),
                })?;
                self.expect("(")?;
                let mut args = vec![self.var()?];
                loop {
                    match self.peek() {
                        Some(b',') => {
                            self.at += 1;
                            args.push(self.var()?);
                        }
                        Some(b')') => {
                            self.at += 1;
                            break;
                        }
                        None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
                        Some(_) => return Err(self.err(ParseErrorKind::Expected("',' or ')'"))),
                    }
                }
                if args.len() != expected {
                    return Err(ParseError {
                        offset: start + 1,
                        kind: ParseErrorKind::ArityMismatch {
                            relation: rel.to_owned(),
                            expected,
                            found: args.len(),
                        },
                    });
                }
                Ok(Formula::Atom(rel.to_owned(), args))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new("test", &[("lt", 2), ("adj", 2)])
    }

    #[test]
    fn eq_atom() {
        let f = parse_formula("eq(x0,y0)", &sig()).unwrap();
        assert_eq!(f, Formula::Eq(VarRef::x(0u64), VarRef::y(0u64)));
    }

    #[test]
    fn forall_over_implies() {
        let f = parse_formula("forall y0. (lt(x0,y0) -> lt(x0,x1))", &sig()).unwrap();
        match f {
            Formula::Forall(v, body) => {
                assert_eq!(v, VarRef::y(0u64));
                assert!(matches!(*body, Formula::Implies(..)));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unbalanced_reports_end_offset() {
        let e = parse_formula("lt(x0", &sig()).unwrap_err();
        assert_eq!(e.offset, 6);
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEnd);
    }

    #[test]
    fn unknown_relation_and_arity() {
        let e = parse_formula("equiv(x0,x1)", &sig()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnknownRelation(_)));
        assert_eq!(e.offset, 1);
        let e = parse_formula("!lt(x0,x1,x2)", &sig()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ArityMismatch { expected: 2, found: 3, .. }));
        assert_eq!(e.offset, 2);
    }

    #[test]
    fn lexical_and_shadowing_errors() {
        let e = parse_formula("(lt(x0,x1) # true)", &sig()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Expected(_)));
        let e = parse_formula("$", &sig()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Lexical('$'));
        let e = parse_formula("exists y0. forall y0. true", &sig()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::ShadowedBinding(_)));
        let e = parse_formula("(true & false | true)", &sig()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MixedConnectives);
    }

    #[test]
    fn chains_flatten() {
        let f = parse_formula("(adj(x1,x2) & adj(x0,x1) & true)", &sig()).unwrap();
        assert_eq!(f.render(), "(true & (adj(x0,x1) & adj(x1,x2)))");
    }

    #[test]
    fn big_positions_parse() {
        let f = parse_formula("eq(x123456789012345678901234567890,y0)", &sig()).unwrap();
        assert_eq!(f.render(), "eq(x123456789012345678901234567890,y0)");
    }
}
