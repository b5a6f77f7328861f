//! Presentation files.
//!
//! ```text
//! file    := "field" FIELD ; "gens" NAME+ ; ("rel" POLY)* ; ("bound" INT)?
//! FIELD   := "Q" | "F" INT | "R"
//! ```
//!
//! Statements are separated by newlines or `;`, and `#` starts a comment.
//! Polynomials accept `+ - * ^`, parentheses and `a/b` literals, which is a
//! superset of the printed form.

use num_bigint::BigInt;

use super::{NcPoly, Presentation, Word};
use crate::error::{Error, Result};
use crate::field::{Field, Scalar};

/// One statement with the 1-based position of its first character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl Statement {
    pub fn keyword(&self) -> &str {
        self.text.split_whitespace().next().unwrap_or("")
    }

    /// Text after the keyword, with the column where it starts.
    pub fn rest(&self) -> (&str, usize) {
        let kw = self.keyword();
        let start = self.text.find(kw).unwrap_or(0) + kw.len();
        let rest = &self.text[start..];
        let trimmed = rest.trim_start();
        let skipped = rest.len() - trimmed.len();
        (trimmed.trim_end(), self.column + start + skipped)
    }

    pub fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, column, message: message.into() }
    }
}

pub fn split_statements(text: &str) -> Vec<Statement> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let code = line.split('#').next().unwrap_or("");
        let mut col = 0;
        for piece in code.split(';') {
            let lead = piece.len() - piece.trim_start().len();
            if !piece.trim().is_empty() {
                out.push(Statement {
                    text: piece.trim().to_string(),
                    line: ln + 1,
                    column: col + lead + 1,
                });
            }
            col += piece.len() + 1;
        }
    }
    out
}

pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let stmts = split_statements(text);
    let (pres, used) = parse_statements(&stmts)?;
    if let Some(extra) = stmts.get(used) {
        return Err(extra.error(extra.column, format!("unexpected `{}` statement", extra.keyword())));
    }
    Ok(pres)
}

/// Parses the presentation prefix of `stmts`, stopping before the first
/// statement that is not part of the presentation grammar. Returns the
/// number of statements consumed.
pub(crate) fn parse_statements(stmts: &[Statement]) -> Result<(Presentation, usize)> {
    let mut field = None;
    let mut gens: Option<Vec<String>> = None;
    let mut rels = Vec::new();
    let mut bound = None;
    let mut used = 0;
    for st in stmts {
        let (rest, col) = st.rest();
        match st.keyword() {
            "field" => {
                if field.is_some() {
                    return Err(st.error(st.column, "field declared twice"));
                }
                field = Some(parse_field(rest).map_err(|e| match e {
                    Error::NonPrimeModulus(_) => e,
                    _ => st.error(col, format!("unknown field `{rest}`")),
                })?);
            }
            "gens" => {
                if field.is_none() {
                    return Err(st.error(st.column, "`gens` before `field`"));
                }
                if gens.is_some() {
                    return Err(st.error(st.column, "gens declared twice"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                for n in &names {
                    if !super::is_valid_name(n) {
                        return Err(st.error(col, format!("invalid generator name `{n}`")));
                    }
                }
                let mut seen = std::collections::HashSet::new();
                for n in &names {
                    if !seen.insert(n) {
                        return Err(Error::DuplicateGenerator(n.clone()));
                    }
                }
                gens = Some(names);
            }
            "rel" => {
                let (Some(f), Some(g)) = (field, gens.as_ref()) else {
                    return Err(st.error(st.column, "`rel` before `field` and `gens`"));
                };
                rels.push(parse_poly_at(rest, f, g, st.line, col)?);
            }
            "bound" => {
                let b: usize = rest
                    .parse()
                    .map_err(|_| st.error(col, format!("bound must be a positive integer, got `{rest}`")))?;
                bound = Some(b);
            }
            _ => break,
        }
        used += 1;
    }
    let Some(field) = field else {
        let (line, column) = stmts.first().map_or((1, 1), |s| (s.line, s.column));
        return Err(Error::Syntax { line, column, message: "missing `field` statement".into() });
    };
    let Some(gens) = gens else {
        let (line, column) = stmts.last().map_or((1, 1), |s| (s.line, s.column));
        return Err(Error::Syntax { line, column, message: "missing `gens` statement".into() });
    };
    Ok((Presentation::new(field, gens, rels, bound)?, used))
}

fn parse_field(s: &str) -> Result<Field> {
    match s {
        "Q" => Ok(Field::Rational),
        "R" => Ok(Field::Real),
        _ => {
            let p: u64 = s
                .strip_prefix('F')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| Error::Invalid(format!("unknown field `{s}`")))?;
            Field::prime(p)
        }
    }
}

/// Parses a polynomial over `gens`; errors report positions within `text`.
pub fn parse_poly(text: &str, field: Field, gens: &[String]) -> Result<NcPoly> {
    parse_poly_at(text, field, gens, 1, 1)
}

fn parse_poly_at(text: &str, field: Field, gens: &[String], line: usize, col: usize) -> Result<NcPoly> {
    let tokens = tokenize(text, line, col)?;
    let mut p = PolyParser { tokens, pos: 0, field, gens, line, end_col: col + text.len() };
    let poly = p.expr()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(Error::Syntax { line, column: t.col, message: format!("unexpected `{}`", t.text) });
    }
    Ok(poly)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num,
    Name,
    Op(char),
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    text: String,
    col: usize,
}

fn tokenize(text: &str, line: usize, col: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            Tok::Num
        } else if c.is_ascii_alphabetic() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Name
        } else if "+-*/^()".contains(c) {
            i += 1;
            Tok::Op(c)
        } else {
            return Err(Error::Syntax { line, column: col + start, message: format!("unexpected character `{c}`") });
        };
        out.push(Token { kind, text: chars[start..i].iter().collect(), col: col + start });
    }
    Ok(out)
}

struct PolyParser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    field: Field,
    gens: &'a [String],
    line: usize,
    end_col: usize,
}

impl PolyParser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token { kind: Tok::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn err_here(&self, message: impl Into<String>) -> Error {
        let column = self.tokens.get(self.pos).map_or(self.end_col, |t| t.col);
        Error::Syntax { line: self.line, column, message: message.into() }
    }

    fn expr(&mut self) -> Result<NcPoly> {
        let mut acc = NcPoly::zero();
        let mut sign = match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                -1
            }
            Some('+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { &acc - &t } else { &acc + &t };
            match self.peek_op() {
                Some('+') => sign = 1,
                Some('-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<NcPoly> {
        let mut acc = self.power()?;
        while self.peek_op() == Some('*') {
            self.pos += 1;
            let f = self.power()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<NcPoly> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let exp: u32 = match self.tokens.get(self.pos) {
            Some(Token { kind: Tok::Num, text, .. }) => {
                text.parse().map_err(|_| self.err_here("exponent must be a non-negative integer"))?
            }
            _ => return Err(self.err_here("expected exponent")),
        };
        self.pos += 1;
        let mut acc = NcPoly::one(self.field);
        for _ in 0..exp {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<NcPoly> {
        let Some(tok) = self.tokens.get(self.pos).cloned() else {
            return Err(self.err_here("unexpected end of polynomial"));
        };
        self.pos += 1;
        match tok.kind {
            Tok::Num => {
                let mut text = tok.text.clone();
                if self.peek_op() == Some('/') {
                    if let Some(Token { kind: Tok::Num, text: den, .. }) = self.tokens.get(self.pos + 1) {
                        text = format!("{text}/{den}");
                        self.pos += 2;
                    }
                }
                let c = self.literal(&text, tok.col)?;
                Ok(NcPoly::constant(c))
            }
            Tok::Name => match self.gens.iter().position(|g| *g == tok.text) {
                Some(i) => Ok(NcPoly::monomial(Word::letter(i), self.field.one())),
                None => Err(Error::UnknownGenerator { name: tok.text, line: self.line, column: tok.col }),
            },
            Tok::Op('(') => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.err_here("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Op(c) => Err(Error::Syntax { line: self.line, column: tok.col, message: format!("unexpected `{c}`") }),
        }
    }

    fn literal(&self, text: &str, col: usize) -> Result<Scalar> {
        let bad = |m: String| Error::Syntax { line: self.line, column: col, message: m };
        if let Some(s) = self.field.parse_scalar(text) {
            return Ok(s);
        }
        if let Some((n, d)) = text.split_once('/') {
            if n.parse::<BigInt>().is_ok() && d.parse::<BigInt>().is_ok() {
                return Err(bad(format!("denominator of `{text}` vanishes in {}", self.field)));
            }
        }
        Err(bad(format!("invalid {} literal `{text}`", self.field)))
    }
}
