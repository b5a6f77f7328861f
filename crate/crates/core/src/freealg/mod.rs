//! Free associative algebras `k<x_1, ..., x_n>` and presentation files.

mod parse;
mod poly;

pub(crate) use parse::parse_statements;
pub use parse::{parse_poly, parse_presentation, split_statements, Statement};
pub use poly::{NcPoly, Word};

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;

/// Truncation degree used when a file does not set `bound`.
pub const DEFAULT_BOUND: usize = 8;

/// A finitely presented algebra `k<gens>/(rels)`, ordered deglex by `gens`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    field: Field,
    gens: Vec<String>,
    rels: Vec<NcPoly>,
    bound: usize,
}

impl Presentation {
    /// Validates names, letters and coefficients. Zero relations are dropped
    /// and `bound` of `None` means [`DEFAULT_BOUND`], raised to the largest
    /// relation degree when needed.
    pub fn new(
        field: Field,
        gens: Vec<String>,
        rels: Vec<NcPoly>,
        bound: Option<usize>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for g in &gens {
            if !is_valid_name(g) {
                return Err(Error::Invalid(format!("invalid generator name `{g}`")));
            }
            if !seen.insert(g.as_str()) {
                return Err(Error::DuplicateGenerator(g.clone()));
            }
        }
        let rels: Vec<NcPoly> = rels.into_iter().filter(|r| !r.is_zero()).collect();
        for r in &rels {
            check_poly(field, gens.len(), r)?;
        }
        let max_deg = rels.iter().filter_map(NcPoly::degree).max().unwrap_or(0);
        let bound = match bound {
            Some(0) => {
                return Err(Error::Invalid("bound must be a positive integer".into()))
            }
            Some(b) if b < max_deg => {
                return Err(Error::BoundTooSmall { bound: b, degree: max_deg })
            }
            Some(b) => b,
            None => DEFAULT_BOUND.max(max_deg),
        };
        Ok(Presentation { field, gens, rels, bound })
    }

    /// The free algebra on `gens`.
    pub fn free(field: Field, gens: &[&str]) -> Result<Self> {
        Self::new(field, gens.iter().map(|s| s.to_string()).collect(), Vec::new(), None)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn rels(&self) -> &[NcPoly] {
        &self.rels
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    /// Same presentation with another truncation degree.
    pub fn with_bound(&self, bound: usize) -> Result<Self> {
        Self::new(self.field, self.gens.clone(), self.rels.clone(), Some(bound))
    }

    /// The generator `x_i` as a polynomial.
    pub fn var(&self, i: usize) -> NcPoly {
        NcPoly::var(i, self.field)
    }

    pub fn constant(&self, c: i64) -> NcPoly {
        NcPoly::constant(self.field.from_i64(c))
    }

    /// Parses a polynomial over this presentation's generators.
    pub fn poly(&self, text: &str) -> Result<NcPoly> {
        parse_poly(text, self.field, &self.gens)
    }

    /// Checks that `p` lives over this presentation's alphabet and field.
    pub fn check(&self, p: &NcPoly) -> Result<()> {
        check_poly(self.field, self.gens.len(), p)
    }

    pub fn format_poly(&self, p: &NcPoly) -> String {
        p.format(&self.gens)
    }

    pub fn add(&self, p: &NcPoly, q: &NcPoly) -> Result<NcPoly> {
        self.check(p)?;
        self.check(q)?;
        Ok(p + q)
    }

    pub fn mul(&self, p: &NcPoly, q: &NcPoly) -> Result<NcPoly> {
        self.check(p)?;
        self.check(q)?;
        Ok(p * q)
    }

    pub fn scale(&self, c: &crate::field::Scalar, p: &NcPoly) -> Result<NcPoly> {
        if c.field() != self.field {
            return Err(Error::Mismatch(format!("scalar over {}", c.field())));
        }
        self.check(p)?;
        Ok(p.scale(c))
    }

    /// Applies `x_i -> images[i]`, the unique unital algebra map extending it.
    pub fn substitute(&self, p: &NcPoly, images: &[NcPoly]) -> Result<NcPoly> {
        if images.len() != self.ngens() {
            return Err(Error::ArityMismatch { expected: self.ngens(), found: images.len() });
        }
        self.check(p)?;
        Ok(p.substitute(images))
    }
}

pub(crate) fn check_poly(field: Field, ngens: usize, p: &NcPoly) -> Result<()> {
    if let Some(l) = p.max_letter() {
        if l >= ngens {
            return Err(Error::Mismatch(format!(
                "letter x{l} outside an alphabet of {ngens} generators"
            )));
        }
    }
    if p.coefficients().any(|c| c.field() != field) {
        return Err(Error::Mismatch(format!("coefficients outside {field}")));
    }
    Ok(())
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Prints in the presentation file format; `parse_presentation` inverts it.
impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "field {}", self.field)?;
        writeln!(f, "gens {}", self.gens.join(" "))?;
        for r in &self.rels {
            writeln!(f, "rel {}", r.format(&self.gens))?;
        }
        writeln!(f, "bound {}", self.bound)
    }
}
