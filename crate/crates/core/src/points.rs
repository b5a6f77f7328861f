//! k-points of a presented algebra, basic Zariski opens, induced maps of
//! point sets, and the structure-sheaf section spaces over finite opens.

use std::sync::Arc;

use crate::algebra::{AlgebraHom, FpAlgebra};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{Field, Scalar};
use crate::freealg::NcPoly;
use crate::linalg::{Matrix, VectorSpan};

/// Largest candidate space `enumerate_points` will scan.
pub const SEARCH_LIMIT: u128 = 100_000_000;

/// One scalar per generator; scalars commute, so a word evaluates to a product.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Point {
    values: Vec<Scalar>,
}

impl Point {
    pub fn new(values: Vec<Scalar>) -> Self {
        Point { values }
    }

    pub fn from_i64(field: Field, values: &[i64]) -> Self {
        Point { values: values.iter().map(|&v| field.from_i64(v)).collect() }
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// `p(f) = f(p)`.
pub fn eval(f: &NcPoly, p: &Point, field: Field) -> Scalar {
    f.eval_scalars(&p.values, field)
}

/// Checks the point invariant: right arity, right field, all relations vanish.
pub fn check_point(a: &FpAlgebra, p: &Point) -> Result<()> {
    if p.dim() != a.ngens() {
        return Err(Error::ArityMismatch { expected: a.ngens(), found: p.dim() });
    }
    if p.values.iter().any(|v| v.field() != a.field()) {
        return Err(Error::Mismatch(format!("point coordinates outside {}", a.field())));
    }
    for (i, r) in a.rels().iter().enumerate() {
        let v = eval(r, p, a.field());
        if !v.is_negligible() {
            return Err(Error::NotAPoint { relation: i, value: v.to_string() });
        }
    }
    Ok(())
}

/// A finite set of k-points, sorted by value vector without duplicates.
#[derive(Clone, Debug)]
pub struct PointSet {
    algebra: Arc<FpAlgebra>,
    points: Vec<Point>,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.presentation() == other.algebra.presentation() && self.points == other.points
    }
}

impl PointSet {
    /// User-supplied points, each checked against the relations.
    pub fn from_points(algebra: Arc<FpAlgebra>, mut points: Vec<Point>) -> Result<Self> {
        for p in &points {
            check_point(&algebra, p)?;
        }
        points.sort();
        points.dedup();
        Ok(PointSet { algebra, points })
    }

    fn from_sorted(algebra: Arc<FpAlgebra>, points: Vec<Point>) -> Self {
        PointSet { algebra, points }
    }

    pub fn algebra(&self) -> &Arc<FpAlgebra> {
        &self.algebra
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let pts = self.points.iter().filter(|p| other.contains(p)).cloned().collect();
        PointSet::from_sorted(self.algebra.clone(), pts)
    }

    pub fn field(&self) -> Field {
        self.algebra.field()
    }
}

pub fn enumerate_points(a: &Arc<FpAlgebra>) -> Result<PointSet> {
    enumerate_points_with(a, Exec::default())
}

/// Brute force over `F_p^n`; the candidate space is split across workers
/// when `exec` is parallel, and the output order is lexicographic either way.
pub fn enumerate_points_with(a: &Arc<FpAlgebra>, exec: Exec) -> Result<PointSet> {
    let Field::Prime(p) = a.field() else {
        return Err(Error::UnsupportedField { needed: "a prime field", field: a.field().name() });
    };
    let n = a.ngens();
    let size = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > SEARCH_LIMIT {
        return Err(Error::SearchSpace { size, limit: SEARCH_LIMIT });
    }
    let p = p as u64;
    let rels = compile_mod_p(a.rels(), p);
    let hits = exec.filter_range(size as u64, |idx| {
        let mut digits = [0u64; 32];
        decode(idx, p, n, &mut digits);
        rels.iter().all(|r| eval_mod_p(r, &digits, p) == 0)
    });
    let field = a.field();
    let points = hits
        .into_iter()
        .map(|idx| {
            let mut digits = [0u64; 32];
            decode(idx, p, n, &mut digits);
            Point { values: digits[..n].iter().map(|&d| field.from_i64(d as i64)).collect() }
        })
        .collect();
    Ok(PointSet::from_sorted(a.clone(), points))
}

type ModTerm = (u64, Vec<usize>);

fn compile_mod_p(rels: &[NcPoly], p: u64) -> Vec<Vec<ModTerm>> {
    rels.iter()
        .map(|r| {
            r.terms()
                .map(|(w, c)| (c.as_mod().expect("prime field coefficient") as u64 % p, w.letters().collect()))
                .collect()
        })
        .collect()
}

fn eval_mod_p(terms: &[ModTerm], digits: &[u64], p: u64) -> u64 {
    let mut acc = 0;
    for (c, w) in terms {
        let mut t = *c;
        for &l in w {
            t = t * digits[l] % p;
        }
        acc = (acc + t) % p;
    }
    acc
}

/// Most significant digit first, so increasing indices are lexicographic.
fn decode(mut idx: u64, p: u64, n: usize, out: &mut [u64]) {
    for slot in out[..n].iter_mut().rev() {
        *slot = idx % p;
        idx /= p;
    }
}

/// `D(f) = {p ∈ X : f(p) ≠ 0}`.
pub fn basic_open(f: &NcPoly, x: &PointSet) -> Result<PointSet> {
    x.algebra.presentation().check(f)?;
    let field = x.field();
    let pts = x.points.iter().filter(|p| !eval(f, p, field).is_negligible()).cloned().collect();
    Ok(PointSet::from_sorted(x.algebra.clone(), pts))
}

/// The map `pts A -> pts B` induced by `h: B -> A`, on the subset `x`.
pub fn induced_point_map(h: &AlgebraHom, x: &PointSet) -> Result<PointSet> {
    h.require_valid()?;
    if x.algebra.presentation() != h.target().presentation() {
        return Err(Error::Mismatch("point set is not over the homomorphism's target".into()));
    }
    let field = x.field();
    let mut pts: Vec<Point> = x
        .points
        .iter()
        .map(|p| Point { values: h.images().iter().map(|im| eval(im, p, field)).collect() })
        .collect();
    pts.sort();
    pts.dedup();
    Ok(PointSet::from_sorted(h.source().clone(), pts))
}

/// Image of one point under the induced map.
pub fn pull_point(h: &AlgebraHom, p: &Point) -> Point {
    let field = h.target().field();
    Point { values: h.images().iter().map(|im| eval(im, p, field)).collect() }
}

/// Points of `x` whose image under the induced map lies in `subset`.
pub fn preimage(h: &AlgebraHom, x: &PointSet, subset: &PointSet) -> PointSet {
    let pts = x.points.iter().filter(|p| subset.contains(&pull_point(h, p))).cloned().collect();
    PointSet::from_sorted(x.algebra.clone(), pts)
}

/// Sections over a finite open: a subspace of functions `U -> k`.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    pub open_set: PointSet,
    pub basis: Vec<Vec<Scalar>>,
    pub contains_unit_inverses: bool,
    span: VectorSpan,
}

impl SectionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, table: &[Scalar]) -> bool {
        self.span.contains(table)
    }
}

fn exponent_vectors(n: usize, max_deg: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    let mut frontier = out.clone();
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for e in &frontier {
            // Raise only the last nonzero coordinate or later, so each vector appears once.
            let start = e.iter().rposition(|&x| x > 0).unwrap_or(0);
            for i in start..n {
                let mut f = e.clone();
                f[i] += 1;
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `O(U)`: closure of the monomial value tables (degree at most the bound)
/// under pointwise products and reciprocals of nowhere-zero tables.
pub fn section_space(u: &PointSet) -> Result<SectionSpace> {
    let field = u.field();
    if !matches!(field, Field::Prime(_)) {
        return Err(Error::UnsupportedField { needed: "a prime field", field: field.name() });
    }
    if u.is_empty() {
        return Err(Error::EmptyOpenSet);
    }
    let n = u.algebra.ngens();
    let bound = u.algebra.presentation().bound();
    let mut span = VectorSpan::new(field, u.len());
    for e in exponent_vectors(n, bound) {
        let table: Vec<Scalar> = u
            .points
            .iter()
            .map(|p| {
                p.values.iter().zip(&e).fold(field.one(), |acc, (v, &k)| &acc * &v.pow(k))
            })
            .collect();
        span.insert(&table);
        if span.is_full() {
            break;
        }
    }
    loop {
        let basis = span.basis().to_vec();
        let mut grew = false;
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let prod: Vec<Scalar> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).collect();
                grew |= span.insert(&prod);
            }
            if basis[i].iter().all(|v| !v.is_zero()) {
                let recip: Vec<Scalar> = basis[i].iter().map(|v| v.inv().expect("nonzero")).collect();
                grew |= span.insert(&recip);
            }
        }
        if !grew {
            break;
        }
    }
    Ok(SectionSpace { open_set: u.clone(), basis: span.basis().to_vec(), contains_unit_inverses: true, span })
}

/// Basis of `{f : deg f ≤ d, f(p) = 0 for all p ∈ U}`, in normal-word coordinates.
pub fn kernel_of_rho(u: &PointSet, d: usize) -> Result<Vec<NcPoly>> {
    let a = &u.algebra;
    let field = a.field();
    if !field.is_exact() {
        return Err(Error::UnsupportedField { needed: "an exact field", field: field.name() });
    }
    let words = a.rewrite().normal_words(a.ngens(), d);
    let mut m = Matrix::zeros(field, u.len(), words.len());
    for (i, p) in u.points.iter().enumerate() {
        for (j, w) in words.iter().enumerate() {
            m[(i, j)] = NcPoly::monomial(w.clone(), field.one()).eval_scalars(&p.values, field);
        }
    }
    Ok(m.null_space()
        .into_iter()
        .map(|v| {
            let mut f = NcPoly::zero();
            for (w, c) in words.iter().zip(v) {
                f.add_term(w.clone(), c);
            }
            f
        })
        .collect())
}
