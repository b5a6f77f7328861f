//! Finitely presented algebras as values: homomorphisms, tensor products
//! over the ground field, abelianization and linear maps of generators.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::freealg::{parse_presentation, NcPoly, Presentation, Word};
use crate::linalg::Matrix;
use crate::rewrite::{complete, RewriteSystem};

/// `k<gens>/(rels)` together with its completed rewrite system.
#[derive(Clone, Debug)]
pub struct FpAlgebra {
    pres: Presentation,
    rw: RewriteSystem,
}

impl PartialEq for FpAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.pres == other.pres
    }
}

impl FpAlgebra {
    pub fn new(pres: Presentation) -> Self {
        let rw = complete(&pres);
        FpAlgebra { pres, rw }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(parse_presentation(text)?))
    }

    /// The ground field as an algebra with no generators.
    pub fn ground(field: Field) -> Self {
        Self::new(Presentation::new(field, Vec::new(), Vec::new(), None).expect("empty presentation"))
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn rewrite(&self) -> &RewriteSystem {
        &self.rw
    }

    pub fn field(&self) -> Field {
        self.pres.field()
    }

    pub fn gens(&self) -> &[String] {
        self.pres.gens()
    }

    pub fn ngens(&self) -> usize {
        self.pres.ngens()
    }

    pub fn rels(&self) -> &[NcPoly] {
        self.pres.rels()
    }

    pub fn var(&self, i: usize) -> NcPoly {
        self.pres.var(i)
    }

    pub fn poly(&self, text: &str) -> Result<NcPoly> {
        self.pres.poly(text)
    }

    pub fn format(&self, p: &NcPoly) -> String {
        self.pres.format_poly(p)
    }

    /// Normal form of the coset of `p`.
    pub fn nf(&self, p: &NcPoly) -> Result<NcPoly> {
        self.pres.check(p)?;
        self.rw.normal_form(p)
    }

    pub fn equal(&self, p: &NcPoly, q: &NcPoly) -> Result<bool> {
        Ok(self.nf(&(p - q))?.is_zero())
    }

    /// `1` lies in the ideal.
    pub fn is_zero_ring(&self) -> bool {
        self.rw.reduce(&NcPoly::one(self.field())).is_zero()
    }

    /// Every pair of generators commutes in the quotient.
    pub fn is_commutative(&self) -> bool {
        let n = self.ngens();
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let c = &(&self.var(i) * &self.var(j)) - &(&self.var(j) * &self.var(i));
                self.rw.reduce(&c).is_zero()
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomCheck {
    Valid,
    /// Relation `relation` of the source maps to the nonzero normal form `witness`.
    Invalid { relation: usize, witness: NcPoly },
}

impl HomCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, HomCheck::Valid)
    }
}

/// A homomorphism given by one target element per source generator.
#[derive(Clone, Debug)]
pub struct AlgebraHom {
    source: Arc<FpAlgebra>,
    target: Arc<FpAlgebra>,
    images: Vec<NcPoly>,
    check: HomCheck,
}

impl AlgebraHom {
    pub fn new(source: Arc<FpAlgebra>, target: Arc<FpAlgebra>, images: Vec<NcPoly>) -> Result<Self> {
        if source.field() != target.field() {
            return Err(Error::Mismatch(format!(
                "homomorphism from {} to {}",
                source.field(),
                target.field()
            )));
        }
        if images.len() != source.ngens() {
            return Err(Error::ArityMismatch { expected: source.ngens(), found: images.len() });
        }
        for im in &images {
            target.presentation().check(im)?;
        }
        let check = relation_check(&source, &target, &images)?;
        Ok(AlgebraHom { source, target, images, check })
    }

    pub fn identity(a: &Arc<FpAlgebra>) -> Self {
        let images = (0..a.ngens()).map(|i| a.var(i)).collect();
        AlgebraHom { source: a.clone(), target: a.clone(), images, check: HomCheck::Valid }
    }

    pub fn source(&self) -> &Arc<FpAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FpAlgebra> {
        &self.target
    }

    pub fn images(&self) -> &[NcPoly] {
        &self.images
    }

    pub fn check(&self) -> &HomCheck {
        &self.check
    }

    pub fn is_valid(&self) -> bool {
        self.check.is_valid()
    }

    /// Image of a source element, reduced in the target.
    pub fn apply(&self, p: &NcPoly) -> Result<NcPoly> {
        self.source.presentation().check(p)?;
        reduce_image(&self.target, &p.substitute(&self.images))
    }

    pub fn require_valid(&self) -> Result<()> {
        match &self.check {
            HomCheck::Valid => Ok(()),
            HomCheck::Invalid { relation, witness } => Err(Error::InvalidHom {
                relation: *relation,
                witness: self.target.format(witness),
            }),
        }
    }
}

/// Normal form in `target`. Beyond the bound this is only attempted when the
/// rewrite system is finite and complete, where reduction stays exact.
pub(crate) fn reduce_image(target: &FpAlgebra, p: &NcPoly) -> Result<NcPoly> {
    if target.rewrite().is_exhausted() {
        Ok(target.rewrite().reduce(p))
    } else {
        target.rewrite().normal_form(p)
    }
}

fn relation_check(source: &FpAlgebra, target: &FpAlgebra, images: &[NcPoly]) -> Result<HomCheck> {
    for (i, r) in source.rels().iter().enumerate() {
        let nf = reduce_image(target, &r.substitute(images))?;
        if !nf.is_zero() {
            return Ok(HomCheck::Invalid { relation: i, witness: nf });
        }
    }
    Ok(HomCheck::Valid)
}

pub fn check_hom(h: &AlgebraHom) -> HomCheck {
    h.check.clone()
}

/// `g ∘ h`; requires `h.target == g.source`.
pub fn compose_hom(g: &AlgebraHom, h: &AlgebraHom) -> Result<AlgebraHom> {
    if h.target.presentation() != g.source.presentation() {
        return Err(Error::Mismatch("composition with incompatible middle algebra".into()));
    }
    let images = h
        .images
        .iter()
        .map(|im| reduce_image(&g.target, &im.substitute(&g.images)))
        .collect::<Result<Vec<_>>>()?;
    AlgebraHom::new(h.source.clone(), g.target.clone(), images)
}

/// Name for the right factor's generator, suffixed until it is unused.
fn fresh_name(name: &str, taken: &[String]) -> String {
    let mut n = name.to_string();
    while taken.contains(&n) {
        n.push_str("_2");
    }
    n
}

/// `A ⊗_k B`: disjoint generators, both relation sets, and commutators between
/// the two alphabets. Clashing names in `B` get a `_2` suffix.
pub fn tensor_over_k(a: &FpAlgebra, b: &FpAlgebra) -> Result<FpAlgebra> {
    if a.field() != b.field() {
        return Err(Error::Mismatch(format!("tensor of {} and {} algebras", a.field(), b.field())));
    }
    let na = a.ngens();
    let mut gens = a.gens().to_vec();
    for g in b.gens() {
        let fresh = fresh_name(g, &gens);
        gens.push(fresh);
    }
    let mut rels: Vec<NcPoly> = a.rels().to_vec();
    rels.extend(b.rels().iter().map(|r| r.map_letters(|l| l + na)));
    let f = a.field();
    for i in 0..na {
        for j in 0..b.ngens() {
            let x = NcPoly::var(i, f);
            let y = NcPoly::var(na + j, f);
            rels.push(&(&x * &y) - &(&y * &x));
        }
    }
    let bound = a.presentation().bound().max(b.presentation().bound()).max(2);
    Ok(FpAlgebra::new(Presentation::new(f, gens, rels, Some(bound))?))
}

/// Adds every generator commutator not already among the relations.
pub fn abelianization(a: &FpAlgebra) -> FpAlgebra {
    let f = a.field();
    let mut rels = a.rels().to_vec();
    let existing: Vec<NcPoly> = rels.iter().map(NcPoly::monic).collect();
    for i in 0..a.ngens() {
        for j in i + 1..a.ngens() {
            let x = NcPoly::var(i, f);
            let y = NcPoly::var(j, f);
            let c = &(&y * &x) - &(&x * &y);
            if !existing.contains(&c.monic()) {
                rels.push(c);
            }
        }
    }
    let bound = a.presentation().bound().max(2);
    let pres = Presentation::new(f, a.gens().to_vec(), rels, Some(bound)).expect("same alphabet");
    FpAlgebra::new(pres)
}

/// Matrix of a generator-linear homomorphism: column `j` holds the
/// coefficients of the image of source generator `j`.
pub fn linear_part(h: &AlgebraHom) -> Result<Matrix> {
    let f = h.source.field();
    let mut m = Matrix::zeros(f, h.target.ngens(), h.source.ngens());
    for (j, im) in h.images.iter().enumerate() {
        for (w, c) in im.terms() {
            if w.len() != 1 {
                return Err(Error::NonHomogeneous { generator: h.source.gens()[j].clone() });
            }
            let i = w.letters().next().expect("length one");
            m[(i, j)] = c.clone();
        }
    }
    Ok(m)
}

/// The endomorphism `x_j -> Σ_i l[i][j] x_i` of a free or commutative algebra.
pub fn hom_of_matrix(l: &Matrix, a: &Arc<FpAlgebra>) -> Result<AlgebraHom> {
    let n = a.ngens();
    if l.rows() != n || l.cols() != n {
        return Err(Error::Shape(format!("{}x{} matrix for {n} generators", l.rows(), l.cols())));
    }
    if l.field() != a.field() {
        return Err(Error::Mismatch(format!("matrix over {} for an algebra over {}", l.field(), a.field())));
    }
    if !a.rels().is_empty() && !a.is_commutative() {
        return Err(Error::Invalid("linear endomorphisms need a free or commutative algebra".into()));
    }
    let images = (0..n)
        .map(|j| {
            let mut p = NcPoly::zero();
            for i in 0..n {
                p.add_term(Word::letter(i), l[(i, j)].clone());
            }
            p
        })
        .collect();
    AlgebraHom::new(a.clone(), a.clone(), images)
}

/// Invertibility of a linear homomorphism via the exact determinant.
pub fn is_linear_iso(h: &AlgebraHom) -> Result<bool> {
    let m = linear_part(h)?;
    if !m.is_square() {
        return Ok(false);
    }
    Ok(!m.determinant()?.is_zero())
}
