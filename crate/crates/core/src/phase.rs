//! The universal derivation `d`, the phase space `Ph(A) = k<x, dx>/(J, dJ)`,
//! derivations into A-algebras, and the functor `Ph`.

use std::sync::Arc;

use crate::algebra::{reduce_image, AlgebraHom, FpAlgebra};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::freealg::{NcPoly, Presentation, Word};

/// Leibniz on words: `d(x_{i1}…x_{il}) = Σ_j x_{i1}…dx_{ij}…x_{il}`, where
/// `dx_i` is letter `m + i`. Constants go to zero.
pub fn differentiate(p: &NcPoly, m: usize) -> NcPoly {
    let mut out = NcPoly::zero();
    for (w, c) in p.terms() {
        let letters: Vec<usize> = w.letters().collect();
        for j in 0..letters.len() {
            let mut v = letters.clone();
            v[j] += m;
            out.add_term(Word::from_letters(v), c.clone());
        }
    }
    out
}

/// `Ph(A)` with its structure map `A -> Ph(A)`.
#[derive(Clone, Debug)]
pub struct PhasePresentation {
    base: Arc<FpAlgebra>,
    phase: Arc<FpAlgebra>,
    embedding: AlgebraHom,
    chart: bool,
}

impl PhasePresentation {
    pub fn base(&self) -> &Arc<FpAlgebra> {
        &self.base
    }

    pub fn algebra(&self) -> &Arc<FpAlgebra> {
        &self.phase
    }

    pub fn presentation(&self) -> &Presentation {
        self.phase.presentation()
    }

    pub fn embedding(&self) -> &AlgebraHom {
        &self.embedding
    }

    /// Built through `tangent_chart`: one affine chart of the tangent variety.
    pub fn is_tangent_chart(&self) -> bool {
        self.chart
    }

    /// The canonical derivation `A -> Ph(A)` applied to `p`.
    pub fn d(&self, p: &NcPoly) -> NcPoly {
        differentiate(p, self.base.ngens())
    }
}

/// Prefixes every generator name, failing when a result is already taken.
pub(crate) fn prefixed_names(gens: &[String], prefixes: &[&str]) -> Result<Vec<String>> {
    let mut names = gens.to_vec();
    for pre in prefixes {
        for g in gens {
            let n = format!("{pre}{g}");
            if names.contains(&n) {
                return Err(Error::NameClash(n));
            }
            names.push(n);
        }
    }
    Ok(names)
}

pub fn phase_space(a: &Arc<FpAlgebra>) -> Result<PhasePresentation> {
    let m = a.ngens();
    let gens = prefixed_names(a.gens(), &["d"])?;
    let mut rels = a.rels().to_vec();
    rels.extend(a.rels().iter().map(|r| differentiate(r, m)));
    let pres = Presentation::new(a.field(), gens, rels, Some(a.presentation().bound()))?;
    let phase = Arc::new(FpAlgebra::new(pres));
    let images = (0..m).map(|i| phase.var(i)).collect();
    let embedding = AlgebraHom::new(a.clone(), phase.clone(), images)?;
    Ok(PhasePresentation { base: a.clone(), phase, embedding, chart: false })
}

pub fn tangent_chart(a: &Arc<FpAlgebra>) -> Result<PhasePresentation> {
    Ok(PhasePresentation { chart: true, ..phase_space(a)? })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DerivationCheck {
    Valid,
    Invalid { relation: usize, witness: NcPoly },
}

impl DerivationCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, DerivationCheck::Valid)
    }
}

/// A candidate derivation `δ: A -> B` over the A-algebra structure `ρ`,
/// given by its values on generators.
#[derive(Clone, Debug)]
pub struct DerivationSpec {
    rho: AlgebraHom,
    images: Vec<NcPoly>,
    check: DerivationCheck,
}

impl DerivationSpec {
    pub fn new(rho: AlgebraHom, images: Vec<NcPoly>) -> Result<Self> {
        rho.require_valid()?;
        let src = rho.source();
        if images.len() != src.ngens() {
            return Err(Error::ArityMismatch { expected: src.ngens(), found: images.len() });
        }
        for im in &images {
            rho.target().presentation().check(im)?;
        }
        let mut spec = DerivationSpec { rho, images, check: DerivationCheck::Valid };
        spec.check = spec.leibniz_check()?;
        Ok(spec)
    }

    pub fn source(&self) -> &Arc<FpAlgebra> {
        self.rho.source()
    }

    pub fn target(&self) -> &Arc<FpAlgebra> {
        self.rho.target()
    }

    pub fn rho(&self) -> &AlgebraHom {
        &self.rho
    }

    pub fn images(&self) -> &[NcPoly] {
        &self.images
    }

    pub fn is_valid(&self) -> bool {
        self.check.is_valid()
    }

    /// `δ(p)`: each letter in turn replaced by its δ-value, the others
    /// acting through `ρ`. Not reduced.
    pub fn apply_raw(&self, p: &NcPoly) -> NcPoly {
        let rho = self.rho.images();
        let mut out = NcPoly::zero();
        for (w, c) in p.terms() {
            let letters: Vec<usize> = w.letters().collect();
            for j in 0..letters.len() {
                let mut acc = NcPoly::constant(c.clone());
                for (k, &l) in letters.iter().enumerate() {
                    let f = if k == j { &self.images[l] } else { &rho[l] };
                    acc = &acc * f;
                    if acc.is_zero() {
                        break;
                    }
                }
                out = &out + &acc;
            }
        }
        out
    }

    pub fn apply(&self, p: &NcPoly) -> Result<NcPoly> {
        self.source().presentation().check(p)?;
        reduce_image(self.target(), &self.apply_raw(p))
    }

    fn leibniz_check(&self) -> Result<DerivationCheck> {
        for (i, r) in self.source().rels().iter().enumerate() {
            let nf = reduce_image(self.target(), &self.apply_raw(r))?;
            if !nf.is_zero() {
                return Ok(DerivationCheck::Invalid { relation: i, witness: nf });
            }
        }
        Ok(DerivationCheck::Valid)
    }
}

pub fn check_derivation(delta: &DerivationSpec) -> DerivationCheck {
    delta.check.clone()
}

/// The homomorphism `Ph(A) -> B` with `x_i -> ρ(x_i)`, `dx_i -> δ(x_i)`.
pub fn induced_hom(ph: &PhasePresentation, delta: &DerivationSpec) -> Result<AlgebraHom> {
    if ph.base.presentation() != delta.source().presentation() {
        return Err(Error::Mismatch("phase space of a different algebra".into()));
    }
    if let DerivationCheck::Invalid { relation, witness } = &delta.check {
        return Err(Error::InvalidDerivation { relation: *relation, witness: delta.target().format(witness) });
    }
    let mut images = delta.rho.images().to_vec();
    images.extend(delta.images.iter().cloned());
    let h = AlgebraHom::new(ph.phase.clone(), delta.target().clone(), images)?;
    h.require_valid()?;
    Ok(h)
}

/// Whether `h: Ph(A) -> B` restricts to `ρ` along the embedding and recovers
/// `δ` after the canonical derivation, compared on generators by normal form.
pub fn factors_derivation(ph: &PhasePresentation, h: &AlgebraHom, delta: &DerivationSpec) -> Result<bool> {
    let b = delta.target();
    for i in 0..ph.base.ngens() {
        let x = ph.base.var(i);
        let via_embedding = h.apply(&ph.embedding.images()[i])?;
        if !b.equal(&via_embedding, &delta.rho.apply(&x)?)? {
            return Ok(false);
        }
        if !b.equal(&h.apply(&ph.d(&x))?, &delta.apply(&x)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Ph(φ)`: `x_i -> φ(x_i)`, `dx_i -> d(φ(x_i))`.
pub fn ph_functor(phi: &AlgebraHom, ph_a: &PhasePresentation, ph_b: &PhasePresentation) -> Result<AlgebraHom> {
    phi.require_valid()?;
    if ph_a.base.presentation() != phi.source().presentation()
        || ph_b.base.presentation() != phi.target().presentation()
    {
        return Err(Error::Mismatch("phase spaces do not match the homomorphism".into()));
    }
    let mut images = phi.images().to_vec();
    images.extend(phi.images().iter().map(|im| ph_b.d(im)));
    AlgebraHom::new(ph_a.phase.clone(), ph_b.phase.clone(), images)
}

/// Tangent vectors at `point` read off the points of `Ph(A)`: the
/// dx-coordinates of every point lying over it.
pub fn fiber_over(ph_points: &[Vec<Scalar>], point: &[Scalar]) -> Vec<Vec<Scalar>> {
    let m = point.len();
    ph_points.iter().filter(|q| &q[..m] == point).map(|q| q[m..].to_vec()).collect()
}
