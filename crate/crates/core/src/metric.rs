//! The tensor square `Ph(A) ⊗_A Ph(A)`, the Euclidean metric element,
//! pointwise tangent spaces and Gram matrices, tensor fields and bundles.
//!
//! The second differential copy of `x` is named `e` + name (printed in
//! presentations as such), so `dx` and `ex` are the two factors.

use std::sync::Arc;

use crate::algebra::{abelianization, compose_hom, linear_part, tensor_over_k, AlgebraHom, FpAlgebra};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{Field, Scalar};
use crate::freealg::{NcPoly, Presentation, Word};
use crate::linalg::Matrix;
use crate::phase::{differentiate, prefixed_names};
use crate::points::{check_point, enumerate_points, Point};

/// Entries of a Gram matrix at or below this count as non-positive over R.
pub const DEFINITE_EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct TensorSquarePresentation {
    base: Arc<FpAlgebra>,
    algebra: Arc<FpAlgebra>,
}

impl TensorSquarePresentation {
    pub fn base(&self) -> &Arc<FpAlgebra> {
        &self.base
    }

    pub fn algebra(&self) -> &Arc<FpAlgebra> {
        &self.algebra
    }

    pub fn presentation(&self) -> &Presentation {
        self.algebra.presentation()
    }

    /// Which block a letter belongs to: 0 for `x`, 1 for `dx`, 2 for `ex`.
    pub fn block_of(&self, letter: usize) -> usize {
        letter / self.base.ngens()
    }
}

/// Generators `x`, `dx`, `ex`; relations `J`, `dJ` and `dJ` renamed to `e`.
pub fn tensor_square(a: &Arc<FpAlgebra>) -> Result<TensorSquarePresentation> {
    let m = a.ngens();
    let gens = prefixed_names(a.gens(), &["d", "e"])?;
    let mut rels = a.rels().to_vec();
    for r in a.rels() {
        rels.push(differentiate(r, m));
    }
    for r in a.rels() {
        rels.push(differentiate(r, 2 * m));
    }
    let pres = Presentation::new(a.field(), gens, rels, Some(a.presentation().bound()))?;
    Ok(TensorSquarePresentation { base: a.clone(), algebra: Arc::new(FpAlgebra::new(pres)) })
}

/// Every word has exactly one `dx` letter and one `ex` letter.
fn is_bilinear(p: &NcPoly, m: usize) -> bool {
    p.words().all(|w| {
        let d = w.letters().filter(|&l| l >= m && l < 2 * m).count();
        let e = w.letters().filter(|&l| l >= 2 * m).count();
        d == 1 && e == 1
    })
}

#[derive(Clone, Debug)]
pub struct MetricTensor {
    pub ambient: Arc<TensorSquarePresentation>,
    g_of_t: NcPoly,
}

impl MetricTensor {
    pub fn new(ambient: Arc<TensorSquarePresentation>, g_of_t: NcPoly) -> Result<Self> {
        ambient.presentation().check(&g_of_t)?;
        if !is_bilinear(&g_of_t, ambient.base.ngens()) {
            return Err(Error::Invalid(format!(
                "{} is not bilinear in the two differential copies",
                ambient.algebra.format(&g_of_t)
            )));
        }
        Ok(MetricTensor { ambient, g_of_t })
    }

    pub fn g_of_t(&self) -> &NcPoly {
        &self.g_of_t
    }

    /// Coefficient matrix `G` with `g = Σ G[a][b] dx_a ex_b`, for tensors
    /// with constant coefficients. Letter order inside a word is ignored.
    pub fn coefficient_matrix(&self) -> Result<Matrix> {
        let m = self.ambient.base.ngens();
        let mut g = Matrix::zeros(self.ambient.base.field(), m, m);
        for (w, c) in self.g_of_t.terms() {
            if w.len() != 2 {
                return Err(Error::Invalid("tensor has non-constant coefficients".into()));
            }
            let mut a = None;
            let mut b = None;
            for l in w.letters() {
                match self.ambient.block_of(l) {
                    1 => a = Some(l - m),
                    _ => b = Some(l - 2 * m),
                }
            }
            let (a, b) = (a.expect("bilinear"), b.expect("bilinear"));
            g[(a, b)] = &g[(a, b)] + c;
        }
        Ok(g)
    }

    /// `g` transported along the linear change of chart `x_j -> Σ_i l[i][j] x_i`
    /// of a free or commutative algebra, applied to all three blocks.
    pub fn pullback_linear(&self, l: &Matrix) -> Result<MetricTensor> {
        let base = &self.ambient.base;
        let h = crate::algebra::hom_of_matrix(l, base)?;
        let m = base.ngens();
        let mut images = Vec::with_capacity(3 * m);
        for block in 0..3 {
            for im in h.images() {
                images.push(im.map_letters(|i| i + block * m));
            }
        }
        let g = self.g_of_t.substitute(&images);
        MetricTensor::new(self.ambient.clone(), g)
    }
}

pub fn euclidean_metric(a: &Arc<FpAlgebra>) -> Result<MetricTensor> {
    let ts = Arc::new(tensor_square(a)?);
    let m = a.ngens();
    let f = a.field();
    let mut g = NcPoly::zero();
    for i in 0..m {
        g.add_term(Word::from_letters([m + i, 2 * m + i]), f.one());
    }
    MetricTensor::new(ts, g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentSpaceAtPoint {
    pub point: Point,
    /// Rows form a basis of the tangent vectors.
    pub basis: Matrix,
    pub dim: usize,
}

/// Linear equations in commuting unknowns `dx` obtained from `d(r)` at `p`:
/// one row per relation, one column per generator.
pub fn linearized_relations(a: &FpAlgebra, p: &Point) -> Matrix {
    let m = a.ngens();
    let f = a.field();
    let mut eqs = Matrix::zeros(f, a.rels().len(), m);
    for (k, r) in a.rels().iter().enumerate() {
        for (w, c) in differentiate(r, m).terms() {
            let mut coef = c.clone();
            let mut unknown = None;
            for l in w.letters() {
                if l >= m {
                    unknown = Some(l - m);
                } else {
                    coef = &coef * &p.values()[l];
                }
            }
            let j = unknown.expect("one differential letter per word");
            eqs[(k, j)] = &eqs[(k, j)] + &coef;
        }
    }
    eqs
}

impl TangentSpaceAtPoint {
    /// Gram-Schmidt for the Euclidean inner product. `None` over prime
    /// fields or when a norm has no square root in the field.
    pub fn orthonormalized(&self) -> Option<TangentSpaceAtPoint> {
        let f = self.basis.field();
        if !f.is_ordered() {
            return None;
        }
        let dot = |a: &[Scalar], b: &[Scalar]| a.iter().zip(b).fold(f.zero(), |acc, (x, y)| &acc + &(x * y));
        let mut out: Vec<Vec<Scalar>> = Vec::new();
        for row in self.basis.to_rows() {
            let mut v = row;
            for e in &out {
                let c = dot(&v, e);
                v = v.iter().zip(e).map(|(x, y)| x - &(&c * y)).collect();
            }
            let inv = dot(&v, &v).sqrt()?.inv()?;
            out.push(v.iter().map(|x| x * &inv).collect());
        }
        let basis = if out.is_empty() { self.basis.clone() } else { Matrix::from_rows(f, out).ok()? };
        Some(TangentSpaceAtPoint { point: self.point.clone(), basis, dim: self.dim })
    }
}

pub fn tangent_space_at(a: &FpAlgebra, p: &Point) -> Result<TangentSpaceAtPoint> {
    check_point(a, p)?;
    let m = a.ngens();
    let eqs = linearized_relations(a, p);
    let null = if a.rels().is_empty() {
        Matrix::identity(a.field(), m).to_rows()
    } else {
        eqs.null_space()
    };
    let dim = null.len();
    let basis = if dim == 0 { Matrix::zeros(a.field(), 0, m) } else { Matrix::from_rows(a.field(), null)? };
    Ok(TangentSpaceAtPoint { point: p.clone(), basis, dim })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerProductMatrix {
    pub gram: Matrix,
    /// `None` over fields without an order.
    pub positive_definite: Option<bool>,
}

/// Symmetric with all leading principal minors positive.
pub fn is_positive_definite(gram: &Matrix) -> Option<bool> {
    let f = gram.field();
    if !f.is_ordered() {
        return None;
    }
    if !gram.is_symmetric() {
        return Some(false);
    }
    let minors = gram.leading_principal_minors().ok()?;
    Some(minors.iter().all(|d| match f {
        Field::Real => d.to_f64() > DEFINITE_EPS,
        _ => d.signum() == Some(std::cmp::Ordering::Greater),
    }))
}

/// `gram[a][b] = g(x := p, dx := row a, ex := row b)`.
pub fn metric_at(g: &MetricTensor, t: &TangentSpaceAtPoint) -> Result<InnerProductMatrix> {
    let base = &g.ambient.base;
    let m = base.ngens();
    if t.point.dim() != m || t.basis.cols() != m {
        return Err(Error::ArityMismatch { expected: m, found: t.basis.cols() });
    }
    let f = base.field();
    let n = t.dim;
    let mut gram = Matrix::zeros(f, n, n);
    for a in 0..n {
        for b in 0..n {
            let mut values = t.point.values().to_vec();
            values.extend_from_slice(t.basis.row(a));
            values.extend_from_slice(t.basis.row(b));
            gram[(a, b)] = g.g_of_t.eval_scalars(&values, f);
        }
    }
    let positive_definite = is_positive_definite(&gram);
    Ok(InnerProductMatrix { gram, positive_definite })
}

#[derive(Clone, Debug, PartialEq)]
pub enum RiemannCheck {
    Yes { vacuous: bool },
    No { witness: Point },
}

pub fn is_riemannian(g: &MetricTensor, sample: &[Point]) -> Result<RiemannCheck> {
    is_riemannian_with(g, sample, Exec::default())
}

pub fn is_riemannian_with(g: &MetricTensor, sample: &[Point], exec: Exec) -> Result<RiemannCheck> {
    let base = &g.ambient.base;
    if !base.field().is_ordered() {
        return Err(Error::UnsupportedField { needed: "an ordered field", field: base.field().name() });
    }
    let verdicts = exec.map(sample, |p| -> Result<bool> {
        let t = tangent_space_at(base, p)?;
        Ok(metric_at(g, &t)?.positive_definite == Some(true))
    });
    for (p, v) in sample.iter().zip(verdicts) {
        if !v? {
            return Ok(RiemannCheck::No { witness: p.clone() });
        }
    }
    Ok(RiemannCheck::Yes { vacuous: sample.is_empty() })
}

#[derive(Clone, Debug, PartialEq)]
pub enum TensorFieldCheck {
    Commutes,
    Fails { point: Point, generator: String },
}

/// `h: A[t] -> Ph(A) ⊗_A Ph(A)` (see [`with_parameter`]). At each sample point the base generators
/// must evaluate to the point's coordinates on every pair of tangent vectors
/// and `h(t)` must be bilinear in the two differential copies.
pub fn check_tensor_field(h: &AlgebraHom, ts: &TensorSquarePresentation, sample: &[Point]) -> Result<TensorFieldCheck> {
    h.require_valid()?;
    let base = &ts.base;
    let m = base.ngens();
    if h.target().presentation() != ts.presentation() || h.source().ngens() != m + 1 {
        return Err(Error::Mismatch("expected a map from A[t] into the tensor square".into()));
    }
    let f = base.field();
    let t_name = h.source().gens()[m].clone();
    for p in sample {
        let tan = tangent_space_at(base, p)?;
        let mut vectors: Vec<Vec<Scalar>> = tan.basis.to_rows();
        if vectors.is_empty() {
            vectors.push(vec![f.zero(); m]);
        }
        for (i, im) in h.images()[..m].iter().enumerate() {
            for u in &vectors {
                for w in &vectors {
                    let mut values = p.values().to_vec();
                    values.extend_from_slice(u);
                    values.extend_from_slice(w);
                    if im.eval_scalars(&values, f) != p.values()[i] {
                        return Ok(TensorFieldCheck::Fails { point: p.clone(), generator: base.gens()[i].clone() });
                    }
                }
            }
        }
        if !is_bilinear(&h.images()[m], m) {
            return Ok(TensorFieldCheck::Fails { point: p.clone(), generator: t_name });
        }
    }
    Ok(TensorFieldCheck::Commutes)
}

/// `A` with one extra generator `t` and no further relations. `t` is not
/// made central: metric elements do not commute with coordinates in the
/// noncommutative tensor square.
pub fn with_parameter(base: &FpAlgebra) -> Result<FpAlgebra> {
    let mut gens = base.gens().to_vec();
    let t = std::iter::successors(Some("t".to_string()), |n| Some(format!("{n}_2")))
        .find(|n| !gens.contains(n))
        .expect("unbounded");
    gens.push(t);
    let pres = Presentation::new(base.field(), gens, base.rels().to_vec(), Some(base.presentation().bound()))?;
    Ok(FpAlgebra::new(pres))
}

/// The tensor field fixing `A` and sending `t` to `g`.
pub fn tensor_field_of(g: &MetricTensor) -> Result<AlgebraHom> {
    let base = &g.ambient.base;
    let source = Arc::new(with_parameter(base)?);
    let mut images: Vec<NcPoly> = (0..base.ngens()).map(|i| g.ambient.algebra.var(i)).collect();
    images.push(g.g_of_t.clone());
    AlgebraHom::new(source, g.ambient.algebra.clone(), images)
}

/// `E = (A ⊗ k<fiber>)/I` with structure map `A -> E`.
#[derive(Clone, Debug)]
pub struct VectorBundle {
    pub base: Arc<FpAlgebra>,
    pub total: Arc<FpAlgebra>,
    pub structure: AlgebraHom,
    pub fiber_gens: Vec<String>,
    ideal: Vec<NcPoly>,
}

impl VectorBundle {
    /// `ideal` is parsed over the base generators followed by `fiber_gens`.
    pub fn new(base: &Arc<FpAlgebra>, fiber_gens: &[&str], ideal: &[&str]) -> Result<Self> {
        let f = base.field();
        let fiber = FpAlgebra::new(Presentation::new(f, fiber_gens.iter().map(|s| s.to_string()).collect(), Vec::new(), None)?);
        for g in fiber_gens {
            if base.gens().iter().any(|b| b == g) {
                return Err(Error::NameClash(g.to_string()));
            }
        }
        let prod = tensor_over_k(base, &fiber)?;
        let mut gens = prod.gens().to_vec();
        let mut rels = prod.rels().to_vec();
        let bound = prod.presentation().bound();
        let mut listed = Vec::new();
        for text in ideal {
            let p = prod.poly(text)?;
            listed.push(p.clone());
            rels.push(p);
        }
        let total = Arc::new(FpAlgebra::new(Presentation::new(f, std::mem::take(&mut gens), rels, Some(bound))?));
        let images = (0..base.ngens()).map(|i| total.var(i)).collect();
        let structure = AlgebraHom::new(base.clone(), total.clone(), images)?;
        Ok(VectorBundle {
            base: base.clone(),
            total,
            structure,
            fiber_gens: fiber_gens.iter().map(|s| s.to_string()).collect(),
            ideal: listed,
        })
    }

    pub fn ideal(&self) -> &[NcPoly] {
        &self.ideal
    }
}

/// The listed ideal with base generators evaluated at `p`.
pub fn bundle_fiber_at(e: &VectorBundle, p: &Point) -> Result<Presentation> {
    check_point(&e.base, p)?;
    let f = e.base.field();
    let mut images: Vec<NcPoly> = p.values().iter().map(|v| NcPoly::constant(v.clone())).collect();
    images.extend((0..e.fiber_gens.len()).map(|j| NcPoly::var(j, f)));
    let rels = e.ideal.iter().map(|r| r.substitute(&images)).collect();
    Presentation::new(f, e.fiber_gens.clone(), rels, None)
}

#[derive(Clone, Debug, PartialEq)]
pub enum BundleCheck {
    Yes,
    No { point: Point, reason: String },
}

/// Over `F_p`: every sampled fiber has `p^k` points and its abelianized ideal
/// completes to rules of degree at most one (plus letter commutations).
pub fn check_bundle_rank(e: &VectorBundle, sample: &[Point], k: u32) -> Result<BundleCheck> {
    let f = e.base.field();
    let Field::Prime(p) = f else {
        return Err(Error::UnsupportedField { needed: "a prime field", field: f.name() });
    };
    for pt in sample {
        let fiber = Arc::new(FpAlgebra::new(bundle_fiber_at(e, pt)?));
        let count = enumerate_points(&fiber)?.len() as u128;
        let expected = (p as u128).pow(k);
        if count != expected {
            return Ok(BundleCheck::No {
                point: pt.clone(),
                reason: format!("fiber has {count} points, expected {expected}"),
            });
        }
        let ab = abelianization(&fiber);
        for rule in ab.rewrite().rules() {
            let commutation = rule.lead.len() == 2 && {
                let l: Vec<usize> = rule.lead.letters().collect();
                let swapped = Word::from_letters([l[1], l[0]]);
                rule.rest.len() == 1 && rule.rest.coefficient(&swapped).is_some_and(|c| c.is_one())
            };
            if rule.lead.len() > 1 && !commutation {
                let poly = rule.as_poly(f);
                return Ok(BundleCheck::No {
                    point: pt.clone(),
                    reason: format!("nonlinear fiber relation {}", ab.format(&poly)),
                });
            }
        }
    }
    Ok(BundleCheck::Yes)
}

/// A transition between trivializations is admissible when it is linear and invertible.
pub fn check_transition(h: &AlgebraHom) -> Result<bool> {
    h.require_valid()?;
    let l = linear_part(h)?;
    Ok(l.is_square() && !l.determinant()?.is_zero())
}

/// `s ∘ f = id` on the generators of `A`, up to normal form.
pub fn check_section(s: &AlgebraHom, f: &AlgebraHom) -> Result<bool> {
    s.require_valid()?;
    f.require_valid()?;
    let c = compose_hom(s, f)?;
    let a = f.source();
    for (i, im) in c.images().iter().enumerate() {
        if !a.equal(im, &a.var(i))? {
            return Ok(false);
        }
    }
    Ok(true)
}
