//! Simple right modules as matrix representations, their commutants, and the
//! local function ring generated by the image and inverses of its units.

use std::sync::Arc;

use crate::algebra::FpAlgebra;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::{Field, Scalar};
use crate::freealg::{parse_statements, split_statements, NcPoly, Statement};
use crate::linalg::{Matrix, VectorSpan};

/// Largest module dimension accepted by the subspace search in `is_simple`.
pub const SIMPLE_DIM_LIMIT: usize = 6;
/// Largest module dimension for the intertwiner search between summands.
pub const ISO_DIM_LIMIT: usize = 3;
const VECTOR_LIMIT: u128 = 10_000_000;

/// Generator `i` acts on row vectors by `v -> v · action[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixModule {
    algebra: Arc<FpAlgebra>,
    dim: usize,
    action: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModuleCheck {
    Valid,
    Invalid { relation: usize, witness: Matrix },
}

impl ModuleCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, ModuleCheck::Valid)
    }
}

impl MatrixModule {
    pub fn new(algebra: Arc<FpAlgebra>, action: Vec<Matrix>) -> Result<Self> {
        if action.len() != algebra.ngens() {
            return Err(Error::ArityMismatch { expected: algebra.ngens(), found: action.len() });
        }
        let dim = match action.first() {
            Some(m) => m.rows(),
            None => return Err(Error::Shape("a module needs at least one generator matrix".into())),
        };
        if dim == 0 {
            return Err(Error::Shape("module dimension must be positive".into()));
        }
        for m in &action {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::Shape(format!("{}x{} matrix in a module of dimension {dim}", m.rows(), m.cols())));
            }
            if m.field() != algebra.field() {
                return Err(Error::Mismatch(format!("matrix over {} for an algebra over {}", m.field(), algebra.field())));
            }
        }
        Ok(MatrixModule { algebra, dim, action })
    }

    /// The one-dimensional module of a point.
    pub fn of_point(algebra: Arc<FpAlgebra>, values: &[Scalar]) -> Result<Self> {
        let f = algebra.field();
        let action = values.iter().map(|v| Matrix::from_entries(f, 1, 1, vec![v.clone()])).collect();
        Self::new(algebra, action)
    }

    pub fn algebra(&self) -> &Arc<FpAlgebra> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn action(&self) -> &[Matrix] {
        &self.action
    }

    pub fn field(&self) -> Field {
        self.algebra.field()
    }

    /// Matrix of `p`; a word acts as the product of its letters in order.
    pub fn act(&self, p: &NcPoly) -> Matrix {
        let f = self.field();
        let mut out = Matrix::zeros(f, self.dim, self.dim);
        for (w, c) in p.terms() {
            let mut m = Matrix::identity(f, self.dim);
            for l in w.letters() {
                m = m.mul(&self.action[l]).expect("square");
            }
            out = out.add(&m.scale(c)).expect("square");
        }
        out
    }

    /// Block-diagonal sum of modules over the same algebra.
    pub fn direct_sum(modules: &[MatrixModule]) -> Result<MatrixModule> {
        let first = modules.first().ok_or_else(|| Error::Invalid("empty list of modules".into()))?;
        for m in modules {
            if m.algebra.presentation() != first.algebra.presentation() {
                return Err(Error::Mismatch("modules over different algebras".into()));
            }
        }
        let action = (0..first.action.len())
            .map(|g| Matrix::direct_sum(&modules.iter().map(|m| m.action[g].clone()).collect::<Vec<_>>()))
            .collect();
        MatrixModule::new(first.algebra.clone(), action)
    }
}

pub fn check_module(m: &MatrixModule) -> ModuleCheck {
    for (i, r) in m.algebra.rels().iter().enumerate() {
        let v = m.act(r);
        if !v.entries().iter().all(Scalar::is_negligible) {
            return ModuleCheck::Invalid { relation: i, witness: v };
        }
    }
    ModuleCheck::Valid
}

fn require_valid(m: &MatrixModule) -> Result<()> {
    match check_module(m) {
        ModuleCheck::Valid => Ok(()),
        ModuleCheck::Invalid { relation, witness } => Err(Error::Invalid(format!(
            "relation {relation} acts as the nonzero matrix {witness:?}"
        ))),
    }
}

fn flatten(m: &Matrix) -> Vec<Scalar> {
    m.entries().to_vec()
}

fn unflatten(f: Field, r: usize, v: Vec<Scalar>) -> Matrix {
    Matrix::from_entries(f, r, r, v)
}

fn row_times(v: &[Scalar], m: &Matrix) -> Vec<Scalar> {
    (0..m.cols())
        .map(|j| v.iter().enumerate().fold(m.field().zero(), |acc, (i, x)| &acc + &(x * &m[(i, j)])))
        .collect()
}

fn cyclic_span_is_full(v: &[Scalar], action: &[Matrix], f: Field) -> bool {
    let r = v.len();
    let mut span = VectorSpan::new(f, r);
    let mut queue = vec![v.to_vec()];
    span.insert(v);
    while let Some(u) = queue.pop() {
        for a in action {
            let w = row_times(&u, a);
            if span.insert(&w) {
                if span.is_full() {
                    return true;
                }
                queue.push(w);
            }
        }
    }
    span.is_full()
}

pub fn is_simple(m: &MatrixModule) -> Result<bool> {
    is_simple_with(m, Exec::default())
}

/// Every nonzero vector generates the whole space. Only vectors whose first
/// nonzero entry is 1 are tried, since scalars do not change the span.
pub fn is_simple_with(m: &MatrixModule, exec: Exec) -> Result<bool> {
    let f = m.field();
    let Field::Prime(p) = f else {
        return Err(Error::UnsupportedField { needed: "a prime field", field: f.name() });
    };
    if m.dim > SIMPLE_DIM_LIMIT {
        return Err(Error::ModuleTooLarge { dim: m.dim, limit: SIMPLE_DIM_LIMIT });
    }
    let r = m.dim;
    let size = (p as u128).pow(r as u32);
    if size > VECTOR_LIMIT {
        return Err(Error::SearchSpace { size, limit: VECTOR_LIMIT });
    }
    let p = p as u64;
    let witness = exec.find_first(size as u64, |idx| {
        let mut digits = vec![0u64; r];
        let mut k = idx;
        for d in digits.iter_mut().rev() {
            *d = k % p;
            k /= p;
        }
        match digits.iter().find(|&&d| d != 0) {
            Some(1) => {}
            _ => return false,
        }
        let v: Vec<Scalar> = digits.iter().map(|&d| f.from_i64(d as i64)).collect();
        !cyclic_span_is_full(&v, &m.action, f)
    });
    Ok(witness.is_none())
}

/// Solutions `X` of `A_g X = X B_g` for every generator `g`, as `r×s` matrices.
fn intertwiners(a: &[Matrix], b: &[Matrix], f: Field) -> Vec<Matrix> {
    let r = a.first().map_or(0, Matrix::rows);
    let s = b.first().map_or(0, Matrix::rows);
    let n = r * s;
    let mut eqs = Matrix::zeros(f, a.len() * n, n);
    for (g, (ag, bg)) in a.iter().zip(b).enumerate() {
        for i in 0..r {
            for j in 0..s {
                let row = g * n + i * s + j;
                // (A X)_ij = Σ_k A_ik X_kj, (X B)_ij = Σ_k X_ik B_kj
                for k in 0..r {
                    let t = &eqs[(row, k * s + j)] + &ag[(i, k)];
                    eqs[(row, k * s + j)] = t;
                }
                for k in 0..s {
                    let t = &eqs[(row, i * s + k)] - &bg[(k, j)];
                    eqs[(row, i * s + k)] = t;
                }
            }
        }
    }
    if a.is_empty() {
        eqs = Matrix::zeros(f, 0, n);
    }
    eqs.null_space().into_iter().map(|v| Matrix::from_entries(f, r, s, v)).collect()
}

/// `End_A(M)` as a linear span of matrices.
#[derive(Clone, Debug)]
pub struct CommutantBasis {
    pub module: MatrixModule,
    pub basis: Vec<Matrix>,
}

impl CommutantBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn span(&self) -> VectorSpan {
        let mut s = VectorSpan::new(self.module.field(), self.module.dim * self.module.dim);
        for b in &self.basis {
            s.insert(&flatten(b));
        }
        s
    }

    /// Over a prime field with at most `limit` elements, whether every nonzero
    /// element is invertible; `None` when the check is out of reach.
    pub fn is_division_ring(&self, limit: u64) -> Option<bool> {
        let Field::Prime(p) = self.module.field() else { return None };
        let k = self.basis.len() as u32;
        let total = (p as u64).checked_pow(k).filter(|&t| t <= limit)?;
        let f = self.module.field();
        let r = self.module.dim;
        Some((1..total).all(|mut idx| {
            let mut m = Matrix::zeros(f, r, r);
            for b in &self.basis {
                let c = f.from_i64((idx % p as u64) as i64);
                idx /= p as u64;
                m = m.add(&b.scale(&c)).expect("square");
            }
            m.is_invertible()
        }))
    }
}

pub fn commutant(m: &MatrixModule) -> CommutantBasis {
    let basis = intertwiners(&m.action, &m.action, m.field());
    CommutantBasis { module: m.clone(), basis }
}

/// An isomorphism `M_a -> M_b` of modules of equal dimension, if one exists
/// among the intertwiners. Exhaustive over small prime fields; otherwise
/// basis elements are tried, which suffices for simple modules.
pub fn find_isomorphism(a: &MatrixModule, b: &MatrixModule) -> Option<Matrix> {
    if a.dim != b.dim {
        return None;
    }
    let f = a.field();
    let sols = intertwiners(&a.action, &b.action, f);
    if sols.is_empty() {
        return None;
    }
    if let Field::Prime(p) = f {
        let p = p as u64;
        if let Some(total) = p.checked_pow(sols.len() as u32).filter(|&t| t <= 1_000_000) {
            return (1..total).find_map(|mut idx| {
                let mut m = Matrix::zeros(f, a.dim, a.dim);
                for s in &sols {
                    m = m.add(&s.scale(&f.from_i64((idx % p) as i64))).expect("square");
                    idx /= p;
                }
                m.is_invertible().then_some(m)
            });
        }
    }
    sols.into_iter().find(Matrix::is_invertible)
}

#[derive(Clone, Debug, PartialEq)]
enum Step {
    Gen(usize),
    /// Inverse of the `k`-th adjoined unit.
    Inv(usize),
}

#[derive(Clone, Debug)]
struct Unit {
    element: Matrix,
    inverse: Matrix,
    /// Coordinates of `element` over the spanning products.
    combo: Vec<Scalar>,
    /// Number of products that existed when the unit was adjoined.
    after: usize,
}

/// Span of products of generator images and adjoined inverses, each product
/// remembered as a word so it can be re-evaluated in another algebra.
#[derive(Clone, Debug)]
struct Closure {
    field: Field,
    r: usize,
    products: Vec<(Vec<Step>, Matrix)>,
    units: Vec<Unit>,
    span: VectorSpan,
}

impl Closure {
    fn run(
        gens: &[Matrix],
        field: Field,
        r: usize,
        mut pick: impl FnMut(&VectorSpan) -> Vec<Matrix>,
        mut is_unit: impl FnMut(&Matrix) -> bool,
    ) -> Result<Closure> {
        let mut c = Closure { field, r, products: Vec::new(), units: Vec::new(), span: VectorSpan::new(field, r * r) };
        c.push(Vec::new(), Matrix::identity(field, r));
        loop {
            // Right multiplication by every letter, breadth first. After new
            // units appear the pass restarts so old products meet the new letters.
            let mut i = 0;
            while i < c.products.len() {
                let (word, m) = c.products[i].clone();
                for (g, a) in gens.iter().enumerate() {
                    let mut w = word.clone();
                    w.push(Step::Gen(g));
                    c.push(w, m.mul(a).expect("square"));
                }
                for k in 0..c.units.len() {
                    let mut w = word.clone();
                    w.push(Step::Inv(k));
                    let inv = c.units[k].inverse.clone();
                    c.push(w, m.mul(&inv).expect("square"));
                }
                i += 1;
            }
            let mut grew = false;
            for x in pick(&c.span) {
                if !is_unit(&x) || c.units.iter().any(|u| u.element == x) {
                    continue;
                }
                let inverse = x.inverse().ok_or(Error::NotInvertible)?;
                let combo = c.coordinates(&x).expect("picked from the span");
                let after = c.products.len();
                c.units.push(Unit { element: x, inverse, combo, after });
                grew = true;
            }
            if !grew {
                break;
            }
        }
        Ok(c)
    }

    fn push(&mut self, word: Vec<Step>, m: Matrix) -> bool {
        if self.span.insert(&flatten(&m)) {
            self.products.push((word, m));
            true
        } else {
            false
        }
    }

    /// Coordinates of `x` over the (independent) spanning products.
    fn coordinates(&self, x: &Matrix) -> Option<Vec<Scalar>> {
        let n = self.products.len();
        let rr = self.r * self.r;
        let mut m = Matrix::zeros(self.field, rr, n + 1);
        for (j, (_, p)) in self.products.iter().enumerate() {
            for (k, e) in p.entries().iter().enumerate() {
                m[(k, j)] = e.clone();
            }
        }
        for (k, e) in x.entries().iter().enumerate() {
            m[(k, n)] = e.clone();
        }
        let sol = m.null_space().into_iter().find(|v| !v[n].is_negligible())?;
        let scale = -sol[n].inv().expect("nonzero");
        Some(sol[..n].iter().map(|c| c * &scale).collect())
    }

    fn basis(&self) -> Vec<Matrix> {
        self.span.basis().iter().map(|v| unflatten(self.field, self.r, v.clone())).collect()
    }
}

/// `A_M` inside `End_k(M)`.
#[derive(Clone, Debug)]
pub struct LocalRing {
    pub module: MatrixModule,
    pub basis: Vec<Matrix>,
    /// Elements whose inverses were adjoined, in the order they were found.
    pub adjoined_inverses: Vec<Matrix>,
    blocks: Vec<usize>,
    closure: Closure,
}

impl LocalRing {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, x: &Matrix) -> bool {
        x.rows() == self.module.dim && x.cols() == self.module.dim && self.closure.span.contains(&flatten(x))
    }

    /// Sizes of the diagonal blocks (one per summand).
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Runs the closure again starting from this ring's basis as extra
    /// generators; a closed ring comes back unchanged.
    pub fn reclose(&self) -> Result<LocalRing> {
        let mut gens = self.module.action.clone();
        gens.extend(self.basis.iter().cloned());
        let comm = block_commutant(&self.module, &self.blocks);
        build(self.module.clone(), &gens, self.blocks.clone(), &comm)
    }

    /// Witness for the universal property: given target matrices `h` for the
    /// generators (a homomorphism into a matrix algebra sending the adjoined
    /// units to units), produce the unique `ψ` on this ring extending `h`.
    pub fn factor_through(&self, h: &[Matrix]) -> Result<Factorization> {
        factor(&self.closure, &self.module.action, h)
    }
}

/// A linear map on a closure ring, stored on its spanning products.
#[derive(Clone, Debug)]
pub struct Factorization {
    closure_field: Field,
    source: Vec<Matrix>,
    target: Vec<Matrix>,
    source_gens: Vec<Matrix>,
    target_gens: Vec<Matrix>,
    closure: Closure,
}

impl Factorization {
    /// `ψ(x)` for `x` in the ring.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let coords = self.closure.coordinates(x).ok_or_else(|| Error::Invalid("element outside the ring".into()))?;
        let t = &self.target[0];
        let mut out = Matrix::zeros(self.closure_field, t.rows(), t.cols());
        for (c, m) in coords.iter().zip(&self.target) {
            out = out.add(&m.scale(c)).expect("same shape");
        }
        Ok(out)
    }

    /// `ψ ∘ g = h` on generators and `ψ` multiplicative on spanning products.
    pub fn verify(&self) -> Result<bool> {
        for (a, b) in self.source_gens.iter().zip(&self.target_gens) {
            if &self.apply(a)? != b {
                return Ok(false);
            }
        }
        for (i, (x, hx)) in self.source.iter().zip(&self.target).enumerate() {
            for (y, hy) in self.source.iter().zip(&self.target).skip(i) {
                let xy = x.mul(y).expect("square");
                if self.apply(&xy)? != hx.mul(hy).expect("square") {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn factor(c: &Closure, gens: &[Matrix], h: &[Matrix]) -> Result<Factorization> {
    if h.len() != gens.len() {
        return Err(Error::ArityMismatch { expected: gens.len(), found: h.len() });
    }
    let Some(s) = h.first().map(Matrix::rows) else {
        return Err(Error::Invalid("no generator images".into()));
    };
    if h.iter().any(|m| m.rows() != s || m.cols() != s || m.field() != c.field) {
        return Err(Error::Shape("generator images must be square of one size".into()));
    }
    let f = c.field;
    let mut unit_inv: Vec<Matrix> = Vec::new();
    let mut values: Vec<Matrix> = Vec::new();
    // A unit only involves products older than itself, and a product only
    // involves units older than itself, so one pass in order suffices.
    for (i, (w, _)) in c.products.iter().enumerate() {
        while let Some(u) = c.units.get(unit_inv.len()).filter(|u| u.after <= i) {
            let mut img = Matrix::zeros(f, s, s);
            for (coef, v) in u.combo.iter().zip(&values) {
                img = img.add(&v.scale(coef)).expect("same shape");
            }
            unit_inv.push(img.inverse().ok_or(Error::NotInvertible)?);
        }
        let mut m = Matrix::identity(f, s);
        for st in w {
            let next = match st {
                Step::Gen(g) => &h[*g],
                Step::Inv(k) => &unit_inv[*k],
            };
            m = m.mul(next).expect("square");
        }
        values.push(m);
    }
    // Well defined: any linear relation among products also holds for the images.
    let rr = c.r * c.r;
    let mut both = Matrix::zeros(f, c.products.len(), rr + s * s);
    for (i, ((_, src), tgt)) in c.products.iter().zip(&values).enumerate() {
        for (k, e) in src.entries().iter().chain(tgt.entries()).enumerate() {
            both[(i, k)] = e.clone();
        }
    }
    if both.rank() != c.products.len() {
        return Err(Error::Invalid("the generator images do not factor through the ring".into()));
    }
    Ok(Factorization {
        closure_field: f,
        source: c.products.iter().map(|(_, m)| m.clone()).collect(),
        target: values,
        source_gens: gens.to_vec(),
        target_gens: h.to_vec(),
        closure: c.clone(),
    })
}

fn block_offsets(blocks: &[usize]) -> Vec<(usize, usize)> {
    let mut at = 0;
    blocks
        .iter()
        .map(|&b| {
            let o = at;
            at += b;
            (o, b)
        })
        .collect()
}

fn invertible_in_blocks(x: &Matrix, blocks: &[usize]) -> bool {
    block_offsets(blocks).iter().all(|&(o, b)| x.block(o, o, b, b).is_invertible())
}

/// Commutant of each diagonal block, embedded block-diagonally.
fn block_commutant(m: &MatrixModule, blocks: &[usize]) -> VectorSpan {
    let f = m.field();
    let r = m.dim;
    let mut span = VectorSpan::new(f, r * r);
    for (o, b) in block_offsets(blocks) {
        let acts: Vec<Matrix> = m.action.iter().map(|a| a.block(o, o, b, b)).collect();
        for x in intertwiners(&acts, &acts, f) {
            let mut big = Matrix::zeros(f, r, r);
            for i in 0..b {
                for j in 0..b {
                    big[(o + i, o + j)] = x[(i, j)].clone();
                }
            }
            span.insert(&flatten(&big));
        }
    }
    span
}

fn build(module: MatrixModule, gens: &[Matrix], blocks: Vec<usize>, comm: &VectorSpan) -> Result<LocalRing> {
    let f = module.field();
    let r = module.dim;
    let closure = Closure::run(
        gens,
        f,
        r,
        |span| span.intersect(comm).into_iter().map(|v| unflatten(f, r, v)).collect(),
        |x| invertible_in_blocks(x, &blocks),
    )?;
    Ok(LocalRing {
        basis: closure.basis(),
        adjoined_inverses: closure.units.iter().map(|u| u.element.clone()).collect(),
        module,
        blocks,
        closure,
    })
}

/// Span of words in the generator images, closed under inverses of the
/// elements that also lie in the commutant and are invertible.
pub fn local_ring(m: &MatrixModule) -> Result<LocalRing> {
    require_valid(m)?;
    let blocks = vec![m.dim];
    let comm = block_commutant(m, &blocks);
    build(m.clone(), &m.action, blocks, &comm)
}

/// The local ring of the direct sum, with the commutant taken per block.
/// Summands must be simple and pairwise non-isomorphic.
pub fn product_local_rings(ms: &[MatrixModule]) -> Result<LocalRing> {
    for m in ms {
        require_valid(m)?;
        if matches!(m.field(), Field::Prime(_)) && m.dim <= SIMPLE_DIM_LIMIT && !is_simple(m)? {
            return Err(Error::Invalid("summand is not simple".into()));
        }
    }
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            if ms[i].dim == ms[j].dim && ms[i].dim <= ISO_DIM_LIMIT && find_isomorphism(&ms[i], &ms[j]).is_some() {
                return Err(Error::IsomorphicModules(i, j));
            }
        }
    }
    let sum = MatrixModule::direct_sum(ms)?;
    let blocks: Vec<usize> = ms.iter().map(|m| m.dim).collect();
    let comm = block_commutant(&sum, &blocks);
    let action = sum.action.clone();
    build(sum, &action, blocks, &comm)
}

/// Closure of the image of a homomorphism into a matrix algebra (the module
/// `target`), adjoining inverses of the elements accepted by `unit_test`.
pub fn localize_along(target: &MatrixModule, unit_test: impl Fn(&Matrix) -> bool) -> Result<LocalRing> {
    require_valid(target)?;
    let f = target.field();
    let r = target.dim;
    let closure = Closure::run(
        &target.action,
        f,
        r,
        |span| span.basis().iter().map(|v| unflatten(f, r, v.clone())).collect(),
        &unit_test,
    )?;
    Ok(LocalRing {
        basis: closure.basis(),
        adjoined_inverses: closure.units.iter().map(|u| u.element.clone()).collect(),
        module: target.clone(),
        blocks: vec![r],
        closure,
    })
}

fn parse_matrix(st: &Statement, text: &str, col: usize, field: Field, r: usize) -> Result<Matrix> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix("[[")
        .and_then(|s| s.strip_suffix("]]"))
        .ok_or_else(|| st.error(col, "matrix must look like [[a,b],[c,d]]"))?;
    let rows: Vec<Vec<Scalar>> = inner
        .split("],[")
        .map(|row| {
            row.split(',')
                .map(|e| field.parse_scalar(e).ok_or_else(|| st.error(col, format!("bad matrix entry `{e}`"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if rows.len() != r || rows.iter().any(|row| row.len() != r) {
        return Err(st.error(col, format!("matrix is not {r}x{r}")));
    }
    Matrix::from_rows(field, rows)
}

/// A presentation followed by one or more `module r=N` blocks, each giving a
/// matrix for every generator: `module r=2; x = [[0,1],[0,0]]; y = ...`.
pub fn parse_module_file(text: &str) -> Result<(Arc<FpAlgebra>, Vec<MatrixModule>)> {
    let stmts = split_statements(text);
    let (pres, used) = parse_statements(&stmts)?;
    let algebra = Arc::new(FpAlgebra::new(pres));
    let f = algebra.field();
    let n = algebra.ngens();
    let mut modules = Vec::new();
    let mut current: Option<(usize, Vec<Option<Matrix>>, &Statement)> = None;
    let finish = |cur: (usize, Vec<Option<Matrix>>, &Statement)| -> Result<MatrixModule> {
        let (_, mats, st) = cur;
        let mut action = Vec::new();
        for (g, m) in mats.into_iter().enumerate() {
            action.push(m.ok_or_else(|| {
                st.error(st.column, format!("module has no matrix for `{}`", algebra.gens()[g]))
            })?);
        }
        MatrixModule::new(algebra.clone(), action)
    };
    for st in &stmts[used..] {
        if st.keyword() == "module" {
            if let Some(cur) = current.take() {
                modules.push(finish(cur)?);
            }
            let (rest, col) = st.rest();
            let r: usize = rest
                .strip_prefix("r=")
                .or_else(|| rest.strip_prefix("r ="))
                .map(str::trim)
                .and_then(|s| s.parse().ok())
                .filter(|&r| r > 0)
                .ok_or_else(|| st.error(col, "expected `module r=N`"))?;
            current = Some((r, vec![None; n], st));
            continue;
        }
        let Some((r, mats, _)) = current.as_mut() else {
            return Err(st.error(st.column, format!("unexpected `{}` statement", st.keyword())));
        };
        let Some((name, value)) = st.text.split_once('=') else {
            return Err(st.error(st.column, "expected `generator = matrix`"));
        };
        let name = name.trim();
        let g = algebra.gens().iter().position(|x| x == name).ok_or_else(|| Error::UnknownGenerator {
            name: name.to_string(),
            line: st.line,
            column: st.column,
        })?;
        let col = st.column + name.len() + 1;
        mats[g] = Some(parse_matrix(st, value, col, f, *r)?);
    }
    if let Some(cur) = current.take() {
        modules.push(finish(cur)?);
    }
    Ok((algebra, modules))
}
