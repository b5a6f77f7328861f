//! Numeric geodesics on the real zero set of an abelianized chart, under the
//! Euclidean metric of the ambient space.
//!
//! Each step moves freely along the velocity, projects back onto the zero set
//! by minimum-norm Newton iterations, then projects the velocity onto the new
//! tangent space and rescales it to unit speed.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::algebra::FpAlgebra;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::Field;

/// Residual accepted by `project_to_chart`.
pub const PROJECTION_TOL: f64 = 1e-12;
pub const MAX_NEWTON_ITERATIONS: usize = 50;
/// Relative size below which a singular value of the Jacobian counts as zero.
const RANK_TOL: f64 = 1e-10;

/// A commutative polynomial with float coefficients, keyed by exponent vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CommPoly {
    terms: Vec<(Vec<u32>, f64)>,
}

impl CommPoly {
    pub fn new(terms: Vec<(Vec<u32>, f64)>) -> Self {
        CommPoly { terms: terms.into_iter().filter(|(_, c)| *c != 0.0).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32)))
            .sum()
    }

    pub fn partial(&self, i: usize, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| e[i] > 0)
            .map(|(e, c)| {
                let mut t = *c * e[i] as f64;
                for (j, (&k, &xj)) in e.iter().zip(x).enumerate() {
                    let k = if j == i { k - 1 } else { k };
                    t *= xj.powi(k as i32);
                }
                t
            })
            .sum()
    }
}

/// The real zero set of the commutative images of the relations.
#[derive(Clone, Debug)]
pub struct RealChart {
    m: usize,
    names: Vec<String>,
    rels: Vec<CommPoly>,
}

impl RealChart {
    pub fn new(names: Vec<String>, rels: Vec<CommPoly>) -> Self {
        RealChart { m: names.len(), names, rels: rels.into_iter().filter(|r| !r.is_zero()).collect() }
    }

    /// Ambient space with no constraints.
    pub fn flat(m: usize) -> Self {
        RealChart::new((0..m).map(|i| format!("x{i}")).collect(), Vec::new())
    }

    /// Letters commute, so each word becomes an exponent vector; relations
    /// that vanish identically (such as commutators) are dropped.
    pub fn from_algebra(a: &FpAlgebra) -> Result<Self> {
        if matches!(a.field(), Field::Prime(_)) {
            return Err(Error::UnsupportedField { needed: "Q or R", field: a.field().name() });
        }
        let m = a.ngens();
        let rels = a
            .rels()
            .iter()
            .map(|r| {
                let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
                for (w, c) in r.terms() {
                    let mut e = vec![0u32; m];
                    for l in w.letters() {
                        e[l] += 1;
                    }
                    *acc.entry(e).or_default() += c.to_f64();
                }
                CommPoly::new(acc.into_iter().collect())
            })
            .collect();
        Ok(RealChart::new(a.gens().to_vec(), rels))
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn relations(&self) -> &[CommPoly] {
        &self.rels
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.rels.len(), self.rels.iter().map(|r| r.eval(x)))
    }

    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.rels.iter().map(|r| r.eval(x).abs()).fold(0.0, f64::max)
    }

    /// Row `k` is the gradient of relation `k`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rels.len(), self.m, |k, i| self.rels[k].partial(i, x))
    }

    /// Largest relative gap between the Jacobian and central differences.
    pub fn jacobian_error(&self, x: &[f64]) -> f64 {
        let j = self.jacobian(x);
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            let h = 1e-6 * x[i].abs().max(1.0);
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += h;
            dn[i] -= h;
            for (k, r) in self.rels.iter().enumerate() {
                let fd = (r.eval(&up) - r.eval(&dn)) / (2.0 * h);
                worst = worst.max((fd - j[(k, i)]).abs() / j[(k, i)].abs().max(1.0));
            }
        }
        worst
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m {
            return Err(Error::ArityMismatch { expected: self.m, found: x.len() });
        }
        Ok(())
    }

    /// `(J Jᵀ)⁻¹` when `J` has full row rank at `x`.
    fn gram_inverse(&self, j: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
        let sv = j.clone().svd(false, false).singular_values;
        let top = sv.iter().cloned().fold(0.0, f64::max);
        if sv.len() < self.rels.len() || sv.iter().any(|&s| s <= RANK_TOL * top.max(1.0)) {
            return Err(Error::RankDeficient(x.to_vec()));
        }
        (j * j.transpose()).try_inverse().ok_or_else(|| Error::RankDeficient(x.to_vec()))
    }
}

/// Minimum-norm Newton iteration `x <- x - Jᵀ (J Jᵀ)⁻¹ F(x)`.
pub fn project_to_chart(x0: &[f64], chart: &RealChart) -> Result<Vec<f64>> {
    chart.check_dim(x0)?;
    let mut x = DVector::from_column_slice(x0);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let f = chart.residual(x.as_slice());
        if f.iter().all(|v| v.abs() <= PROJECTION_TOL) {
            return Ok(x.as_slice().to_vec());
        }
        let j = chart.jacobian(x.as_slice());
        let g = chart.gram_inverse(&j, x.as_slice())?;
        x -= j.transpose() * (g * f);
    }
    let residual = chart.max_residual(x.as_slice());
    if residual <= PROJECTION_TOL {
        return Ok(x.as_slice().to_vec());
    }
    Err(Error::NonConvergence { iterations: MAX_NEWTON_ITERATIONS, residual })
}

/// Orthogonal projection of `v` onto the null space of the Jacobian at `x`.
pub fn tangent_project(v: &[f64], x: &[f64], chart: &RealChart) -> Result<Vec<f64>> {
    chart.check_dim(v)?;
    chart.check_dim(x)?;
    if chart.rels.is_empty() {
        return Ok(v.to_vec());
    }
    let v = DVector::from_column_slice(v);
    let j = chart.jacobian(x);
    let g = chart.gram_inverse(&j, x)?;
    let out = &v - j.transpose() * (g * (&j * &v));
    Ok(out.as_slice().to_vec())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSample {
    pub arclength: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub max_constraint_drift: f64,
    pub max_speed_drift: f64,
    pub steps: usize,
    pub step: f64,
    pub renormalized: bool,
    pub projection_tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicTrace {
    pub samples: Vec<GeodesicSample>,
    pub diagnostics: Diagnostics,
}

impl GeodesicTrace {
    pub fn end(&self) -> &GeodesicSample {
        self.samples.last().expect("a trace has its start sample")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicOptions {
    /// Rescale the velocity to unit length after every step. Turning this
    /// off is for inspecting the drift only.
    pub renormalize: bool,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions { renormalize: true }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(v: Vec<f64>) -> Result<Vec<f64>> {
    let n = norm(&v);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Invalid("initial direction has no tangent component".into()));
    }
    Ok(v.into_iter().map(|x| x / n).collect())
}

pub fn integrate_geodesic(chart: &RealChart, p0: &[f64], v0: &[f64], length: f64, h: f64) -> Result<GeodesicTrace> {
    integrate_geodesic_with(chart, p0, v0, length, h, GeodesicOptions::default())
}

pub fn integrate_geodesic_with(
    chart: &RealChart,
    p0: &[f64],
    v0: &[f64],
    length: f64,
    h: f64,
    opts: GeodesicOptions,
) -> Result<GeodesicTrace> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::Invalid(format!("length must be non-negative, got {length}")));
    }
    let mut x = project_to_chart(p0, chart)?;
    let mut v = unit(tangent_project(v0, &x, chart)?)?;
    let full = (length / h).floor() as usize;
    let rest = length - full as f64 * h;
    let mut steps: Vec<f64> = vec![h; full];
    if rest > 1e-15 * length.max(1.0) {
        steps.push(rest);
    }
    let mut samples = Vec::with_capacity(steps.len() + 1);
    samples.push(GeodesicSample { arclength: 0.0, position: x.clone(), velocity: v.clone() });
    let mut s = 0.0;
    for (n, &dt) in steps.iter().enumerate() {
        let free: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + dt * b).collect();
        x = project_to_chart(&free, chart)?;
        v = tangent_project(&v, &x, chart)?;
        if opts.renormalize {
            v = unit(v)?;
        }
        s = if n < full { (n + 1) as f64 * h } else { s + dt };
        samples.push(GeodesicSample { arclength: s, position: x.clone(), velocity: v.clone() });
    }
    let max_constraint_drift = samples.iter().map(|p| chart.max_residual(&p.position)).fold(0.0, f64::max);
    let max_speed_drift = samples.iter().map(|p| (norm(&p.velocity) - 1.0).abs()).fold(0.0, f64::max);
    Ok(GeodesicTrace {
        diagnostics: Diagnostics {
            max_constraint_drift,
            max_speed_drift,
            steps: steps.len(),
            step: h,
            renormalized: opts.renormalize,
            projection_tol: PROJECTION_TOL,
        },
        samples,
    })
}

/// `max |‖v‖ - 1|` over the samples.
pub fn speed_profile(trace: &GeodesicTrace) -> f64 {
    trace.samples.iter().map(|p| (norm(&p.velocity) - 1.0).abs()).fold(0.0, f64::max)
}

/// Independent geodesics, one per start `(p0, v0)`, in input order.
pub fn integrate_many(
    chart: &RealChart,
    starts: &[(Vec<f64>, Vec<f64>)],
    length: f64,
    h: f64,
    exec: Exec,
) -> Vec<Result<GeodesicTrace>> {
    exec.map(starts, |(p, v)| integrate_geodesic(chart, p, v, length, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn chart(text: &str) -> RealChart {
        RealChart::from_algebra(&FpAlgebra::parse(text).unwrap()).unwrap()
    }

    fn circle() -> RealChart {
        chart("field R; gens x y; rel x*x + y*y - 1")
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn charts_drop_commutators() {
        let c = chart("field Q; gens x y; rel x*y - y*x; rel x*x + y*y - 1");
        assert_eq!(c.relations().len(), 1);
        assert!(c.jacobian_error(&[0.3, -1.7]) < 1e-6);
        assert!(RealChart::from_algebra(&FpAlgebra::parse("field F5; gens x").unwrap()).is_err());
    }

    #[test]
    fn projections() {
        let c = circle();
        let p = project_to_chart(&[1.1, 0.0], &c).unwrap();
        assert!(dist(&p, &[1.0, 0.0]) < 1e-12);
        assert_eq!(project_to_chart(&[0.0, 1.0], &c).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            project_to_chart(&[0.0, 0.0], &c),
            Err(Error::RankDeficient(_) | Error::NonConvergence { .. })
        ));

        let v = tangent_project(&[3.0, 4.0], &[1.0, 0.0], &c).unwrap();
        assert!(dist(&v, &[0.0, 4.0]) < 1e-15);
        assert_eq!(tangent_project(&[0.0, 2.0], &[1.0, 0.0], &c).unwrap(), vec![0.0, 2.0]);
        assert!(norm(&tangent_project(&[5.0, 0.0], &[1.0, 0.0], &c).unwrap()) < 1e-15);
    }

    #[test]
    fn straight_lines() {
        let c = RealChart::flat(3);
        let t = integrate_geodesic(&c, &[1.0, 2.0, 3.0], &[0.0, 3.0, 4.0], 2.5, 0.1).unwrap();
        let end = &t.end().position;
        assert!(dist(end, &[1.0, 2.0 + 1.5, 3.0 + 2.0]) < 1e-12);
        assert_eq!(speed_profile(&t), 0.0);
        assert!(t.samples.windows(2).all(|w| w[0].arclength < w[1].arclength));
        assert!((t.end().arclength - 2.5).abs() < 1e-12);
    }

    #[test]
    fn quarter_circle() {
        let t = integrate_geodesic(&circle(), &[1.0, 0.0], &[0.0, 1.0], FRAC_PI_2, 1e-4).unwrap();
        assert!(dist(&t.end().position, &[0.0, 1.0]) < 1e-6);
        assert!(speed_profile(&t) <= 1e-8);
        assert!(t.diagnostics.max_constraint_drift <= 1e-9);
    }

    #[test]
    fn unnormalized_drift_is_reported() {
        let opts = GeodesicOptions { renormalize: false };
        let t = integrate_geodesic_with(&circle(), &[1.0, 0.0], &[0.0, 1.0], 1.0, 1e-2, opts).unwrap();
        assert!(!t.diagnostics.renormalized);
        assert!(t.diagnostics.max_speed_drift > 0.0);
    }

    #[test]
    fn bad_inputs() {
        let c = circle();
        assert!(matches!(integrate_geodesic(&c, &[1.0, 0.0], &[0.0, 1.0], 1.0, 0.0), Err(Error::InvalidStep(_))));
        assert!(integrate_geodesic(&c, &[1.0, 0.0], &[1.0, 0.0], 1.0, 0.1).is_err());
    }

    #[test]
    fn time_reversal() {
        let c = circle();
        let fwd = integrate_geodesic(&c, &[1.0, 0.0], &[0.0, 1.0], PI, 1e-4).unwrap();
        let back = integrate_geodesic(&c, &[1.0, 0.0], &[0.0, -1.0], PI, 1e-4).unwrap();
        // Both halves meet at (-1, 0).
        assert!(dist(&fwd.end().position, &back.end().position) < 1e-6);
        let mirrored: Vec<f64> = vec![back.samples[5000].position[0], -back.samples[5000].position[1]];
        assert!(dist(&fwd.samples[5000].position, &mirrored) < 1e-12);
    }

    #[test]
    fn batch_modes_agree() {
        let c = circle();
        let starts: Vec<(Vec<f64>, Vec<f64>)> =
            (0..8).map(|k| (vec![(k as f64).cos(), (k as f64).sin()], vec![0.0, 1.0])).collect();
        let a = integrate_many(&c, &starts, 1.0, 1e-2, Exec::Sequential);
        let b = integrate_many(&c, &starts, 1.0, 1e-2, Exec::Parallel);
        assert_eq!(a, b);
    }
}
