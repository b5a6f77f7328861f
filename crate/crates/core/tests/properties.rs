use std::sync::Arc;

use assocvar::algebra::{compose_hom, AlgebraHom, FpAlgebra};
use assocvar::field::{Field, Scalar};
use assocvar::freealg::{parse_presentation, NcPoly, Word};
use assocvar::geodesic::{tangent_project, RealChart};
use assocvar::linalg::Matrix;
use assocvar::localrep::{commutant, is_simple, local_ring, MatrixModule};
use assocvar::metric::{euclidean_metric, metric_at, tangent_space_at, TangentSpaceAtPoint};
use assocvar::phase::differentiate;
use assocvar::points::{basic_open, enumerate_points, preimage, section_space, Point, PointSet};
use proptest::prelude::*;

const F5: Field = Field::Prime(5);

fn terms(ngens: usize, max_len: usize) -> impl Strategy<Value = Vec<(Vec<usize>, i64)>> {
    prop::collection::vec((prop::collection::vec(0..ngens, 0..=max_len), -6i64..=6), 0..6)
}

fn build(field: Field, t: &[(Vec<usize>, i64)]) -> NcPoly {
    let mut p = NcPoly::zero();
    for (w, c) in t {
        p.add_term(Word::from_letters(w.iter().copied()), field.from_i64(*c));
    }
    p
}

fn poly(ngens: usize, max_len: usize) -> impl Strategy<Value = NcPoly> {
    terms(ngens, max_len).prop_map(|t| build(F5, &t))
}

fn word(ngens: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..ngens, 0..=max_len).prop_map(Word::from_letters)
}

fn circle_f5() -> Arc<FpAlgebra> {
    Arc::new(FpAlgebra::parse("field F5; gens x y; rel x*y - y*x; rel x*x + y*y - 1; bound 6").unwrap())
}

fn plane_f5() -> Arc<FpAlgebra> {
    Arc::new(FpAlgebra::parse("field F5; gens x y; rel x*y - y*x").unwrap())
}

fn matrix(field: Field, r: usize, entries: &[i64]) -> Matrix {
    let rows: Vec<Vec<Scalar>> = entries.chunks(r).map(|c| c.iter().map(|&v| field.from_i64(v)).collect()).collect();
    Matrix::from_rows(field, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(p in poly(2, 3), q in poly(2, 3), r in poly(2, 3)) {
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&p * &NcPoly::one(F5), p.clone());
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn parse_print_round_trip(t in terms(3, 3), r in terms(3, 2)) {
        let a = FpAlgebra::parse("field F5; gens x y z").unwrap();
        let p = build(F5, &t);
        prop_assert_eq!(a.poly(&a.format(&p)).unwrap(), p.clone());
        let rel = build(F5, &r);
        if !rel.is_zero() {
            let text = format!("field F5; gens x y z; rel {}", a.format(&rel));
            let pres = parse_presentation(&text).unwrap();
            prop_assert_eq!(parse_presentation(&pres.to_string()).unwrap(), pres);
        }
    }

    #[test]
    fn normal_form_laws(p in poly(2, 4), q in poly(2, 4), c in 0i64..5, u in word(2, 2), v in word(2, 2)) {
        let a = circle_f5();
        let np = a.nf(&p).unwrap();
        prop_assert_eq!(a.nf(&np).unwrap(), np.clone());
        let cs = F5.from_i64(c);
        let lin = a.nf(&(&p.scale(&cs) + &q)).unwrap();
        prop_assert_eq!(lin, &np.scale(&cs) + &a.nf(&q).unwrap());
        for r in a.rels() {
            prop_assert!(a.nf(&r.sandwich(&u, &v)).unwrap().is_zero());
        }
    }

    #[test]
    fn leibniz(p in poly(3, 4), q in poly(3, 4)) {
        let d = |x: &NcPoly| differentiate(x, 3);
        prop_assert_eq!(d(&(&p * &q)), &(&d(&p) * &q) + &(&p * &d(&q)));
    }

    #[test]
    fn chain_rule(p in poly(2, 3), g0 in poly(2, 2), g1 in poly(2, 2)) {
        let g = vec![g0, g1];
        let mut ext = g.clone();
        ext.extend(g.iter().map(|gi| differentiate(gi, 2)));
        prop_assert_eq!(differentiate(&p.substitute(&g), 2), differentiate(&p, 2).substitute(&ext));
    }

    #[test]
    fn continuity(f in poly(2, 2), g0 in poly(2, 2), g1 in poly(2, 2)) {
        let b = plane_f5();
        let a = plane_f5();
        let x = enumerate_points(&a).unwrap();
        let y = enumerate_points(&b).unwrap();
        let h = AlgebraHom::new(b.clone(), a, vec![g0, g1]).unwrap();
        prop_assume!(h.is_valid());
        let lhs = preimage(&h, &x, &basic_open(&f, &y).unwrap());
        let rhs = basic_open(&f.substitute(h.images()), &x).unwrap();
        prop_assert_eq!(lhs.points(), rhs.points());
    }

    #[test]
    fn composition_is_substitution(g0 in poly(2, 2), g1 in poly(2, 2), h0 in poly(2, 2), h1 in poly(2, 2), p in poly(2, 2)) {
        let a = plane_f5();
        let g = AlgebraHom::new(a.clone(), a.clone(), vec![g0, g1]).unwrap();
        let h = AlgebraHom::new(a.clone(), a.clone(), vec![h0, h1]).unwrap();
        let gh = compose_hom(&g, &h).unwrap();
        prop_assert_eq!(gh.apply(&p).unwrap(), g.apply(&h.apply(&p).unwrap()).unwrap());
    }

    #[test]
    fn sections_closed_under_products(mask in 1u32..16) {
        let a = circle_f5();
        let all = enumerate_points(&a).unwrap();
        let chosen: Vec<Point> = all.points().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect();
        let u = PointSet::from_points(a, chosen).unwrap();
        let s = section_space(&u).unwrap();
        for x in &s.basis {
            for y in &s.basis {
                let prod: Vec<Scalar> = x.iter().zip(y).map(|(a, b)| a * b).collect();
                prop_assert!(s.contains(&prod));
            }
            if x.iter().all(|v| !v.is_zero()) {
                let inv: Vec<Scalar> = x.iter().map(|v| v.inv().unwrap()).collect();
                prop_assert!(s.contains(&inv));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schur(p in prop::sample::select(vec![2u32, 3, 5]), r in 1usize..=2, e in prop::collection::vec(0i64..5, 8)) {
        let field = Field::Prime(p);
        let free = Arc::new(FpAlgebra::parse(&format!("field F{p}; gens x y")).unwrap());
        let m = MatrixModule::new(free, vec![matrix(field, r, &e[..r * r]), matrix(field, r, &e[4..4 + r * r])]).unwrap();
        let c = commutant(&m);
        if is_simple(&m).unwrap() {
            prop_assert_eq!(c.is_division_ring(1 << 16), Some(true));
        }
        prop_assert!(c.dim() >= 1);
    }

    #[test]
    fn local_ring_is_closed(r in 1usize..=2, e in prop::collection::vec(0i64..3, 8)) {
        let field = Field::Prime(3);
        let free = Arc::new(FpAlgebra::parse("field F3; gens x y").unwrap());
        let m = MatrixModule::new(free, vec![matrix(field, r, &e[..r * r]), matrix(field, r, &e[4..4 + r * r])]).unwrap();
        let lr = local_ring(&m).unwrap();
        prop_assert_eq!(lr.reclose().unwrap().dim(), lr.dim());
        for g in m.action() {
            prop_assert!(lr.contains(g));
        }
        prop_assert!(lr.contains(&Matrix::identity(field, r)));
    }

    #[test]
    fn euclidean_gram_is_bilinear(rows in prop::collection::vec(prop::collection::vec(-7i64..=7, 3), 1..=3), c in 1i64..=9) {
        let q = Field::Rational;
        let a = Arc::new(FpAlgebra::parse("field Q; gens x y z").unwrap());
        let g = euclidean_metric(&a).unwrap();
        let b = Matrix::from_rows(q, rows.iter().map(|r| r.iter().map(|&v| q.from_i64(v)).collect()).collect()).unwrap();
        let point = Point::from_i64(q, &[0, 0, 0]);
        let t = TangentSpaceAtPoint { point: point.clone(), basis: b.clone(), dim: b.rows() };
        let gram = metric_at(&g, &t).unwrap().gram;
        prop_assert_eq!(&gram, &b.mul(&b.transpose()).unwrap());
        let cs = q.from_i64(c);
        let scaled = TangentSpaceAtPoint { point, basis: b.scale(&cs), dim: b.rows() };
        prop_assert_eq!(metric_at(&g, &scaled).unwrap().gram, gram.scale(&(&cs * &cs)));
    }

    #[test]
    fn tangent_projection_matches_exact_tangent(n in -20i64..=20, d in 1i64..=20, vx in -5.0f64..5.0, vy in -5.0f64..5.0) {
        // Rational parametrisation of the unit circle.
        let q = Field::Rational;
        let t = q.parse_scalar(&format!("{n}/{d}")).unwrap();
        let one = q.one();
        let den = &one + &(&t * &t);
        let x = &(&one - &(&t * &t)) * &den.inv().unwrap();
        let y = &(&q.from_i64(2) * &t) * &den.inv().unwrap();
        let a = FpAlgebra::parse("field Q; gens x y; rel x*y - y*x; rel x*x + y*y - 1").unwrap();
        let exact = tangent_space_at(&a, &Point::new(vec![x.clone(), y.clone()])).unwrap();
        prop_assert_eq!(exact.dim, 1);
        let dir: Vec<f64> = exact.basis.row(0).iter().map(Scalar::to_f64).collect();
        let norm2 = dir[0] * dir[0] + dir[1] * dir[1];
        let along = (vx * dir[0] + vy * dir[1]) / norm2;
        let chart = RealChart::from_algebra(&FpAlgebra::parse("field R; gens x y; rel x*x + y*y - 1").unwrap()).unwrap();
        let got = tangent_project(&[vx, vy], &[x.to_f64(), y.to_f64()], &chart).unwrap();
        prop_assert!((got[0] - along * dir[0]).abs() < 1e-9);
        prop_assert!((got[1] - along * dir[1]).abs() < 1e-9);
    }

    #[test]
    fn jacobian_matches_finite_differences(x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let a = FpAlgebra::parse("field R; gens x y z; rel x*x + y*y + z*z - 1; rel x*y*z - z + 2").unwrap();
        let chart = RealChart::from_algebra(&a).unwrap();
        prop_assert!(chart.jacobian_error(&x) < 1e-6);
    }
}
