use std::sync::Arc;

use polyarrow_core::arrows::{compose, DoubleArrow, Operator};
use polyarrow_core::catalog::{gen_double_arrows, gen_spaces, norming_arrow, norming_pairs};
use polyarrow_core::engine::{init, EngineParams};
use polyarrow_core::pushout::pushout;
use polyarrow_core::rational::{self, frac};
use polyarrow_core::spaces::direct_sum;
use polyarrow_core::{Matrix, NormedSpace, SumKind, Vector, Q};
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Q> {
    (-8i64..=8, 1i64..=8).prop_map(|(p, q)| frac(p, q))
}

fn vec_of(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(rat(), n)
}

/// `ℓ₁²`, `ℓ∞²`, or the hull of `±e₁, ±e₂, ±v`.
fn plane() -> impl Strategy<Value = NormedSpace> {
    prop_oneof![
        Just(NormedSpace::l1(2)),
        Just(NormedSpace::linf(2)),
        vec_of(2).prop_filter("nonzero", |v| !rational::is_zero(v)).prop_map(|v| {
            let mut pts = vec![rational::unit(2, 0), rational::unit(2, 1), rational::neg(&v), v];
            pts.push(rational::neg(&rational::unit(2, 0)));
            pts.push(rational::neg(&rational::unit(2, 1)));
            NormedSpace::from_points(&pts, "P").unwrap()
        }),
    ]
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    vec_of(rows * cols).prop_map(move |v| Matrix::from_fn(rows, cols, |r, c| v[r * cols + c].clone()))
}

fn contraction(domain: &NormedSpace, codomain: &NormedSpace, m: Matrix) -> Option<Operator> {
    let t = Operator::new(domain.clone(), codomain.clone(), m).ok()?;
    if t.norm() == &rational::zero() {
        return None;
    }
    let s = rational::one() / t.norm();
    Some(t.scale(&s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norm_is_a_norm(e in plane(), x in vec_of(2), y in vec_of(2), s in rat()) {
        let (nx, ny) = (e.norm(&x), e.norm(&y));
        prop_assert!(e.norm(&rational::add(&x, &y)) <= &nx + &ny);
        prop_assert_eq!(e.norm(&rational::scale(&x, &s)), rational::abs(&s) * &nx);
        prop_assert_eq!(rational::is_zero(&x), nx == rational::zero());
        for v in e.vertices() {
            prop_assert_eq!(e.norm(v), rational::one());
        }
    }

    #[test]
    fn bidual_norm_agrees(e in plane(), x in vec_of(2), phi in vec_of(2)) {
        prop_assert_eq!(e.dual().dual().norm(&x), e.norm(&x));
        prop_assert!(rational::abs(&rational::dot(&phi, &x)) <= e.dual().norm(&phi) * e.norm(&x));
    }

    #[test]
    fn pushout_commutes_and_contracts(a in plane(), b in plane(), mi in matrix(2, 1), mj in matrix(2, 1)) {
        let y = NormedSpace::real();
        let (Some(i), Some(j)) = (contraction(&y, &a, mi), contraction(&y, &b, mj)) else { return Ok(()) };
        let po = pushout(&i, &j).unwrap();
        let lhs = po.j_prime.after(&i).unwrap();
        let rhs = po.i_prime.after(&j).unwrap();
        prop_assert_eq!(lhs.matrix(), rhs.matrix());
        prop_assert!(po.i_prime.norm() <= &rational::one());
        prop_assert!(po.j_prime.norm() <= &rational::one());
        prop_assert!(po.certificate.all_hold(), "{:?}", po.certificate.failures().collect::<Vec<_>>());
    }

    #[test]
    fn classification_scales(e in plane(), z in plane(), l1 in any::<bool>(), t in 1i64..=4) {
        let kind = if l1 { SumKind::L1 } else { SumKind::LInf };
        let b = direct_sum(&e, &z, kind).unwrap();
        let inc = Matrix::from_fn(4, 2, |r, c| if r == c { rational::one() } else { rational::zero() });
        let d = DoubleArrow::from_matrices(&e, &b, inc.clone(), inc.transpose()).unwrap();
        let cls = d.classify().unwrap();
        prop_assert!(cls.is_double());
        prop_assert!(d.is_exact_projection());
        let stretched = d.scaled(&rational::one(), &rational::int(t)).classify().unwrap();
        prop_assert_eq!(stretched.gamma, rational::int(t));
        prop_assert_eq!(stretched.beta, rational::int(t - 1));
        let twice = compose(&d, &DoubleArrow::identity(&b)).unwrap();
        prop_assert!(twice.classify().unwrap().is_double());
    }

    #[test]
    fn norming_pairs_give_double_arrows(e in plane()) {
        for (u, phi) in norming_pairs(&e) {
            prop_assert_eq!(e.norm(&u), rational::one());
            prop_assert_eq!(rational::dot(&phi, &u), rational::one());
            prop_assert!(norming_arrow(&e, &u, &phi).unwrap().classify().unwrap().is_double());
        }
    }
}

#[test]
fn generated_spaces_grow_with_the_dimension() {
    let small = gen_spaces(1, 4, 2);
    let large = gen_spaces(2, 4, 2);
    assert!(!small.is_empty());
    assert!(small.iter().all(|s| large.contains(s)));
    assert!(large.len() > small.len());
    assert_eq!(large, gen_spaces(2, 4, 2));
}

#[test]
fn engine_stages_are_chained_by_double_arrows() {
    let catalog = Arc::new(gen_double_arrows(&gen_spaces(2, 4, 4), 4));
    let params = EngineParams { m: 3, max_denom: 4, seed: 1, ..EngineParams::default() };
    let mut state = init(&NormedSpace::real(), catalog, params);
    for _ in 0..3 {
        state = state.step().unwrap();
        assert!(state.steps.last().unwrap().certificate.all_hold());
    }
    assert_eq!(state.stages.len(), 4);
    for (n, w) in state.stages.windows(2).enumerate() {
        assert!(w[0].dim() <= w[1].dim());
        let inc = &state.inclusions[n];
        assert!(inc.classify().unwrap().is_double());
        assert_eq!(inc.source(), &w[0]);
        assert_eq!(inc.target(), &w[1]);
    }
    assert!(state.check_composites().unwrap().all_hold());
    assert!(state.chain(0, 3).unwrap().classify().unwrap().is_double());
}
