use atypical::engine::{maximal_gamma_atypical, Ambient, SearchBounds, SpecialVariety, Witness};
use atypical::groebner::groebner_basis;
use atypical::ideal::PolynomialIdeal;
use atypical::laurent::LaurentPolynomial;
use atypical::lattice::ExponentLattice;
use atypical::modular::{gamma_special_closure, ModularGamma, ModularPolynomialTable, ModularWeaklySpecial};
use atypical::mult::MultiplicativePoint;
use atypical::torus::{atypicality_check, is_gamma_special, weakly_special_closure, FiniteRankGroup, TorusCoset};
use atypical::{Budget, Poly, Rational, TermOrder};
use proptest::prelude::*;

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn poly(text: &str) -> Poly {
    LaurentPolynomial::parse(text, 2).unwrap().to_affine_polynomial()
}

fn table() -> &'static ModularPolynomialTable {
    ModularPolynomialTable::bundled().unwrap()
}

fn torus_ideal(n: usize, gens: &[String]) -> PolynomialIdeal {
    let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
    PolynomialIdeal::parse(n, &refs, true).unwrap()
}

fn group(gens: &[Vec<i64>]) -> FiniteRankGroup {
    FiniteRankGroup::new(gens.iter().map(|g| MultiplicativePoint::from_i64(g).unwrap()).collect(), true, 1).unwrap()
}

fn ideal_of(v: &SpecialVariety) -> PolynomialIdeal {
    match v {
        SpecialVariety::Torus(c) => c.ideal().unwrap(),
        SpecialVariety::Modular(m) => m.ideal(table()).unwrap(),
    }
}

fn small_nonunit() -> impl Strategy<Value = i64> {
    prop::sample::select(vec![-3i64, 2, 3, 5, 6, -2, 10])
}

/// A torus curve in G_m^2 together with generators of a group of rank at most 2.
fn torus_instance() -> impl Strategy<Value = (String, Vec<Vec<i64>>)> {
    let curve = prop_oneof![
        (small_nonunit(), 1i64..3).prop_map(|(c, k)| format!("x1 - {c}*x2^{k}")),
        (1i64..6).prop_map(|d| format!("x1 + x2 - {d}")),
        (small_nonunit(), small_nonunit()).prop_map(|(a, b)| format!("x1*x2 - {a}*x1 + {b}")),
    ];
    let gamma = prop::collection::vec(prop::collection::vec(prop::sample::select(vec![1i64, 2, 3, -2]), 2), 1..3);
    (curve, gamma)
}

fn witnesses_contained(small: &[Witness], large: &[Witness]) -> bool {
    small.iter().all(|w| large.iter().any(|l| w.component.variety_within(&l.component).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduced_basis_does_not_depend_on_generators(a in -4i64..5, b in -4i64..5, c in 1i64..4) {
        let f = poly(&format!("x1^2 - {c}*x2"));
        let g = poly(&format!("x1*x2 + {a}*x1 - {b}"));
        let h = poly(&format!("x2 + {a}"));
        let mixed = &f + &(&h * &g);
        let budget = Budget::default();
        let one = groebner_basis(&[f.clone(), g.clone()], TermOrder::GrevLex, &budget).unwrap();
        let two = groebner_basis(&[g, mixed], TermOrder::GrevLex, &budget).unwrap();
        prop_assert_eq!(one, two);
    }

    #[test]
    fn constant_monomials_give_binomial_members(c in small_nonunit(), k in 1i64..3, d in 1i64..4) {
        let x = torus_ideal(3, &[format!("x1 - {c}*x2^{k}"), format!("x1 + x3 - {d}")]);
        let m = vec![1, -k, 0];
        let value = x.monomial_constant_on(&m).unwrap();
        prop_assert_eq!(value.clone(), Some(q(c)));
        prop_assert!(x.contains(&atypical::ideal::binomial(&m, &value.unwrap())).unwrap());
    }

    #[test]
    fn rebasing_a_coset_keeps_gamma_speciality(
        row in prop::sample::select(vec![vec![1i64, -1], vec![1, 1], vec![1, 2], vec![2, 1], vec![1, 0]]),
        base in prop::collection::vec(prop::sample::select(vec![1i64, 2, 3, 6, -1]), 2),
        shift in -3i64..4,
        g in prop::collection::vec(prop::sample::select(vec![1i64, 2, 3]), 2),
    ) {
        let lattice = ExponentLattice::new(2, std::slice::from_ref(&row));
        let p = MultiplicativePoint::from_i64(&base).unwrap();
        // Moving along the subgroup: t ↦ (t^{-r2}, t^{r1}) with t = 5^shift.
        let along = MultiplicativePoint::from_rationals(&[
            num_traits::Pow::pow(q(5), (-row[1] * shift) as i32),
            num_traits::Pow::pow(q(5), (row[0] * shift) as i32),
        ]).unwrap();
        let c1 = TorusCoset::through_point(&lattice, &p);
        let c2 = TorusCoset::through_point(&lattice, &p.mul(&along));
        let gamma = group(&[g]);
        prop_assert_eq!(&c1, &c2);
        prop_assert_eq!(is_gamma_special(&c1, &gamma), is_gamma_special(&c2, &gamma));
    }

    #[test]
    fn closure_is_monotone(a in prop::sample::select(vec![2i64, 3, -1, -2, 5]), c in small_nonunit(), shape in 0usize..2) {
        let (y, x) = if shape == 0 {
            (vec![format!("x1 + x2 - 1"), format!("x3 - {c}")], vec![format!("x1 - {a}"), format!("x2 - {}", 1 - a), format!("x3 - {c}")])
        } else {
            let x2 = Rational::new(c.into(), a.into());
            (vec![format!("x1*x2 - {c}"), format!("x1 + x3 - 1")], vec![format!("x1 - {a}"), format!("{}*x2 - {}", x2.denom(), x2.numer()), format!("x3 - {}", 1 - a)])
        };
        prop_assume!(!(shape == 0 && a == 1));
        let (yi, xi) = (torus_ideal(3, &y), torus_ideal(3, &x));
        prop_assume!(xi.dimension().unwrap() == 0);
        prop_assert!(xi.variety_within(&yi).unwrap());
        let (wy, wx) = (weakly_special_closure(&yi).unwrap(), weakly_special_closure(&xi).unwrap());
        prop_assert!(wy.contains_coset(&wx), "{} ⊄ {}", wx, wy);
    }

    #[test]
    fn complexity_grows_by_the_added_edge(edges in prop::collection::vec((0usize..4, 0usize..4, 1u32..6), 0..4)) {
        let mut s = ModularWeaklySpecial::full(4);
        for (i, k, n) in edges {
            let same_block = s.blocks().iter().any(|b| b.contains(&i) && b.contains(&k));
            prop_assume!(i != k && !same_block);
            let before = s.complexity();
            s = s.with_relation(i, k, n);
            prop_assert_eq!(s.complexity(), before.max(n));
        }
    }

    #[test]
    fn gamma_special_intersections_stay_gamma_special(
        c1 in prop::sample::select(vec![5i64, 1728, 0, 8000]),
        c2 in prop::sample::select(vec![5i64, 1728, -3375]),
        n in 1u32..4,
        tie in any::<bool>(),
    ) {
        let t = table();
        let gamma = ModularGamma::new(vec![q(5)], 2, 20);
        let s1 = ModularWeaklySpecial::full(3).with_constant(0, q(c1));
        let s2 = if tie { ModularWeaklySpecial::full(3).with_relation(1, 2, n) } else { ModularWeaklySpecial::full(3).with_constant(2, q(c2)) };
        for s in [&s1, &s2] {
            prop_assert_eq!(&gamma_special_closure(t, s, &gamma).unwrap(), s);
        }
        let meet = if tie { s1.with_relation(1, 2, n) } else { s1.with_constant(2, q(c2)) };
        prop_assert_eq!(&gamma_special_closure(t, &meet, &gamma).unwrap(), &meet);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn engine_witnesses_are_atypical_maximal_and_monotone((curve, gens) in torus_instance()) {
        let v = torus_ideal(2, &[curve]);
        prop_assume!(v.dimension().unwrap() == 1);
        let ambient = Ambient::Torus { s: TorusCoset::full(2), gamma: group(&gens) };
        let small = SearchBounds { subgroup_entry_bound: 1, gamma_word_bound: 4, ..SearchBounds::default() };
        let large = SearchBounds { subgroup_entry_bound: 2, gamma_word_bound: 6, ..SearchBounds::default() };
        let run = maximal_gamma_atypical(&v, &ambient, &large).unwrap();
        for w in &run.witnesses {
            let SpecialVariety::Torus(ws) = &w.ws_closure else { unreachable!() };
            let again = atypicality_check(&v, ws, &TorusCoset::full(2), &w.component).unwrap();
            prop_assert!(again.is_some(), "{} is not atypical against its closure", w.component_text);
            prop_assert_eq!(v.sum(&ideal_of(&w.ws_closure)).dimension().unwrap(), w.dims.0);
            for other in &run.witnesses {
                let inside = w.component.variety_within(&other.component).unwrap();
                prop_assert!(!inside || other.component.variety_within(&w.component).unwrap());
            }
        }
        let before = maximal_gamma_atypical(&v, &ambient, &small).unwrap();
        prop_assert!(witnesses_contained(&before.witnesses, &run.witnesses));
    }

    #[test]
    fn modular_witnesses_are_atypical_against_their_closure(c in prop::sample::select(vec![5i64, 7, 1728, 0]), shape in 0usize..3) {
        let gens: Vec<&str> = match shape {
            0 => vec!["x1 - x2"],
            1 => vec!["x1 + x2 - 1728"],
            _ => vec!["x1 - x2 - 1"],
        };
        let gens: Vec<String> = gens.into_iter().map(String::from).chain([format!("x3 - {c}")]).collect();
        let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
        let v = PolynomialIdeal::parse(3, &refs, false).unwrap();
        let bounds = SearchBounds { modular_complexity_bound: 1, hecke_bound: 2, disc_bound: 20, ..SearchBounds::default() };
        let ambient = Ambient::Modular {
            table: table(),
            s: ModularWeaklySpecial::full(3),
            gamma: ModularGamma::new(vec![q(5)], bounds.hecke_bound, bounds.disc_bound),
        };
        let run = maximal_gamma_atypical(&v, &ambient, &bounds).unwrap();
        for w in &run.witnesses {
            let (dx, dv, ds) = (w.dims.0, w.dims.1, w.dims.3);
            prop_assert!(dx > dv + w.ws_closure.dimension() - ds);
            prop_assert_eq!(v.sum(&ideal_of(&w.ws_closure)).dimension().unwrap(), dx);
        }
    }
}
