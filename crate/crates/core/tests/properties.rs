use proptest::prelude::*;

use qtr::diffop::{factor_from_y, symbol, DiffOp};
use qtr::diffsym::{DiffPoly, Var};
use qtr::field::rat;
use qtr::polesum::{Basis, PoleSum};
use qtr::{Poly, QuasiRational, Rat, RatFunc, Ring};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() }
}

fn small_rat() -> impl Strategy<Value = Rat> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| rat(p, q))
}

fn nonzero_rat() -> impl Strategy<Value = Rat> {
    (1i64..=9, 1i64..=5, any::<bool>()).prop_map(|(p, q, neg)| rat(if neg { -p } else { p }, q))
}

fn poly_of(max_deg: usize) -> impl Strategy<Value = Poly<Rat>> {
    prop::collection::vec(small_rat(), 0..=max_deg + 1).prop_map(Poly::new)
}

fn ratfunc_poly(max_deg: usize) -> impl Strategy<Value = RatFunc<Rat>> {
    poly_of(max_deg).prop_map(RatFunc::from_poly)
}

/// Distinct integer poles with multiplicities 1..=3.
fn poles() -> impl Strategy<Value = Vec<(Rat, u32)>> {
    prop::collection::btree_map(-5i64..=5, 1u32..=3, 1..=3)
        .prop_map(|m| m.into_iter().map(|(s, k)| (Rat::from_i64(s), k)).collect())
}

fn denominator(ps: &[(Rat, u32)]) -> Poly<Rat> {
    ps.iter().fold(Poly::one(), |a, (s, k)| a * Ring::pow(&Poly::linear(s), *k))
}

/// `Σ_s Σ_k c_{s,k} / (x - s)^k` plus a polynomial, with the coefficients.
fn partial_fraction_sum() -> impl Strategy<Value = (RatFunc<Rat>, Vec<(Rat, Rat)>)> {
    (poles(), poly_of(2)).prop_flat_map(|(ps, p)| {
        let n: usize = ps.iter().map(|(_, k)| *k as usize).sum();
        prop::collection::vec(small_rat(), n).prop_map(move |cs| {
            let mut f = RatFunc::from_poly(p.clone());
            let mut it = cs.into_iter();
            let mut residues = Vec::new();
            for (s, k) in &ps {
                for order in 1..=*k {
                    let c = it.next().unwrap();
                    if order == 1 {
                        residues.push((s.clone(), c.clone()));
                    }
                    f = f + RatFunc::pole(c, s, order);
                }
            }
            (f, residues)
        })
    })
}

fn diffpoly() -> impl Strategy<Value = DiffPoly> {
    let atom = (1u16..=3, 0u16..=2).prop_map(|(i, k)| DiffPoly::var(Var::j(i).derived(k)));
    let mono = (small_rat(), prop::collection::vec(atom, 0..=2))
        .prop_map(|(c, fs)| fs.into_iter().fold(DiffPoly::constant(c), |a, f| a * f));
    prop::collection::vec(mono, 0..=3).prop_map(|ms| ms.into_iter().fold(DiffPoly::zero(), |a, m| a + m))
}

fn operator(q: Rat) -> impl Strategy<Value = DiffOp<RatFunc<Rat>>> {
    prop::collection::vec(ratfunc_poly(2), 0..=3).prop_map(move |cs| DiffOp::new(q.clone(), cs))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn residue_matches_partial_fractions((f, residues) in partial_fraction_sum()) {
        for (s, c) in residues {
            prop_assert_eq!(f.residue_at(&s).unwrap(), c);
        }
    }

    #[test]
    fn finite_residues_sum_to_zero(ps in poles(), p in poly_of(6)) {
        let den = denominator(&ps);
        let deg = den.degree().unwrap();
        prop_assume!(deg >= 2);
        let num = Poly::new(p.coeffs().iter().take(deg - 1).cloned().collect());
        let f = RatFunc::new(num, den);
        let total = ps.iter().fold(Rat::zero(), |a, (s, _)| a + f.residue_at(s).unwrap());
        prop_assert_eq!(total, Rat::zero());
    }

    #[test]
    fn derivatives_have_no_residue((f, residues) in partial_fraction_sum()) {
        let df = f.derivative();
        for (s, _) in residues {
            prop_assert_eq!(df.residue_at(&s).unwrap(), Rat::zero());
        }
    }

    #[test]
    fn diffpoly_leibniz(a in diffpoly(), b in diffpoly()) {
        let lhs = (a.clone() * &b).derivative();
        let rhs = a.derivative() * &b + a * &b.derivative();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn operator_product_is_associative(
        (a, b, c) in nonzero_rat().prop_flat_map(|q| (operator(q.clone()), operator(q.clone()), operator(q)))
    ) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn right_action_reverses_products(
        (a, b) in nonzero_rat().prop_flat_map(|q| (operator(q.clone()), operator(q))),
        r in ratfunc_poly(2),
        e in ratfunc_poly(1),
    ) {
        let psi = QuasiRational::with_exponent(r, e);
        prop_assert_eq!(a.mul(&b).right_act(&psi), b.right_act(&a.right_act(&psi)));
    }

    #[test]
    fn symbol_is_multiplicative(
        ya in prop::collection::vec(poly_of(2), 1..=2),
        yb in prop::collection::vec(poly_of(2), 1..=2),
    ) {
        let fam = |ys: Vec<Poly<Rat>>| move |q: &Rat| {
            let y: Vec<RatFunc<Rat>> = ys.iter().map(|p| RatFunc::from_poly(p.scale(q))).collect();
            factor_from_y(q, &y)
        };
        let (fa, fb) = (fam(ya.clone()), fam(yb.clone()));
        let prod = symbol(&|q: &Rat| fa(q).mul(&fb(q)), 6).unwrap();
        let sa = symbol(&fa, 6).unwrap();
        let sb = symbol(&fb, 6).unwrap();
        prop_assert_eq!(prod, sa.mul(&sb));
    }

    #[test]
    fn polesum_expansion_matches_ratfunc(
        roots in prop::collection::btree_set(-4i64..=4, 1..=3),
        raw in prop::collection::vec((0usize..3, 0u32..=3, small_rat()), 1..=6),
        at in 0usize..3,
    ) {
        let roots: Vec<Rat> = roots.into_iter().map(Rat::from_i64).collect();
        let p = raw.iter().fold(PoleSum::zero(), |acc, (r, k, c)| {
            let b = if *k == 0 { Basis::Mono(*r as u32) } else { Basis::pole(r % roots.len(), *k) };
            acc.add(&PoleSum::term(vec![b], c.clone()))
        });
        let r0 = at % roots.len();
        let f = p.to_ratfunc(&roots);
        let want = f.local_expand(&roots[r0], 4).unwrap().series;
        let got = p.expand_slot(0, &roots, r0, 4);
        for e in -4..4 {
            let g = got.coeff(e).map(|c| c.as_scalar()).unwrap_or_else(|_| Rat::zero());
            prop_assert_eq!(g, want.coeff(e).unwrap_or_else(|_| Rat::zero()), "exponent {}", e);
        }
        let x = Rat::from_i64(7) / Rat::from_i64(3);
        prop_assert_eq!(p.eval(&roots, &[x.clone()]).unwrap(), f.eval(&x).unwrap());
    }
}
