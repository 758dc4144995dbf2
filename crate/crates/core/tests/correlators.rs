mod common;

use common::*;
use qtr::bergman::{bethe_obstructions, solve_g_ansatz, validate_g, AnsatzOptions, SheetedKernel};
use qtr::curve::QuantumCurve;
use qtr::error::Error;
use qtr::field::rat;
use qtr::loopcheck::{check_loop_equations, resolve_convention};
use qtr::polesum::{Basis, PoleSum};
use qtr::recursion::{recurse, CorrelatorTable, Execution, KernelGauge, RecursionOptions, SignConvention};
use qtr::{Field, Rat, Ring};

fn eps(sheet: usize) -> Rat {
    if sheet == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

fn sign(sheets: &[usize]) -> Rat {
    sheets.iter().fold(Rat::one(), |a, &s| a * eps(s))
}

fn kernel(c: &QuantumCurve<Rat>) -> SheetedKernel<Rat> {
    solve_g_ansatz(c, &AnsatzOptions::default()).unwrap().kernel
}

fn table(c: &QuantumCurve<Rat>, k: &SheetedKernel<Rat>, chi: i64) -> CorrelatorTable<Rat> {
    recurse(c, k, chi, &RecursionOptions::default()).unwrap()
}

/// Every entry of `(g, n)` against `f(sheets, pts)` at a few sample points.
fn check_against(
    c: &QuantumCurve<Rat>,
    t: &CorrelatorTable<Rat>,
    g: usize,
    n: usize,
    f: impl Fn(&[usize], &[Rat]) -> Rat,
) {
    let roots = c.root_points();
    let entries = t.get(g, n).unwrap();
    assert_eq!(entries.len(), 2usize.pow(n as u32));
    for seed in 0..5 {
        let pts = points(seed, n);
        for (sheets, w) in entries {
            assert_eq!(w.eval(&roots, &pts).unwrap(), f(sheets, &pts), "W_{g},{n}{sheets:?} at {pts:?}");
        }
    }
}

fn inv(x: &Rat, k: u32) -> Rat {
    Ring::pow(x, k).inv()
}

#[test]
fn hermite_kernel_regular_part() {
    let c = hermite_n1();
    let k = kernel(&c);
    assert!(validate_g(&k, &c).unwrap().passed());
    let roots = c.root_points();
    for seed in 0..5 {
        let p = points(seed, 2);
        for i in 0..2 {
            for j in 0..2 {
                let want = eps(i) * eps(j) * rat(1, 2) * inv(&p[0], 2) * inv(&p[1], 2);
                assert_eq!(k.b_regular(i, j).eval(&roots, &p).unwrap(), want);
            }
        }
    }
}

#[test]
fn hermite_correlators() {
    let c = hermite_n1();
    let t = table(&c, &kernel(&c), 2);
    check_against(&c, &t, 0, 3, |s, x| {
        let e2 = x[0].clone() * &x[1] + x[0].clone() * &x[2] + x[1].clone() * &x[2];
        let p = x[0].clone() * &x[1] * &x[2];
        -sign(s) * rat(1, 2) * e2 * inv(&p, 3)
    });
    check_against(&c, &t, 1, 1, |s, x| -sign(s) * (inv(&x[0], 1) + rat(1, 2) * inv(&x[0], 3)));
    check_against(&c, &t, 1, 2, |s, x| {
        let (a, b) = (&x[0], &x[1]);
        sign(s)
            * (rat(1, 2) * inv(a, 2) * inv(b, 2)
                + rat(3, 4) * (inv(a, 2) * inv(b, 4) + inv(a, 4) * inv(b, 2))
                + rat(1, 2) * inv(a, 3) * inv(b, 3))
    });
}

#[test]
fn trivial_correlators() {
    let c = trivial(Rat::one());
    let t = table(&c, &kernel(&c), 2);
    check_against(&c, &t, 0, 3, |s, x| -sign(s) * rat(1, 2) * x.iter().map(|v| inv(v, 3)).fold(Rat::zero(), |a, b| a + b));
    check_against(&c, &t, 1, 1, |s, x| -sign(s) * inv(&x[0], 1));
    check_against(&c, &t, 0, 4, |s, x| -sign(s) * rat(3, 4) * x.iter().map(|v| inv(v, 4)).fold(Rat::zero(), |a, b| a + b));
    check_against(&c, &t, 1, 2, |_, _| Rat::zero());
}

#[test]
fn decoupled_kernel_obstruction() {
    let c = hermite_n1();
    let k = SheetedKernel::decoupled(&c);
    assert!(!validate_g(&k, &c).unwrap().passed());
    let obs = bethe_obstructions(&c, &k).unwrap();
    let first = obs.iter().find(|o| o.i0 == 0).unwrap();
    assert_eq!(first.value, PoleSum::term(vec![Basis::pole(0, 2)], rat(-1, 2)));
}

#[test]
fn loop_equations_hold() {
    for c in [hermite_n1(), trivial(Rat::one()), trivial(rat(3, 4)), quasi(&[0, -1], &[0, 1], rat(2, 3))] {
        let k = kernel(&c);
        let (rep, summary) = check_loop_equations(&c, &k, &table(&c, &k, 2)).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(summary.iter().all(|s| s.sheet_sum_ok && s.quadratic_ok));
    }
}

#[test]
fn hermite_n2_numeric_loop_equations() {
    let c = hermite_n2();
    assert!(c.validate().passed());
    assert!(c.hirota_residue_check().unwrap().passed());
    let k = solve_g_ansatz(&c, &AnsatzOptions::default()).unwrap().kernel;
    assert_eq!(resolve_convention(&c, &k).unwrap(), SignConvention::RESOLVED);
    let t = recurse(&c, &k, 2, &RecursionOptions::default()).unwrap();
    let (rep, _) = check_loop_equations(&c, &k, &t).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures);
}

#[test]
fn resolver_is_unique_on_curves_with_roots() {
    for c in [hermite_n1(), trivial(Rat::one()), trivial(rat(3, 4))] {
        assert_eq!(resolve_convention(&c, &kernel(&c)).unwrap(), SignConvention::RESOLVED);
    }
}

#[test]
fn empty_bethe_is_ambiguous_and_zero() {
    let c = empty_bethe();
    let k = kernel(&c);
    assert!(matches!(resolve_convention(&c, &k), Err(Error::AmbiguousConvention(_))));
    let t = table(&c, &k, 2);
    for (g, n) in t.keys() {
        assert!(t.get(g, n).unwrap().values().all(|w| w.is_empty()), "W_{g},{n}");
    }
}

#[test]
fn d3_wronskian_has_no_loop_consistent_convention() {
    let c = wronskian_d3();
    assert!(c.hirota_residue_check().unwrap().passed());
    let k = kernel(&c);
    assert!(validate_g(&k, &c).unwrap().passed());
    assert!(matches!(resolve_convention(&c, &k), Err(Error::NoValidConvention(_))));
}

/// The Bethe condition leaves a direction that breaks the `(0, 1)` loop
/// equation; imposing that equation removes it.
#[test]
fn bethe_null_direction_breaks_loop_equation() {
    let c = hermite_n1();
    let sol = solve_g_ansatz(&c, &AnsatzOptions::default()).unwrap();
    assert_eq!(sol.nullity, 1);
    let dir = &sol.null_directions[0];
    let mut k = sol.kernel.clone();
    for i in 0..2 {
        for j in 0..2 {
            k.regular[i][j] = k.regular[i][j].add(&dir.regular[i][j]);
        }
    }
    assert!(validate_g(&k, &c).unwrap().passed());
    let t = recurse(&c, &k, 1, &RecursionOptions::default()).unwrap();
    let (rep, summary) = check_loop_equations(&c, &k, &t).unwrap();
    assert!(!rep.passed());
    assert!(!summary.iter().find(|s| (s.g, s.n) == (0, 1)).unwrap().quadratic_ok);
    let strict = solve_g_ansatz(&c, &AnsatzOptions { loop_equation: true, ..Default::default() }).unwrap();
    assert_eq!(strict.nullity, 0);
}

fn one_slot(terms: &[(Basis, i64)]) -> PoleSum<Rat> {
    terms.iter().fold(PoleSum::zero(), |a, (b, c)| a.add(&PoleSum::term(vec![*b], Rat::from_i64(*c))))
}

#[test]
fn gauge_invariance() {
    for c in [hermite_n1(), trivial(Rat::one())] {
        let k = kernel(&c);
        let base = table(&c, &k, 2);
        let f = one_slot(&[(Basis::pole(0, 1), 1), (Basis::pole(0, 2), 3)]);
        let shifted = k.with_gauge(&[f.clone(), f.neg()]).unwrap();
        assert_eq!(table(&c, &shifted, 2), base);
        let gauge = KernelGauge { free: Some(one_slot(&[(Basis::pole(0, 3), 2)])), homogeneous: Some(f.clone()) };
        let t = recurse(&c, &k, 2, &RecursionOptions { gauge, ..Default::default() }).unwrap();
        assert_eq!(t, base);
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn permutation_symmetry() {
    for c in [hermite_n1(), trivial(Rat::one())] {
        let roots = c.root_points();
        let t = table(&c, &kernel(&c), 2);
        for (g, n) in [(0, 3), (1, 2), (0, 4)] {
            let entries = t.get(g, n).unwrap();
            for seed in 10..15 {
                let pts = points(seed, n);
                for (sheets, w) in entries {
                    let v = w.eval(&roots, &pts).unwrap();
                    for perm in permutations(n) {
                        let ps: Vec<usize> = perm.iter().map(|&i| sheets[i]).collect();
                        let px: Vec<Rat> = perm.iter().map(|&i| pts[i].clone()).collect();
                        assert_eq!(entries[&ps].eval(&roots, &px).unwrap(), v, "W_{g},{n}{sheets:?} under {perm:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn serial_and_parallel_agree() {
    let c = hermite_n1();
    let k = kernel(&c);
    let serial = table(&c, &k, 3);
    let par = recurse(&c, &k, 3, &RecursionOptions { execution: Execution::Parallel, ..Default::default() }).unwrap();
    assert_eq!(serial, par);
    assert_eq!(table(&c, &k, 3), serial);
}
