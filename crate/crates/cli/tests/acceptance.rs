//! One line per acceptance criterion. Exits non-zero if a criterion that is
//! expected to hold fails, or if criterion 2 deviates from the recorded
//! erratum in any other way.

use std::process::{Command, ExitCode};

use qtr::bergman::{bethe_obstructions, solve_g_ansatz, validate_g, AnsatzOptions, SheetedKernel};
use qtr::curve::QuantumCurve;
use qtr::diffsym::DiffPoly;
use qtr::field::{rat, set_default_precision};
use qtr::formal::{determinant_factorization_check, hirota_determinant_check};
use qtr::io::{read_curve, Scalar};
use qtr::loopcheck::{check_loop_equations, resolve_convention};
use qtr::miura::{
    certification_q_values, cross_validate, currents, reference_e_deviation, reference_w2, reference_w3,
    symbol_and_classical, w_closed_form,
};
use qtr::polesum::{Basis, PoleSum};
use qtr::recursion::{recurse, CorrelatorTable, KernelGauge, RecursionOptions, SignConvention};
use qtr::report::NUMERIC_IDENTITY_TOL;
use qtr::{Complex, Rat, Ring};

const CORPUS: &[(&str, &str)] = &[
    ("hermite_n1", include_str!("../corpus/hermite_n1.json")),
    ("hermite_n1_q23", include_str!("../corpus/hermite_n1_q23.json")),
    ("hermite_n2", include_str!("../corpus/hermite_n2.json")),
    ("trivial", include_str!("../corpus/trivial.json")),
    ("trivial_q34", include_str!("../corpus/trivial_q34.json")),
    ("trivial_wronskian", include_str!("../corpus/trivial_wronskian.json")),
    ("wronskian_d3", include_str!("../corpus/wronskian_d3.json")),
    ("adversarial", include_str!("../corpus/adversarial.json")),
    ("empty_bethe", include_str!("../corpus/empty_bethe.json")),
];

fn curve<F: Scalar>(name: &str) -> QuantumCurve<F> {
    let text = CORPUS.iter().find(|(n, _)| *n == name).unwrap().1;
    read_curve(text).unwrap()
}

fn kernel<F: Scalar>(c: &QuantumCurve<F>) -> SheetedKernel<F> {
    solve_g_ansatz(c, &AnsatzOptions::default()).unwrap().kernel
}

fn table<F: Scalar>(c: &QuantumCurve<F>, k: &SheetedKernel<F>) -> CorrelatorTable<F> {
    recurse(c, k, 2, &RecursionOptions::default()).unwrap()
}

fn j(i: usize) -> DiffPoly {
    currents(3)[i - 1].clone()
}

fn c1() -> (bool, String) {
    let ok = (2..=4).all(|d| cross_validate(d, &certification_q_values(d)).passed());
    (ok, "closed form equals the expansion of E for d = 2, 3, 4 at d + 2 values of Q".into())
}

/// The reference d = 3 display differs from the expansion in the `ŷ^0`
/// coefficient by exactly `-J1 J2 J3 - 2 Q² J3''`; everything else matches.
fn c2() -> (bool, String, bool) {
    let mut d2 = true;
    let mut erratum_exact = true;
    let mut w_ok = true;
    for q in certification_q_values(3) {
        d2 &= reference_e_deviation(2, &q, false).unwrap().is_empty();
        d2 &= reference_e_deviation(2, &q, true).unwrap().is_empty();
        let expected = -(j(1) * &j(2) * &j(3)) - j(3).nth_derivative(2).scale(&(q.clone() * &q * Rat::from_i64(2)));
        erratum_exact &= reference_e_deviation(3, &q, false).unwrap() == vec![(0, expected)];
        for d in 2..=4 {
            let js = currents(d);
            w_ok &= reference_w2(&js, &q) == w_closed_form(2, &js, &q);
            w_ok &= reference_w3(&js, &q) == w_closed_form(3, &js, &q);
        }
    }
    let detail = format!(
        "d = 2 display {}, W2/W3 displays {}, d = 3 display differs at yhat^0 by -J1 J2 J3 - 2Q^2 J3''{}",
        if d2 { "reproduced" } else { "NOT reproduced" },
        if w_ok { "reproduced" } else { "NOT reproduced" },
        if erratum_exact { "" } else { " (UNEXPECTED: deviation differs)" }
    );
    (false, detail, d2 && w_ok && erratum_exact)
}

fn c3() -> (bool, String) {
    let ok = (1..=3).all(|d| {
        let (s, e) = symbol_and_classical(d).unwrap();
        s == e
    });
    (ok, "symbol of E equals the signed elementary symmetric polynomials for d <= 3".into())
}

fn c4() -> (bool, String) {
    let det = (1..=3).all(|d| certification_q_values(d).iter().all(|q| determinant_factorization_check(d, q)));
    let mut ann = true;
    for name in ["hermite_n1", "hermite_n1_q23", "trivial", "trivial_q34", "trivial_wronskian", "wronskian_d3", "empty_bethe"] {
        let c: QuantumCurve<Rat> = curve(name);
        ann &= !c.solutions.is_empty() && c.annihilation_residuals().iter().all(|r| r.is_zero());
    }
    let h2: QuantumCurve<Complex> = curve("hermite_n2");
    let err = h2.annihilation_error();
    let ok = det && ann && !h2.solutions.is_empty() && err < NUMERIC_IDENTITY_TOL;
    (ok, format!("determinant factorization d <= 3 {det}, exact annihilation {ann}, Hermite n = 2 relative error {err:.2e} at 256 bits"))
}

fn c5() -> (bool, String) {
    let det = (1..=3).all(|d| certification_q_values(d).iter().all(|q| hirota_determinant_check(d, q)));
    let mut builders = true;
    for name in ["hermite_n1", "hermite_n1_q23", "trivial", "trivial_q34", "trivial_wronskian", "wronskian_d3"] {
        builders &= curve::<Rat>(name).hirota_residue_check().unwrap().passed();
    }
    builders &= curve::<Complex>("hermite_n2").hirota_residue_check().unwrap().passed();
    let adv = curve::<Rat>("adversarial").hirota_residue_check().unwrap();
    let at_one = adv.entries.iter().find(|e| e.s == Rat::one()).map(|e| e.residue.clone());
    let adv_ok = !adv.passed() && at_one == Some(rat(-1, 4));
    (
        det && builders && adv_ok,
        format!("determinant identity d <= 3 {det}, builder curves {builders}, adversarial residue at s = 1: {}", at_one.map(|r| r.text()).unwrap_or_default()),
    )
}

fn c6() -> (bool, String) {
    let mut solved = true;
    for name in ["trivial", "hermite_n1"] {
        let c: QuantumCurve<Rat> = curve(name);
        solved &= validate_g(&kernel(&c), &c).unwrap().passed();
    }
    let c: QuantumCurve<Rat> = curve("hermite_n1");
    let obs = bethe_obstructions(&c, &SheetedKernel::decoupled(&c)).unwrap();
    let first = obs.iter().find(|o| o.i0 == 0).map(|o| o.value.clone());
    let want = PoleSum::term(vec![Basis::pole(0, 2)], rat(-1, 2));
    let ok = solved && first.as_ref() == Some(&want);
    (ok, format!("solver on trivial and Hermite n = 1 {solved}, decoupled obstruction at i0 = 1: {}", first.map(|p| p.fmt_with(&["x0"], &c.root_points())).unwrap_or_default()))
}

fn sample_points(seed: i64, n: usize) -> Vec<Rat> {
    (0..n as i64).map(|i| rat(3 + 2 * i + seed * 5, 2 + ((seed + i) % 5))).collect()
}

fn permuted_equal(c: &QuantumCurve<Rat>, t: &CorrelatorTable<Rat>, g: usize, n: usize) -> bool {
    let roots = c.root_points();
    let entries = t.get(g, n).unwrap();
    let perms: Vec<Vec<usize>> = match n {
        2 => vec![vec![1, 0]],
        _ => vec![vec![1, 0, 2], vec![0, 2, 1], vec![2, 1, 0], vec![1, 2, 0], vec![2, 0, 1]],
    };
    (0..5).all(|seed| {
        let pts = sample_points(seed, n);
        entries.iter().all(|(sheets, w)| {
            let v = w.eval(&roots, &pts).unwrap();
            perms.iter().all(|p| {
                let ps: Vec<usize> = p.iter().map(|&i| sheets[i]).collect();
                let px: Vec<Rat> = p.iter().map(|&i| pts[i].clone()).collect();
                entries[&ps].eval(&roots, &px).unwrap() == v
            })
        })
    })
}

fn c7() -> (bool, String) {
    let (mut p0, mut p1, mut gauge, mut sym) = (true, true, true, true);
    for name in ["trivial", "hermite_n1"] {
        let c: QuantumCurve<Rat> = curve(name);
        let k = kernel(&c);
        let t = table(&c, &k);
        let (_, summary) = check_loop_equations(&c, &k, &t).unwrap();
        p0 &= summary.iter().all(|s| s.sheet_sum_ok);
        p1 &= summary.iter().all(|s| s.quadratic_ok);
        let f = PoleSum::term(vec![Basis::pole(0, 1)], Rat::one()).add(&PoleSum::term(vec![Basis::pole(0, 2)], rat(3, 1)));
        gauge &= table(&c, &k.with_gauge(&[f.clone(), f.neg()]).unwrap()) == t;
        let kg = KernelGauge { free: Some(PoleSum::term(vec![Basis::pole(0, 3)], rat(2, 1))), homogeneous: Some(f) };
        gauge &= recurse(&c, &k, 2, &RecursionOptions { gauge: kg, ..Default::default() }).unwrap() == t;
        sym &= permuted_equal(&c, &t, 0, 3) && permuted_equal(&c, &t, 1, 2);
    }
    let e: QuantumCurve<Rat> = curve("empty_bethe");
    let te = table(&e, &kernel(&e));
    let zero = te.keys().iter().all(|&(g, n)| te.get(g, n).unwrap().values().all(|w| w.is_empty()));
    let ok = p0 && p1 && gauge && sym && zero;
    (ok, format!("(a) P0 {p0} (b) P1 principal parts {p1} (c) gauge invariance {gauge} (d) symmetry {sym} (e) empty Bethe zero {zero}"))
}

fn c8() -> (bool, String) {
    let mut found = Vec::new();
    for (name, _) in CORPUS {
        let resolved = match *name {
            "hermite_n2" => {
                let c: QuantumCurve<Complex> = curve(name);
                resolve_convention(&c, &kernel(&c))
            }
            "wronskian_d3" | "adversarial" | "empty_bethe" => continue,
            _ => {
                let c: QuantumCurve<Rat> = curve(name);
                resolve_convention(&c, &kernel(&c))
            }
        };
        match resolved {
            Ok(conv) => found.push(conv),
            Err(e) => return (false, format!("{name}: {e}")),
        }
    }
    let same = found.iter().all(|c| *c == SignConvention::RESOLVED);
    let readme = include_str!("../../../README.md");
    let documented = readme.contains(&SignConvention::RESOLVED.label());
    (
        same && documented,
        format!("{} curves resolve to \"{}\", documented in README {documented}", found.len(), SignConvention::RESOLVED.label()),
    )
}

fn run(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_qtr")).args(args).output().unwrap();
    assert!(out.status.success(), "qtr {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn c9() -> (bool, String) {
    let dir = env!("CARGO_MANIFEST_DIR");
    let mut ok = true;
    for (name, backend) in [("hermite_n1", "exact"), ("trivial", "exact"), ("hermite_n2", "f256")] {
        let path = format!("{dir}/corpus/{name}.json");
        let args = ["--backend", backend, "recurse", "--curve", &path, "--samples", "3,5/2,-7", "--convention", "appendix"];
        let a = run(&args);
        let b = run(&args);
        let par = run(&[&args[..], &["--parallel"]].concat());
        ok &= !a.is_empty() && a == b && a == par;
    }
    (ok, "repeated and parallel recursion output byte-identical on three curves".into())
}

fn main() -> ExitCode {
    set_default_precision(256);
    let (ok2, detail2, as_recorded) = c2();
    let results = [c1(), (ok2, detail2), c3(), c4(), c5(), c6(), c7(), c8(), c9()];
    let mut failed = !as_recorded;
    for (n, (ok, detail)) in results.iter().enumerate() {
        println!("criterion {}: {} {detail}", n + 1, if *ok { "PASS" } else { "FAIL" });
        // Criterion 2 is expected to fail with the recorded erratum.
        failed |= !ok && n != 1;
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
