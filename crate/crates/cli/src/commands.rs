use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use qtr::bergman::{bethe_obstructions, solve_g_ansatz, validate_g, AnsatzOptions, SheetedKernel};
use qtr::curve::{ClassicalMode, QuantumCurve};
use qtr::field::Rat;
use qtr::io::{read_curve, read_kernel, read_table, kernel_to_json, table_to_json, to_pretty, Scalar};
use qtr::loopcheck::{check_loop_equations, convention_trials, resolve_convention};
use qtr::miura::{
    build_e, certification_q_values, cross_validate, currents, impose_trace_free, symbol_and_classical, w_closed_form,
    w_graded,
};
use qtr::formal::{determinant_factorization_check, hirota_determinant_check};
use qtr::parse::parse_scalar;
use qtr::recursion::{recurse, Execution, Form, RecursionOptions, SignConvention};
use qtr::report::{Report, NUMERIC_IDENTITY_TOL};
use qtr::{Error, Ring};

use crate::{CliError, Cmd, ConventionArg, Outcome, RecursionArgs};

pub fn read_file(p: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

pub fn write_file(p: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

/// Writes JSON to `out`, or to stdout when no path is given and `stdout` is set.
fn emit(out: Option<&Path>, v: &impl serde::Serialize, stdout: bool) -> Result<(), CliError> {
    let text = to_pretty(v);
    match out {
        Some(p) => write_file(p, &text),
        None if stdout => {
            print!("{text}");
            Ok(())
        }
        None => Ok(()),
    }
}

fn load_curve<F: Scalar>(p: &Path) -> Result<QuantumCurve<F>, CliError> {
    let text = read_file(p)?;
    read_curve(&text).map_err(|e| match e {
        Error::Input(s) => CliError::Engine(Error::Input(format!("{}: {s}", p.display()))),
        e => CliError::Engine(e),
    })
}

fn load_kernel<F: Scalar>(p: Option<&Path>, curve: &QuantumCurve<F>) -> Result<SheetedKernel<F>, CliError> {
    match p {
        Some(p) => Ok(read_kernel(&read_file(p)?, curve)?),
        None => Ok(solve_g_ansatz(curve, &AnsatzOptions::default())?.kernel),
    }
}

fn print_report(title: &str, r: &Report) {
    println!("{title}: {}", if r.passed() { "pass" } else { "FAIL" });
    for f in &r.failures {
        println!("  [{}] {}: {}", f.check, f.location, f.detail);
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn curve_summary<F: Scalar>(c: &QuantumCurve<F>) -> Value {
    json!({
        "d": c.d,
        "Q": c.q.to_json(),
        "Y": c.y.iter().map(|y| y.fmt_with("x", &|v: &F| v.text())).collect::<Vec<_>>(),
        "bethe": c.bethe.iter().map(|b| json!({"s": b.s.to_json(), "mu": b.mu})).collect::<Vec<_>>(),
    })
}

fn describe_curve<F: Scalar>(c: &QuantumCurve<F>) {
    println!("d = {}, Q = {}", c.d, c.q.text());
    for (i, y) in c.y.iter().enumerate() {
        println!("  Y{} = {}", i + 1, y.fmt_with("x", &|v: &F| v.text()));
    }
    if c.bethe.is_empty() {
        println!("  no Bethe roots");
    }
    for b in &c.bethe {
        println!("  Bethe root {} on sheet {}", b.s.text(), b.mu);
    }
}

/// Whether the curve's known solutions are annihilated by the quantum curve.
pub fn annihilates<F: Scalar>(c: &QuantumCurve<F>) -> Option<bool> {
    if c.solutions.is_empty() {
        None
    } else if F::EXACT {
        Some(c.annihilation_residuals().iter().all(|r| r.is_zero()))
    } else {
        Some(c.annihilation_error() < NUMERIC_IDENTITY_TOL)
    }
}

pub fn dispatch<F: Scalar>(cmd: &Cmd) -> Outcome {
    match cmd {
        Cmd::Validate { curve, out } => validate::<F>(curve, out.as_deref()),
        Cmd::Miura { d, k, q, trace_free, out } => miura(*d, *k, q.as_deref(), *trace_free, out.as_deref()),
        Cmd::Symbol { curve: Some(p), out, .. } => symbol_curve::<F>(p, out.as_deref()),
        Cmd::Symbol { curve: None, d, out } => symbol_formal(d.unwrap_or(3), out.as_deref()),
        Cmd::Hirota { curve: Some(p), out, .. } => hirota_curve::<F>(p, out.as_deref()),
        Cmd::Hirota { curve: None, d, out } => hirota_formal(d.unwrap_or(3), out.as_deref()),
        Cmd::Bergman { curve, kernel, decoupled, max_pole_order, loop_equation, out } => bergman::<F>(
            curve,
            kernel.as_deref(),
            *decoupled,
            AnsatzOptions { max_pole_order: *max_pole_order, loop_equation: *loop_equation, ..Default::default() },
            out.as_deref(),
        ),
        Cmd::Recurse { args, out, samples, csv } => recurse_cmd::<F>(args, out.as_deref(), samples, csv.as_deref()),
        Cmd::Loopcheck { args, table, out } => loopcheck::<F>(args, table.as_deref(), out.as_deref()),
        Cmd::ResolveConvention { curve, kernel, out } => resolve::<F>(curve, kernel.as_deref(), out.as_deref()),
        Cmd::Corpus { .. } => unreachable!("handled before backend dispatch"),
    }
}

fn validate<F: Scalar>(p: &Path, out: Option<&Path>) -> Outcome {
    let c = load_curve::<F>(p)?;
    describe_curve(&c);
    let r = c.validate();
    print_report("validate", &r);
    emit(out, &json!({"passed": r.passed(), "curve": curve_summary(&c), "report": r}), false)?;
    Ok(r.passed())
}

fn miura(d: usize, k: Option<usize>, q: Option<&str>, trace_free: bool, out: Option<&Path>) -> Outcome {
    if d == 0 {
        return Err(Error::Input("d must be at least 1".into()).into());
    }
    let ks: Vec<usize> = match k {
        Some(k) if k == 0 || k > d => return Err(Error::Input(format!("k must lie in 1..={d}")).into()),
        Some(k) => vec![k],
        None => (1..=d).collect(),
    };
    let q: Option<Rat> = q.map(|s| parse_scalar(s, &[])).transpose()?;
    let mut gens = serde_json::Map::new();
    for &k in &ks {
        let text = match &q {
            Some(q) => {
                let mut w = w_closed_form(k, &currents(d), q);
                if trace_free {
                    w = impose_trace_free(&w, d);
                }
                w.to_string()
            }
            None => {
                let mut w = w_graded(k, d);
                if trace_free {
                    w = impose_trace_free(&w, d);
                }
                w.fmt_graded("Q")
            }
        };
        println!("W{k} = {text}");
        gens.insert(format!("W{k}"), Value::String(text));
    }
    let mut qs = certification_q_values(d);
    if let Some(q) = &q {
        if !qs.contains(q) && !q.is_zero() {
            qs.push(q.clone());
        }
    }
    let rep = cross_validate(d, &qs);
    let qtext: Vec<String> = qs.iter().map(|q| q.text()).collect();
    println!("closed form vs expansion at Q in {{{}}}: {}", qtext.join(", "), if rep.passed() { "pass" } else { "FAIL" });
    if let Some(m) = &rep.mismatch {
        println!("  W{} at Q = {}: closed form {} vs expansion {}", m.k, m.q, m.closed_form, m.expansion);
    }
    let e = q.as_ref().map(|q| build_e(&currents(d), q).to_string());
    if let Some(e) = &e {
        println!("E = {e}");
    }
    emit(out, &json!({"d": d, "generators": gens, "E": e, "q_values": qtext, "passed": rep.passed()}), false)?;
    Ok(rep.passed())
}

fn symbol_formal(d: usize, out: Option<&Path>) -> Outcome {
    let (s, e) = symbol_and_classical(d)?;
    let ok = s == e;
    let (s, e) = (s.fmt_with(&|c| c.to_string()), e.fmt_with(&|c| c.to_string()));
    println!("symbol(E) = {s}");
    println!("prod (y - J_i) = {e}");
    println!("symbol check d = {d}: {}", if ok { "pass" } else { "FAIL" });
    emit(out, &json!({"d": d, "symbol": s, "classical": e, "passed": ok}), false)?;
    Ok(ok)
}

fn symbol_curve<F: Scalar>(p: &Path, out: Option<&Path>) -> Outcome {
    let c = load_curve::<F>(p)?;
    let fmt = |f: &qtr::RatFunc<F>| format!("({})", f.fmt_with("x", &|v: &F| v.text()));
    let e = c.quantum_curve();
    // Descending yhat-degree.
    let coeffs: Vec<String> = e.coeffs().iter().rev().map(|f| f.fmt_with("x", &|v: &F| v.text())).collect();
    println!("quantum curve = {}", e.fmt_with(&fmt));
    let mut modes = serde_json::Map::new();
    for (name, mode) in [("scale_with_q", ClassicalMode::ScaleWithQ), ("fixed_y", ClassicalMode::FixedY), ("at_current_q", ClassicalMode::AtCurrentQ)] {
        let v = match c.classical_curve(mode) {
            Ok(s) => {
                let t = s.fmt_with(&fmt);
                println!("classical ({name}) = {t}");
                Value::String(t)
            }
            Err(err) => {
                println!("classical ({name}): {err}");
                json!({"error": err.to_string()})
            }
        };
        modes.insert(name.into(), v);
    }
    emit(out, &json!({"Q": c.q.to_json(), "coeffs": coeffs, "classical": modes}), false)?;
    Ok(true)
}

fn hirota_formal(d: usize, out: Option<&Path>) -> Outcome {
    let qs = certification_q_values(d);
    let hirota = qs.iter().all(|q| hirota_determinant_check(d, q));
    let fact = qs.iter().all(|q| determinant_factorization_check(d, q));
    println!("determinant Hirota identity, d = {d}: {}", if hirota { "pass" } else { "FAIL" });
    println!("determinant factorization, d = {d}: {}", if fact { "pass" } else { "FAIL" });
    emit(out, &json!({"d": d, "hirota": hirota, "factorization": fact}), false)?;
    Ok(hirota && fact)
}

fn hirota_curve<F: Scalar>(p: &Path, out: Option<&Path>) -> Outcome {
    let c = load_curve::<F>(p)?;
    let r = c.hirota_residue_check()?;
    for e in &r.entries {
        println!("Res R_{} at {} = {}  {}", e.mu, e.s.text(), e.residue.text(), if e.pass { "ok" } else { "FAIL" });
    }
    let annihilation = annihilates(&c);
    if let Some(a) = annihilation {
        println!("known solutions annihilated: {}", if a { "pass" } else { "FAIL" });
    }
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| json!({"mu": e.mu, "s": e.s.to_json(), "residue": e.residue.to_json(), "pass": e.pass}))
        .collect();
    let ok = r.passed() && annihilation.unwrap_or(true);
    emit(out, &json!({"passed": ok, "residues": entries, "annihilation": annihilation}), false)?;
    println!("hirota: {}", if r.passed() { "pass" } else { "FAIL" });
    Ok(ok)
}

fn bergman<F: Scalar>(curve: &Path, kernel: Option<&Path>, decoupled: bool, opts: AnsatzOptions, out: Option<&Path>) -> Outcome {
    let c = load_curve::<F>(curve)?;
    let k = if decoupled {
        SheetedKernel::decoupled(&c)
    } else if let Some(p) = kernel {
        read_kernel(&read_file(p)?, &c)?
    } else {
        let sol = solve_g_ansatz(&c, &opts)?;
        eprintln!(
            "ansatz: {} unknowns, rank {}, {} free directions set to zero{}",
            sol.unknowns,
            sol.rank,
            sol.nullity,
            if sol.used_constant { ", constant terms used" } else { "" }
        );
        sol.kernel
    };
    let rep = validate_g(&k, &c)?;
    if !rep.passed() {
        for o in bethe_obstructions(&c, &k)? {
            if !o.value.is_negligible(1.0) {
                eprintln!(
                    "obstruction at s = {} (sheet {}), i0 = {}: {}",
                    c.bethe[o.root].s.text(),
                    o.mu,
                    o.i0 + 1,
                    o.value.fmt_with(&["x0"], &k.roots)
                );
            }
        }
    }
    let mut buf = String::new();
    for i in 0..k.d {
        for j in 0..k.d {
            let _ = writeln!(buf, "  C[{}][{}] = {}", i + 1, j + 1, k.b_regular(i, j).fmt_with(&["x0", "x"], &k.roots));
        }
    }
    eprint!("regular part of B:\n{buf}");
    let stdout = !decoupled && kernel.is_none();
    emit(out, &kernel_to_json(&k), stdout)?;
    // Report on stderr so the kernel can be piped.
    let mut lines = String::new();
    let _ = writeln!(lines, "validate_G: {}", if rep.passed() { "pass" } else { "FAIL" });
    for f in &rep.failures {
        let _ = writeln!(lines, "  [{}] {}: {}", f.check, f.location, f.detail);
    }
    eprint!("{lines}");
    Ok(rep.passed())
}

fn forced(args: &RecursionArgs, form: Form) -> SignConvention {
    SignConvention { form, half: args.half_rhs, negated: args.negate_rhs }
}

/// The convention to run with, plus the resolver trials when it was resolved.
fn choose_convention<F: Scalar>(
    args: &RecursionArgs,
    c: &QuantumCurve<F>,
    k: &SheetedKernel<F>,
) -> Result<SignConvention, CliError> {
    Ok(match args.convention {
        ConventionArg::Definition => forced(args, Form::Definition),
        ConventionArg::Appendix => forced(args, Form::Appendix),
        ConventionArg::Auto if c.bethe.is_empty() => {
            eprintln!("no Bethe roots: every convention gives zero correlators, using {}", SignConvention::RESOLVED.label());
            SignConvention::RESOLVED
        }
        ConventionArg::Auto => {
            let conv = resolve_convention(c, k)?;
            eprintln!("resolved convention: {}", conv.label());
            conv
        }
    })
}

fn parse_samples<F: Scalar>(samples: &[String]) -> Result<Vec<Vec<F>>, CliError> {
    samples
        .iter()
        .map(|s| {
            s.split(',')
                .map(|t| parse_scalar::<F>(t.trim(), &F::constants()).map_err(CliError::from))
                .collect::<Result<Vec<F>, CliError>>()
        })
        .collect()
}

fn recurse_cmd<F: Scalar>(args: &RecursionArgs, out: Option<&Path>, samples: &[String], csv: Option<&Path>) -> Outcome {
    if args.chi_max < 0 {
        return Err(Error::Input("--chi-max must be >= 0".into()).into());
    }
    let c = load_curve::<F>(&args.curve)?;
    let k = load_kernel(args.kernel.as_deref(), &c)?;
    let conv = choose_convention(args, &c, &k)?;
    let exec = if args.parallel { Execution::Parallel } else { Execution::Serial };
    let table = recurse(&c, &k, args.chi_max, &RecursionOptions { convention: conv, execution: exec, ..Default::default() })?;
    let pts = parse_samples::<F>(samples)?;
    let file = table_to_json(&table, &c, conv, &pts);
    if let Some(p) = csv {
        let mut text = String::from("entry,point,value\n");
        for (key, e) in &file.entries {
            for s in &e.samples {
                let at: Vec<String> = s.at.iter().map(value_text).collect();
                let _ = writeln!(text, "\"{key}\",\"{}\",\"{}\"", at.join(";"), value_text(&s.value));
            }
        }
        write_file(p, &text)?;
    }
    eprintln!("{} entries up to chi = {} under {}", file.entries.len(), args.chi_max, conv.label());
    emit(out, &file, true)?;
    Ok(true)
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(value_text).collect::<Vec<_>>().join(" + i*"),
        v => v.to_string(),
    }
}

fn loopcheck<F: Scalar>(args: &RecursionArgs, table: Option<&Path>, out: Option<&Path>) -> Outcome {
    let c = load_curve::<F>(&args.curve)?;
    let k = load_kernel(args.kernel.as_deref(), &c)?;
    let t = match table {
        Some(p) => read_table(&read_file(p)?, &c)?,
        None => {
            let conv = choose_convention(args, &c, &k)?;
            let exec = if args.parallel { Execution::Parallel } else { Execution::Serial };
            recurse(&c, &k, args.chi_max, &RecursionOptions { convention: conv, execution: exec, ..Default::default() })?
        }
    };
    let (rep, summary) = check_loop_equations(&c, &k, &t)?;
    for s in &summary {
        println!(
            "(g, n) = ({}, {}): linear {}, quadratic {}",
            s.g,
            s.n,
            if s.sheet_sum_ok { "ok" } else { "FAIL" },
            if s.quadratic_ok { "ok" } else { "FAIL" }
        );
    }
    print_report("loop equations", &rep);
    emit(out, &json!({"passed": rep.passed(), "chi_max": t.chi_max, "summary": summary, "report": rep}), false)?;
    Ok(rep.passed())
}

fn resolve<F: Scalar>(curve: &Path, kernel: Option<&Path>, out: Option<&Path>) -> Outcome {
    let c = load_curve::<F>(curve)?;
    let k = load_kernel(kernel, &c)?;
    let trials = convention_trials(&c, &k)?;
    for t in &trials {
        println!("{:<22} {}  {}", t.convention.label(), if t.passed { "pass" } else { "fail" }, t.reason);
    }
    let passing: Vec<_> = trials.iter().filter(|t| t.passed).collect();
    let unique = passing.len() == 1;
    match passing.len() {
        1 => println!("resolved: {}", passing[0].convention.label()),
        0 => println!("no convention satisfies the loop equations"),
        n => println!("ambiguous: {n} conventions pass"),
    }
    let resolved = unique.then(|| passing[0].convention.label());
    emit(out, &json!({"resolved": resolved, "trials": trials}), false)?;
    Ok(unique)
}
