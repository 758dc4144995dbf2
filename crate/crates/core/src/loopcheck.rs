//! Linear and quadratic loop equations assembled from computed correlators,
//! and the resolver that picks the kernel-equation convention.

use serde::Serialize;

use crate::bergman::SheetedKernel;
use crate::curve::QuantumCurve;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::polesum::{series_derivative, PoleSum};
use crate::recursion::{recurse, sheet_tuples, split, CorrelatorTable, Factor, Local, RecursionOptions, SignConvention};
use crate::report::Report;
use crate::series::Laurent;

/// `P^{(g)}_{n;k}` with spectator sheets fixed. For `k = 0` the sheet sum
/// is stored as a pole sum in the `n + 1` slots; for `k = 1` the principal
/// parts at each Bethe root, as series in the probe variable with pole-sum
/// coefficients in the spectators.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopPolynomial<F> {
    pub g: usize,
    pub n: usize,
    pub k: u8,
    pub spectators: Vec<usize>,
    pub sheet_sum: Option<PoleSum<F>>,
    pub principal_parts: Vec<(usize, Laurent<PoleSum<F>>)>,
}

/// `Σ_i W_{g,n+1}(x^i, X)`.
pub fn build_p0<F: Field>(local: &Local<F>, g: usize, n: usize, js: &[usize]) -> Result<LoopPolynomial<F>> {
    let d = local.curve.d;
    let sum = match (g, n) {
        (0, 0) => {
            let tr = local.curve.y.iter().fold(crate::ratfunc::RatFunc::zero(), |a, y| a + y);
            if !tr.is_zero() && !local.curve.is_trace_free() {
                return Err(Error::Unsupported("sheet sum of W_0,1 on a curve with nonzero trace".into()));
            }
            PoleSum::zero()
        }
        (0, 1) => (0..d).fold(PoleSum::zero(), |a, i| a.add(&local.kernel.b_regular(i, js[0]))),
        _ => {
            let mut acc = PoleSum::zero();
            for i in 0..d {
                let key = [vec![i], js.to_vec()].concat();
                acc = acc.add(local.table.entry(g, n + 1, &key)?);
            }
            acc
        }
    };
    Ok(LoopPolynomial { g, n, k: 0, spectators: js.to_vec(), sheet_sum: Some(sum), principal_parts: Vec::new() })
}

/// Principal part of `P^{(g)}_{n;1}(x; X)` at root `r0`:
/// `Σ_{i<j} [W_{g-1,n+2}(x^i, x^j, X) + Σ W(x^i, I) W(x^j, I')]
///  - Q Σ_j (j-1) ∂_x W_{g,n+1}(x^j, X)`, products over all splittings.
pub fn p1_local<F: Field>(local: &Local<F>, g: usize, js: &[usize], r0: usize) -> Result<Laurent<PoleSum<F>>> {
    let d = local.curve.d;
    let n = js.len();
    let g = g as i64;
    let mut acc = Laurent::zero(0);
    for i in 0..d {
        for k in i + 1..d {
            if g >= 1 {
                let sheets = [vec![i, k], js.to_vec()].concat();
                acc = acc.add(&local.expand2(g - 1, n + 2, &sheets, r0, 0)?);
            }
            for h in 0..=g {
                for mask in 0..(1usize << n) {
                    let ((ia, ja), (ib, jb)) = split(mask, js);
                    let a = Factor { g: h, sheets: [vec![i], ja].concat(), slots: ia };
                    let b = Factor { g: g - h, sheets: [vec![k], jb].concat(), slots: ib };
                    acc = acc.add(&local.product(&a, &b, r0, 0)?);
                }
            }
        }
    }
    for k in 1..d {
        let sheets = [vec![k], js.to_vec()].concat();
        let w = local.expand(g, n + 1, &sheets, r0, 1)?;
        let c = local.curve.q.clone() * F::from_i64(k as i64);
        acc = acc.sub(&series_derivative(&w).map(|p| p.scale(&c)));
    }
    Ok(acc)
}

pub fn build_p1<F: Field>(local: &Local<F>, g: usize, n: usize, js: &[usize]) -> Result<LoopPolynomial<F>> {
    if js.len() != n {
        return Err(Error::Input(format!("expected {n} spectator sheets")));
    }
    let parts =
        (0..local.curve.bethe.len()).map(|r0| Ok((r0, p1_local(local, g, js, r0)?))).collect::<Result<Vec<_>>>()?;
    Ok(LoopPolynomial { g, n, k: 1, spectators: js.to_vec(), sheet_sum: None, principal_parts: parts })
}

fn series_negligible<F: Field>(s: &Laurent<PoleSum<F>>) -> bool {
    let scale = s.terms().map(|(_, c)| c.max_magnitude()).fold(1.0, f64::max);
    s.terms().all(|(_, c)| c.is_negligible(scale) || F::EXACT && c.is_empty())
}

fn location<F: Field>(p: &LoopPolynomial<F>) -> String {
    let js: Vec<String> = p.spectators.iter().map(|j| (j + 1).to_string()).collect();
    format!("P^({})_({};{}) spectators [{}]", p.g, p.n, p.k, js.join(","))
}

/// All principal-part coefficients of `P` at every Bethe root vanish.
pub fn check_holomorphic_at_bethe<F: Field>(p: &LoopPolynomial<F>, roots: &[F]) -> Report {
    let mut rep = Report::default();
    let names: Vec<String> = (1..=p.n).map(|i| format!("z{i}")).collect();
    let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    for (r0, s) in &p.principal_parts {
        if series_negligible(s) {
            continue;
        }
        for (k, c) in s.terms() {
            rep.fail(
                "loop-equation",
                format!("{} at s = {}", location(p), roots[*r0].display()),
                format!("coefficient of (x-s)^{k}: {}", c.fmt_with(&names, roots)),
            );
        }
    }
    rep
}

/// The sheet sum vanishes.
pub fn check_sheet_sum<F: Field>(p: &LoopPolynomial<F>, roots: &[F]) -> Report {
    let mut rep = Report::default();
    if let Some(s) = &p.sheet_sum {
        if !s.is_negligible(1.0) {
            let names: Vec<String> = (0..=p.n).map(|i| if i == 0 { "x".into() } else { format!("z{i}") }).collect();
            let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            rep.fail("sheet-sum", location(p), s.fmt_with(&names, roots));
        }
    }
    rep
}

/// `(g, n)` for which both loop equations can be assembled from a table
/// with budget `chi_max`: `2g - 1 + n <= chi_max`.
pub fn loop_indices(chi_max: i64) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for g in 0..=((chi_max + 1) / 2).max(0) as usize {
        for n in 0.. {
            if 2 * g as i64 - 1 + n as i64 > chi_max {
                break;
            }
            v.push((g, n));
        }
    }
    v.sort_by_key(|&(g, n)| (2 * g as i64 - 1 + n as i64, g));
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopSummary {
    pub g: usize,
    pub n: usize,
    pub sheet_sum_ok: bool,
    pub quadratic_ok: bool,
}

/// Runs both loop equations for every index available from `table`.
pub fn check_loop_equations<F: Field>(
    curve: &QuantumCurve<F>,
    kernel: &SheetedKernel<F>,
    table: &CorrelatorTable<F>,
) -> Result<(Report, Vec<LoopSummary>)> {
    let local = Local::new(curve, kernel, table);
    let roots = curve.root_points();
    let mut rep = Report::default();
    let mut summary = Vec::new();
    for (g, n) in loop_indices(table.chi_max) {
        let mut lin = Report::default();
        let mut quad = Report::default();
        for js in sheet_tuples(curve.d, n) {
            if curve.is_trace_free() {
                lin.merge(check_sheet_sum(&build_p0(&local, g, n, &js)?, &roots));
            }
            quad.merge(check_holomorphic_at_bethe(&build_p1(&local, g, n, &js)?, &roots));
        }
        summary.push(LoopSummary { g, n, sheet_sum_ok: lin.passed(), quadratic_ok: quad.passed() });
        rep.merge(lin);
        rep.merge(quad);
    }
    if !curve.is_trace_free() {
        rep.note("curve has nonzero trace: linear loop equations not checked");
    }
    Ok((rep, summary))
}

/// Outcome of one convention in the resolver.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConventionTrial {
    pub convention: SignConvention,
    pub passed: bool,
    pub reason: String,
}

/// Runs the recursion to `chi_max = 1` under every convention and reports
/// which ones satisfy all loop equations.
pub fn convention_trials<F: Field>(curve: &QuantumCurve<F>, kernel: &SheetedKernel<F>) -> Result<Vec<ConventionTrial>> {
    let mut out = Vec::new();
    for conv in SignConvention::all() {
        let opts = RecursionOptions { convention: conv, ..Default::default() };
        let trial = match recurse(curve, kernel, 1, &opts) {
            Err(e @ Error::BetheViolation { .. }) => ConventionTrial { convention: conv, passed: false, reason: e.to_string() },
            Err(e) => return Err(e),
            Ok(table) => {
                let (rep, _) = check_loop_equations(curve, kernel, &table)?;
                let reason = match rep.failures.first() {
                    None => "all loop equations hold".to_string(),
                    Some(f) => format!("{} failures, first: {} at {}", rep.failures.len(), f.check, f.location),
                };
                ConventionTrial { convention: conv, passed: rep.passed(), reason }
            }
        };
        out.push(trial);
    }
    Ok(out)
}

/// The unique convention passing every loop-equation check.
pub fn resolve_convention<F: Field>(curve: &QuantumCurve<F>, kernel: &SheetedKernel<F>) -> Result<SignConvention> {
    let trials = convention_trials(curve, kernel)?;
    let ok: Vec<_> = trials.iter().filter(|t| t.passed).collect();
    match ok.len() {
        1 => Ok(ok[0].convention),
        0 => Err(Error::NoValidConvention("no sign/normalisation combination satisfies the loop equations".into())),
        _ => Err(Error::AmbiguousConvention(
            ok.iter().map(|t| t.convention.label()).collect::<Vec<_>>().join("; "),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices() {
        assert_eq!(loop_indices(2), vec![(0, 0), (0, 1), (0, 2), (1, 0), (0, 3), (1, 1)]);
    }
}
