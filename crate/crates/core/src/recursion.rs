//! The recursion kernel `K_μ` as local series at Bethe roots and the
//! residue recursion for the correlators `W_{g,n}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bergman::{g_difference_local, g_difference_val, SheetedKernel};
use crate::curve::QuantumCurve;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::polesum::PoleSum;
use crate::quasi::rational_exp_integral;
use crate::ratfunc::RatFunc;
use crate::report::is_small;
use crate::series::Laurent;

/// Which drift the kernel equation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Form {
    /// `(Y_{μ+1} - Y_μ + Q∂) K`.
    Definition,
    /// `(Y_μ - Y_{μ+1} + Q∂) K`.
    Appendix,
}

/// Kernel equation `(drift + Q∂) K_μ = c (G[i0][μ+1] - G[i0][μ])` with
/// `c = ±1` or `±½`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SignConvention {
    pub form: Form,
    pub half: bool,
    pub negated: bool,
}

impl SignConvention {
    /// The combination selected by the loop-equation resolver.
    pub const RESOLVED: SignConvention = SignConvention { form: Form::Appendix, half: false, negated: true };

    pub fn all() -> Vec<SignConvention> {
        let mut v = Vec::new();
        for form in [Form::Appendix, Form::Definition] {
            for half in [false, true] {
                for negated in [false, true] {
                    v.push(SignConvention { form, half, negated });
                }
            }
        }
        v
    }

    pub fn rhs_factor<F: Field>(&self) -> F {
        let c = if self.half { F::one() / F::from_i64(2) } else { F::one() };
        if self.negated {
            -c
        } else {
            c
        }
    }

    fn drift_sign(&self) -> i64 {
        match self.form {
            Form::Appendix => 1,
            Form::Definition => -1,
        }
    }

    pub fn label(&self) -> String {
        let form = match self.form {
            Form::Appendix => "appendix",
            Form::Definition => "definition",
        };
        let c = match (self.negated, self.half) {
            (false, false) => "+1",
            (false, true) => "+1/2",
            (true, false) => "-1",
            (true, true) => "-1/2",
        };
        format!("{form}, rhs {c}")
    }
}

impl Default for SignConvention {
    fn default() -> Self {
        Self::RESOLVED
    }
}

/// Choices left open by the kernel equation. Both are functions of `x0`
/// only (one-slot pole sums).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelGauge<F> {
    /// Value of the coefficient at the degenerate order.
    pub free: Option<PoleSum<F>>,
    /// Multiple of the homogeneous solution added to every `K_μ`.
    pub homogeneous: Option<PoleSum<F>>,
}

impl<F> Default for KernelGauge<F> {
    fn default() -> Self {
        KernelGauge { free: None, homogeneous: None }
    }
}

/// `K_μ(x0^{i0}, s + t) = Σ_m k_m(x0) t^m`, `m >= start`. The start is
/// negative only when `G` has poles of order above one at `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSeries<F> {
    pub root: usize,
    pub mu: usize,
    pub i0: usize,
    pub start: i64,
    pub coeffs: Vec<PoleSum<F>>,
    /// Order at which the recursion for `k_m` degenerates, if any.
    pub degenerate_order: Option<i64>,
}

impl<F: Field> KernelSeries<F> {
    pub fn coeff(&self, m: i64) -> Option<&PoleSum<F>> {
        usize::try_from(m - self.start).ok().and_then(|k| self.coeffs.get(k))
    }
}

/// Solves the kernel equation by a power series at the Bethe root `root`.
/// At the degenerate order the right-hand side must vanish (the Bethe
/// equation); otherwise the result is [`Error::BetheViolation`].
pub fn kernel_local_series<F: Field>(
    curve: &QuantumCurve<F>,
    kernel: &SheetedKernel<F>,
    root: usize,
    i0: usize,
    len: usize,
    conv: SignConvention,
    gauge: &KernelGauge<F>,
) -> Result<KernelSeries<F>> {
    let b = curve.bethe.get(root).ok_or_else(|| Error::Input(format!("no Bethe root with index {root}")))?;
    let mu = b.mu;
    if mu == 0 || mu >= curve.d {
        return Err(Error::Input(format!("root {} has invalid sheet {mu}", b.s.display())));
    }
    let len = len.max(3);
    let q = curve.q.clone();
    let sign = F::from_i64(conv.drift_sign());
    let drift_fn: RatFunc<F> = (curve.y[mu - 1].clone() - &curve.y[mu]).scale(&sign);
    let c: F = conv.rhs_factor();
    let g = g_difference_local(kernel, i0, mu, root, len as i64 - 1);
    let start = (g.valuation() + 1).min(0);
    let drift = drift_fn.local_expand(&b.s, len as i64 - start)?.series;
    if drift.valuation() < -1 {
        return Err(Error::Unsupported(format!("drift has a pole of order > 1 at {}", b.s.display())));
    }
    let dm1 = drift.coeff(-1)?;
    let mut ks: Vec<PoleSum<F>> = Vec::with_capacity(len + (-start) as usize);
    let mut degenerate = None;
    for m in start..len as i64 {
        let mut rhs = g.coeff(m - 1)?.scale(&c);
        for j in 0..m - start {
            let dj = drift.coeff(j)?;
            if !dj.is_zero() {
                rhs = rhs.sub(&ks[(m - 1 - j - start) as usize].scale(&dj));
            }
        }
        let a = q.clone() * F::from_i64(m) + &dm1;
        if is_small(&a, q.magnitude()) {
            degenerate = Some(m);
            if !rhs.is_negligible(rhs_scale(&g, &ks)) {
                return Err(Error::BetheViolation {
                    root: b.s.display(),
                    mu,
                    obstruction: rhs.fmt_with(&["x0"], &kernel.roots),
                });
            }
            ks.push(gauge.free.clone().unwrap_or_default());
        } else {
            ks.push(rhs.scale(&a.inv()));
        }
    }
    if let Some(f) = &gauge.homogeneous {
        let h = homogeneous_solution(curve, mu, &b.s, conv, len as i64)?;
        for (k, m) in ks.iter_mut().zip(start..) {
            let hm = h.coeff(m)?;
            *k = k.add(&f.scale(&hm));
        }
    }
    Ok(KernelSeries { root, mu, i0, start, coeffs: ks, degenerate_order: degenerate })
}

fn rhs_scale<F: Field>(g: &Laurent<PoleSum<F>>, ks: &[PoleSum<F>]) -> f64 {
    let a = g.terms().map(|(_, c)| c.max_magnitude()).fold(0.0, f64::max);
    ks.iter().map(|k| k.max_magnitude()).fold(a, f64::max)
}

/// `exp(-sign ∫ (Y_μ - Y_{μ+1})/Q)` at `s`, with the exponential factor
/// normalised to 1 there.
pub fn homogeneous_solution<F: Field>(curve: &QuantumCurve<F>, mu: usize, s: &F, conv: SignConvention, prec: i64) -> Result<Laurent<F>> {
    let sign = F::from_i64(-conv.drift_sign());
    let r = (curve.y[mu - 1].clone() - &curve.y[mu]).scale(&(sign / &curve.q));
    let h = rational_exp_integral(&r)?.local_expand(s, prec)?.series;
    if h.valuation() < 0 {
        return Err(Error::Unsupported("homogeneous solution is singular at the root for this convention".into()));
    }
    Ok(h)
}

/// Computed correlators `W_{g,n}` for `2g - 2 + n > 0`, keyed by `(g, n)`
/// and then by the sheet of each slot (0-based). Each value is a pole sum
/// in the slots `(x_0, …, x_{n-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTable<F> {
    pub d: usize,
    pub chi_max: i64,
    entries: BTreeMap<(usize, usize), BTreeMap<Vec<usize>, PoleSum<F>>>,
}

impl<F: Field> CorrelatorTable<F> {
    pub fn new(d: usize, chi_max: i64) -> Self {
        CorrelatorTable { d, chi_max, entries: BTreeMap::new() }
    }

    pub fn get(&self, g: usize, n: usize) -> Option<&BTreeMap<Vec<usize>, PoleSum<F>>> {
        self.entries.get(&(g, n))
    }

    pub fn entry(&self, g: usize, n: usize, sheets: &[usize]) -> Result<&PoleSum<F>> {
        self.entries
            .get(&(g, n))
            .and_then(|m| m.get(sheets))
            .ok_or_else(|| Error::MissingEntry(format!("W_{g},{n} at sheets {sheets:?}")))
    }

    pub fn insert(&mut self, g: usize, n: usize, w: BTreeMap<Vec<usize>, PoleSum<F>>) {
        self.entries.insert((g, n), w);
    }

    /// `(g, n)` pairs present, in computation order.
    pub fn keys(&self) -> Vec<(usize, usize)> {
        let mut k: Vec<_> = self.entries.keys().cloned().collect();
        k.sort_by_key(|&(g, n)| (2 * g as i64 - 2 + n as i64, g));
        k
    }

    pub fn has(&self, g: usize, n: usize) -> bool {
        self.entries.contains_key(&(g, n))
    }
}

/// `(g, n)` with `1 <= 2g - 2 + n <= chi_max`, `n >= 1`, in order.
pub fn schedule(chi_max: i64) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for chi in 1..=chi_max {
        for g in 0..=((chi + 1) / 2) {
            let n = chi + 2 - 2 * g;
            if n >= 1 {
                v.push((g as usize, n as usize));
            }
        }
    }
    v
}

/// Local expansions of correlators near Bethe roots, including the base
/// cases `W_{0,1} = Y` and `W_{0,2} = B`.
pub struct Local<'a, F: Field> {
    pub curve: &'a QuantumCurve<F>,
    pub kernel: &'a SheetedKernel<F>,
    pub table: &'a CorrelatorTable<F>,
    pub roots: Vec<F>,
}

impl<'a, F: Field> Local<'a, F> {
    pub fn new(curve: &'a QuantumCurve<F>, kernel: &'a SheetedKernel<F>, table: &'a CorrelatorTable<F>) -> Self {
        Local { curve, kernel, table, roots: curve.root_points() }
    }

    /// Lower bound for the valuation of `W_{g,n}(x^{sheets[0]}, …)` in its
    /// first slot at `r0`.
    pub fn val(&self, g: i64, n: usize, sheets: &[usize], r0: usize) -> Result<i64> {
        Ok(match (g, n) {
            (g, _) if g < 0 => 0,
            (0, 1) => -(self.curve.y[sheets[0]].pole_order_at(&self.roots[r0]) as i64),
            (0, 2) => self.kernel.b_val(sheets[0], sheets[1], r0),
            (g, n) => self.table.entry(g as usize, n, sheets)?.min_val(0, r0).min(0),
        })
    }

    /// `W_{g,n}(x^{sheets[0]}, X)` at `x = s + t`; coefficients are pole
    /// sums in the remaining slots.
    pub fn expand(&self, g: i64, n: usize, sheets: &[usize], r0: usize, prec: i64) -> Result<Laurent<PoleSum<F>>> {
        Ok(match (g, n) {
            (g, _) if g < 0 => Laurent::zero(prec),
            (0, 1) => self.curve.y[sheets[0]].local_expand(&self.roots[r0], prec)?.series.map(|c| PoleSum::scalar(c.clone())),
            (0, 2) => self.kernel.b_local(sheets[0], sheets[1], r0, prec),
            (g, n) => self.table.entry(g as usize, n, sheets)?.expand_slot(0, &self.roots, r0, prec),
        })
    }

    /// Valuation bound with the first two slots both at `x`.
    pub fn val2(&self, g: i64, n: usize, sheets: &[usize], r0: usize) -> Result<i64> {
        Ok(match (g, n) {
            (g, _) if g < 0 => 0,
            (0, 2) => self.kernel.b_coincident_val(sheets[0], sheets[1], r0).min(0),
            (g, n) => {
                let w = self.table.entry(g as usize, n, sheets)?;
                w.terms().map(|(k, _)| k[0].min_val(r0) + k[1].min_val(r0)).min().unwrap_or(0).min(0)
            }
        })
    }

    /// `W_{g,n}(x^{sheets[0]}, x^{sheets[1]}, X)` at `x = s + t`.
    pub fn expand2(&self, g: i64, n: usize, sheets: &[usize], r0: usize, prec: i64) -> Result<Laurent<PoleSum<F>>> {
        Ok(match (g, n) {
            (g, _) if g < 0 => Laurent::zero(prec),
            (0, 2) => self.kernel.b_coincident(sheets[0], sheets[1], r0, prec),
            (g, n) => self.table.entry(g as usize, n, sheets)?.expand_diagonal(&self.roots, r0, prec),
        })
    }

    /// `W_{ga}(x^{ia}, X_I) W_{gb}(x^{ib}, X_{I'})` at `x = s + t`, known
    /// below `t^prec`, with the spectators merged back in slot order.
    pub fn product(&self, a: &Factor, b: &Factor, r0: usize, prec: i64) -> Result<Laurent<PoleSum<F>>> {
        let va = self.val(a.g, a.sheets.len(), &a.sheets, r0)?;
        let vb = self.val(b.g, b.sheets.len(), &b.sheets, r0)?;
        let ea = self.expand(a.g, a.sheets.len(), &a.sheets, r0, prec - vb)?;
        let eb = self.expand(b.g, b.sheets.len(), &b.sheets, r0, prec - va)?;
        Ok(ea.mul_with(&eb, |x, y| x.merge(&a.slots, y, &b.slots)).truncate(prec))
    }
}

/// One factor of a product: genus, sheets (first is the probe variable)
/// and positions of its spectators among all spectators.
#[derive(Clone, Debug)]
pub struct Factor {
    pub g: i64,
    pub sheets: Vec<usize>,
    pub slots: Vec<usize>,
}

/// Splits the spectators by the bit mask `mask`.
pub fn split(mask: usize, js: &[usize]) -> ((Vec<usize>, Vec<usize>), (Vec<usize>, Vec<usize>)) {
    let (mut ia, mut ja, mut ib, mut jb) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (p, &j) in js.iter().enumerate() {
        if mask >> p & 1 == 1 {
            ia.push(p);
            ja.push(j);
        } else {
            ib.push(p);
            jb.push(j);
        }
    }
    ((ia, ja), (ib, jb))
}

/// All sheet tuples of length `n`.
pub fn sheet_tuples(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v| (0..d).map(move |j| [v.clone(), vec![j]].concat())).collect();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionOptions<F> {
    pub convention: SignConvention,
    pub gauge: KernelGauge<F>,
    pub execution: Execution,
}

impl<F> Default for RecursionOptions<F> {
    fn default() -> Self {
        RecursionOptions { convention: SignConvention::default(), gauge: KernelGauge::default(), execution: Execution::Serial }
    }
}

fn par_map<T: Sync, U: Send>(exec: Execution, items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    match exec {
        Execution::Serial => items.iter().map(f).collect(),
        Execution::Parallel => items.par_iter().map(f).collect(),
    }
}

/// The integrand `W_{g-1,n+2}(x^{μ+1}, x^μ, X) + Σ' W(x^{μ+1}, I) W(x^μ, I')`
/// near root `r0`, known for negative powers of `t`.
fn integrand<F: Field>(local: &Local<F>, g: usize, js: &[usize], r0: usize, prec: i64) -> Result<Laurent<PoleSum<F>>> {
    let mu = local.curve.bethe[r0].mu;
    let (up, down) = (mu, mu - 1);
    let n = js.len();
    let g = g as i64;
    let mut acc = Laurent::zero(prec);
    if g >= 1 {
        let sheets = [vec![up, down], js.to_vec()].concat();
        acc = acc.add(&local.expand2(g - 1, n + 2, &sheets, r0, prec)?);
    }
    for h in 0..=g {
        for mask in 0..(1usize << n) {
            let ((ia, ja), (ib, jb)) = split(mask, js);
            if (h == 0 && ia.is_empty()) || (g - h == 0 && ib.is_empty()) {
                continue;
            }
            let a = Factor { g: h, sheets: [vec![up], ja].concat(), slots: ia };
            let b = Factor { g: g - h, sheets: [vec![down], jb].concat(), slots: ib };
            acc = acc.add(&local.product(&a, &b, r0, prec)?);
        }
    }
    Ok(acc)
}

/// One recursion step: `W_{g,n}` for every sheet tuple, from the entries of
/// lower complexity already in `table`.
pub fn tr_step<F: Field>(
    curve: &QuantumCurve<F>,
    kernel: &SheetedKernel<F>,
    table: &CorrelatorTable<F>,
    g: usize,
    n: usize,
    opts: &RecursionOptions<F>,
) -> Result<BTreeMap<Vec<usize>, PoleSum<F>>> {
    if n == 0 {
        return Err(Error::Input("correlators need at least one slot".into()));
    }
    let d = curve.d;
    let local = Local::new(curve, kernel, table);
    let spect = sheet_tuples(d, n - 1);
    let mut out: BTreeMap<Vec<usize>, PoleSum<F>> = BTreeMap::new();
    for key in sheet_tuples(d, n) {
        out.insert(key, PoleSum::zero());
    }
    for r0 in 0..curve.bethe.len() {
        // A kernel with poles at the root needs the integrand beyond its
        // principal part; probe the start order first.
        let start = (0..d)
            .map(|i0| (g_difference_val(kernel, i0, curve.bethe[r0].mu, r0) + 1).min(0))
            .min()
            .unwrap_or(0);
        let fs = par_map(opts.execution, &spect, |js| integrand(&local, g, js, r0, -start))?;
        let len = fs.iter().map(|f| (-f.valuation()).max(0)).max().unwrap_or(0) as usize;
        if len == 0 && fs.iter().all(|f| f.terms().next().is_none()) {
            continue;
        }
        let i0s: Vec<usize> = (0..d).collect();
        let ks = par_map(opts.execution, &i0s, |&i0| {
            kernel_local_series(curve, kernel, r0, i0, len, opts.convention, &opts.gauge)
        })?;
        let jobs: Vec<(usize, usize)> = (0..d).flat_map(|i0| (0..spect.len()).map(move |j| (i0, j))).collect();
        let parts = par_map(opts.execution, &jobs, |&(i0, j)| {
            let f = &fs[j];
            let mut acc = PoleSum::zero();
            for (k, m) in ks[i0].coeffs.iter().zip(ks[i0].start..) {
                if -1 - m >= f.precision() {
                    continue;
                }
                let c = f.coeff(-1 - m)?;
                if !c.is_empty() && !k.is_empty() {
                    acc = acc.add(&k.tensor(&c));
                }
            }
            Ok(acc)
        })?;
        for ((i0, j), p) in jobs.into_iter().zip(parts) {
            let key = [vec![i0], spect[j].clone()].concat();
            let e = out.get_mut(&key).expect("all sheet tuples present");
            *e = e.add(&p);
        }
    }
    if !F::EXACT {
        for v in out.values_mut() {
            *v = v.chop(crate::report::NUMERIC_IDENTITY_TOL);
        }
    }
    Ok(out)
}

/// Fills the table for `2g - 2 + n <= chi_max`.
pub fn recurse<F: Field>(
    curve: &QuantumCurve<F>,
    kernel: &SheetedKernel<F>,
    chi_max: i64,
    opts: &RecursionOptions<F>,
) -> Result<CorrelatorTable<F>> {
    const CHI_LIMIT: i64 = 6;
    if chi_max > CHI_LIMIT {
        return Err(Error::BudgetExceeded(format!("chi_max = {chi_max} exceeds the supported limit {CHI_LIMIT}")));
    }
    let mut table = CorrelatorTable::new(curve.d, chi_max);
    for (g, n) in schedule(chi_max) {
        let w = tr_step(curve, kernel, &table, g, n, opts)?;
        table.insert(g, n, w);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_order() {
        assert_eq!(schedule(2), vec![(0, 3), (1, 1), (0, 4), (1, 2)]);
        assert!(schedule(0).is_empty());
    }

    #[test]
    fn conventions() {
        assert_eq!(SignConvention::all().len(), 8);
        assert_eq!(SignConvention::RESOLVED.rhs_factor::<crate::field::Rat>(), crate::field::rat(-1, 1));
    }
}
