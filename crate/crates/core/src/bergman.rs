//! The two-point input of the recursion: the third-kind kernel
//! `G(x0^{i0}, x^μ)` and the Bergman kernel `B = ∂_x G`.
//!
//! `G[i0][μ](x0, x) = -(δ_{i0 μ} - 1/d)/(x - x0) + regular[i0][μ](x0, x)`,
//! where the regular part is a pole sum whose poles sit at Bethe roots.

use std::collections::BTreeMap;

use crate::curve::QuantumCurve;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::solve;
use crate::polesum::{Basis, PoleSum};
use crate::report::Report;
use crate::series::Laurent;

#[derive(Clone, Debug, PartialEq)]
pub struct SheetedKernel<F> {
    pub d: usize,
    /// Positions of the Bethe roots the pole indices refer to.
    pub roots: Vec<F>,
    /// `regular[i0][μ]` in slots `(x0, x)`, sheets 0-based.
    pub regular: Vec<Vec<PoleSum<F>>>,
}

impl<F: Field> SheetedKernel<F> {
    /// Only the diagonal term.
    pub fn decoupled(curve: &QuantumCurve<F>) -> Self {
        SheetedKernel { d: curve.d, roots: curve.root_points(), regular: vec![vec![PoleSum::zero(); curve.d]; curve.d] }
    }

    /// The kernel whose Bergman kernel has regular part `c[i][j](x, z)`.
    pub fn from_bergman(curve: &QuantumCurve<F>, c: &[Vec<PoleSum<F>>]) -> Result<Self> {
        let regular = c.iter().map(|row| row.iter().map(|p| p.antiderivative(1)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(SheetedKernel { d: curve.d, roots: curve.root_points(), regular })
    }

    /// Coefficient of the diagonal term.
    pub fn pair(&self, i: usize, j: usize) -> F {
        let delta = if i == j { F::one() } else { F::zero() };
        delta - F::one() / F::from_i64(self.d as i64)
    }

    /// Regular part of `B[i][j](x, z)`.
    pub fn b_regular(&self, i: usize, j: usize) -> PoleSum<F> {
        self.regular[i][j].derivative(1)
    }

    /// Adds `f[i0](x0)` to every `G[i0][μ]`. The shifts must sum to zero.
    pub fn with_gauge(&self, f: &[PoleSum<F>]) -> Result<Self> {
        if f.len() != self.d {
            return Err(Error::Input(format!("gauge needs {} functions", self.d)));
        }
        let total = f.iter().fold(PoleSum::zero(), |a, p| a.add(p));
        if !total.is_negligible(1.0) {
            return Err(Error::Input("gauge functions must sum to zero".into()));
        }
        let mut k = self.clone();
        for (i0, fi) in f.iter().enumerate() {
            let shift = fi.tensor(&PoleSum::term(vec![Basis::Mono(0)], F::one()));
            for mu in 0..self.d {
                k.regular[i0][mu] = k.regular[i0][mu].add(&shift);
            }
        }
        Ok(k)
    }

    /// Adds `f(x0) c_μ` to every `G[i0][μ]`.
    pub fn with_sheet_constants(&self, f: &PoleSum<F>, c: &[F]) -> Self {
        let mut k = self.clone();
        for i0 in 0..self.d {
            for (mu, cm) in c.iter().enumerate() {
                let shift = f.tensor(&PoleSum::term(vec![Basis::Mono(0)], cm.clone()));
                k.regular[i0][mu] = k.regular[i0][mu].add(&shift);
            }
        }
        k
    }

    /// `G[i0][μ](x0, s + t)` with pole-sum coefficients in `x0`.
    pub fn g_local(&self, i0: usize, mu: usize, r0: usize, prec: i64) -> Laurent<PoleSum<F>> {
        let p = self.pair(i0, mu);
        // -1/(x - x0) = Σ t^k / (x0 - s)^{k+1}
        let diag = Laurent::from_terms(
            (0..prec.max(0)).map(|k| (k, PoleSum::term(vec![Basis::pole(r0, k as u32 + 1)], p.clone()))).collect(),
            prec,
        );
        diag.add(&self.regular[i0][mu].expand_slot(1, &self.roots, r0, prec))
    }

    pub fn g_val(&self, i0: usize, mu: usize, r0: usize) -> i64 {
        self.regular[i0][mu].min_val(1, r0).min(0)
    }

    /// `B[i][j](s + t, z)` with pole-sum coefficients in `z`.
    pub fn b_local(&self, i: usize, j: usize, r0: usize, prec: i64) -> Laurent<PoleSum<F>> {
        let p = self.pair(i, j);
        // 1/(x - z)^2 = Σ (k+1) t^k / (z - s)^{k+2}
        let diag = Laurent::from_terms(
            (0..prec.max(0))
                .map(|k| (k, PoleSum::term(vec![Basis::pole(r0, k as u32 + 2)], p.clone() * F::from_i64(k + 1))))
                .collect(),
            prec,
        );
        diag.add(&self.b_regular(i, j).expand_slot(0, &self.roots, r0, prec))
    }

    pub fn b_val(&self, i: usize, j: usize, r0: usize) -> i64 {
        self.b_regular(i, j).min_val(0, r0).min(0)
    }

    /// Regular part of `B[i][j](x, x)` near a root. The diagonal term is
    /// dropped: for `i ≠ j` it is an `x`-independent divergent constant.
    pub fn b_coincident(&self, i: usize, j: usize, r0: usize, prec: i64) -> Laurent<PoleSum<F>> {
        self.b_regular(i, j).expand_diagonal(&self.roots, r0, prec)
    }

    pub fn b_coincident_val(&self, i: usize, j: usize, r0: usize) -> i64 {
        let b = self.b_regular(i, j);
        b.terms().map(|(k, _)| k[0].min_val(r0) + k[1].min_val(r0)).min().unwrap_or(0)
    }

    /// `G[i0][μ](x0, x)` at a point.
    pub fn eval_g(&self, i0: usize, mu: usize, x0: &F, x: &F) -> Option<F> {
        let t = x.clone() - x0;
        if t.is_zero() {
            return None;
        }
        let reg = self.regular[i0][mu].eval(&self.roots, &[x0.clone(), x.clone()])?;
        Some(reg - self.pair(i0, mu) / t)
    }

    /// `B[i][j](x, z)` at a point.
    pub fn eval_b(&self, i: usize, j: usize, x: &F, z: &F) -> Option<F> {
        let t = x.clone() - z;
        if t.is_zero() {
            return None;
        }
        let reg = self.b_regular(i, j).eval(&self.roots, &[x.clone(), z.clone()])?;
        Some(reg + self.pair(i, j) / (t.clone() * &t))
    }
}

/// Value of `Res_{x=s} R_μ(x) · ½(G[i0][μ+1] - G[i0][μ])(x0, x)` as a
/// function of `x0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheObstruction<F> {
    pub root: usize,
    pub mu: usize,
    pub i0: usize,
    pub value: PoleSum<F>,
}

/// `G[i0][μ+1] - G[i0][μ]` near root `r0`, `μ` 1-based.
pub fn g_difference_local<F: Field>(k: &SheetedKernel<F>, i0: usize, mu: usize, r0: usize, prec: i64) -> Laurent<PoleSum<F>> {
    k.g_local(i0, mu, r0, prec).sub(&k.g_local(i0, mu - 1, r0, prec))
}

pub(crate) fn g_difference_val<F: Field>(k: &SheetedKernel<F>, i0: usize, mu: usize, r0: usize) -> i64 {
    k.g_val(i0, mu, r0).min(k.g_val(i0, mu - 1, r0))
}

/// Unnormalised residues `Res R_μ (G[i0][μ+1] - G[i0][μ])` for every root
/// and every `i0`.
fn raw_bethe_residues<F: Field>(curve: &QuantumCurve<F>, k: &SheetedKernel<F>) -> Result<Vec<BetheObstruction<F>>> {
    let mut out = Vec::new();
    for (r0, b) in curve.bethe.iter().enumerate() {
        if b.mu == 0 || b.mu >= curve.d {
            continue;
        }
        let r = curve.ratio_r(b.mu)?;
        for i0 in 0..curve.d {
            let vg = g_difference_val(k, i0, b.mu, r0);
            let rs = r.local_expand(&b.s, (-vg).max(0))?.series;
            let g = g_difference_local(k, i0, b.mu, r0, (-rs.valuation()).max(0));
            let prod = g.mul_with(&rs, |p, c| p.scale(c));
            out.push(BetheObstruction { root: r0, mu: b.mu, i0, value: prod.residue()? });
        }
    }
    Ok(out)
}

/// Bethe compatibility obstructions, with the `½` of the kernel equation.
pub fn bethe_obstructions<F: Field>(curve: &QuantumCurve<F>, k: &SheetedKernel<F>) -> Result<Vec<BetheObstruction<F>>> {
    let half = F::one() / F::from_i64(2);
    Ok(raw_bethe_residues(curve, k)?
        .into_iter()
        .map(|mut o| {
            o.value = o.value.scale(&half);
            o
        })
        .collect())
}

/// Checks every structural property of a kernel against a curve.
pub fn validate_g<F: Field>(k: &SheetedKernel<F>, curve: &QuantumCurve<F>) -> Result<Report> {
    let mut rep = Report::default();
    let d = curve.d;
    if k.d != d || k.regular.len() != d || k.regular.iter().any(|r| r.len() != d) {
        rep.fail("shape", "kernel", format!("expected a {d} x {d} table"));
        return Ok(rep);
    }
    if k.roots.len() != curve.bethe.len() || k.roots.iter().zip(&curve.bethe).any(|(a, b)| !crate::report::same_point(a, &b.s)) {
        rep.fail("roots", "kernel", "kernel root list differs from the curve's Bethe roots");
        return Ok(rep);
    }
    let names = ["x0", "x"];
    for i0 in 0..d {
        for mu in 0..d {
            for (key, _) in k.regular[i0][mu].terms() {
                if let Basis::Pole { root, .. } = key[1] {
                    let m = curve.bethe[root].mu;
                    if m != mu + 1 && m != mu {
                        rep.fail(
                            "pole-locus",
                            format!("G[{}][{}]", i0 + 1, mu + 1),
                            format!("pole at {} outside S_mu and S_(mu-1)", k.roots[root].display()),
                        );
                    }
                }
            }
        }
        let sum = (0..d).fold(PoleSum::zero(), |a, mu| a.add(&k.regular[i0][mu]));
        let polar: PoleSum<F> = sum
            .terms()
            .filter(|(key, _)| matches!(key[1], Basis::Pole { .. }))
            .fold(PoleSum::zero(), |mut a, (key, c)| {
                a.add_term(key.clone(), c.clone());
                a
            });
        if !polar.is_negligible(sum.max_magnitude()) {
            rep.fail("sheet-sum-G", format!("i0 = {}", i0 + 1), format!("sum over mu has poles: {}", polar.fmt_with(&names, &k.roots)));
        }
    }
    let bnames = ["x", "z"];
    for j in 0..d {
        let s = (0..d).fold(PoleSum::zero(), |a, i| a.add(&k.b_regular(i, j)));
        if !s.is_negligible(1.0) {
            rep.fail("sheet-sum-B", format!("j = {}", j + 1), s.fmt_with(&bnames, &k.roots));
        }
        for i in 0..d {
            let a = k.b_regular(i, j);
            let b = k.b_regular(j, i).permute(&[1, 0]);
            if !a.approx_eq(&b) {
                rep.fail("symmetry", format!("B[{}][{}]", i + 1, j + 1), "B(x^i, z^j) != B(z^j, x^i)");
            }
        }
    }
    for o in bethe_obstructions(curve, k)? {
        if !o.value.is_negligible(1.0) {
            rep.fail(
                "bethe",
                format!("s = {}, mu = {}, i0 = {}", k.roots[o.root].display(), o.mu, o.i0 + 1),
                format!("obstruction {}", o.value.fmt_with(&["x0"], &k.roots)),
            );
        }
    }
    Ok(rep)
}

/// When to include constants in the Bergman ansatz basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantTerm {
    Never,
    /// Only if the pole-only ansatz has no solution.
    Fallback,
    Always,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzOptions {
    /// Highest pole order of `G` at a Bethe root (so `B` reaches one more).
    pub max_pole_order: u32,
    pub constant: ConstantTerm,
    pub bethe: bool,
    /// Impose the quadratic loop equation at `(g, n) = (0, 1)`.
    pub loop_equation: bool,
}

impl Default for AnsatzOptions {
    fn default() -> Self {
        AnsatzOptions { max_pole_order: 2, constant: ConstantTerm::Fallback, bethe: true, loop_equation: false }
    }
}

#[derive(Clone, Debug)]
pub struct AnsatzSolution<F> {
    pub kernel: SheetedKernel<F>,
    pub unknowns: usize,
    pub rank: usize,
    /// Dimension of the solution space.
    pub nullity: usize,
    pub used_constant: bool,
    /// Directions of the solution space, as regular parts of `G`.
    pub null_directions: Vec<SheetedKernel<F>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Row {
    SheetSum { j: usize, key: Vec<Basis> },
    Bethe { root: usize, i0: usize, key: Vec<Basis> },
    Loop { root: usize, j: usize, power: i64, key: Vec<Basis> },
}

fn constraint_rows<F: Field>(curve: &QuantumCurve<F>, k: &SheetedKernel<F>, opts: &AnsatzOptions) -> Result<BTreeMap<Row, F>> {
    let mut rows = BTreeMap::new();
    for j in 0..k.d {
        let s = (0..k.d).fold(PoleSum::zero(), |a, i| a.add(&k.b_regular(i, j)));
        for (key, c) in s.terms() {
            rows.insert(Row::SheetSum { j, key: key.clone() }, c.clone());
        }
    }
    if opts.bethe {
        for o in raw_bethe_residues(curve, k)? {
            for (key, c) in o.value.terms() {
                rows.insert(Row::Bethe { root: o.root, i0: o.i0, key: key.clone() }, c.clone());
            }
        }
    }
    if opts.loop_equation {
        let table = crate::recursion::CorrelatorTable::new(k.d, 0);
        let local = crate::recursion::Local::new(curve, k, &table);
        for root in 0..curve.bethe.len() {
            for j in 0..k.d {
                let p = crate::loopcheck::p1_local(&local, 0, &[j], root)?;
                for (power, c) in p.terms() {
                    for (key, v) in c.terms() {
                        rows.insert(Row::Loop { root, j, power, key: key.clone() }, v.clone());
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// `(i, a, j, b)` with `(i, a) <= (j, b)`.
type Unknown = (usize, Basis, usize, Basis);

fn sheet_basis<F: Field>(curve: &QuantumCurve<F>, i: usize, max_order: u32, constant: bool) -> Vec<Basis> {
    let mut v = Vec::new();
    if constant {
        v.push(Basis::Mono(0));
    }
    for (r, b) in curve.bethe.iter().enumerate() {
        if b.mu == i + 1 || b.mu == i {
            for o in 2..=max_order + 1 {
                v.push(Basis::pole(r, o));
            }
        }
    }
    v
}

fn unknowns<F: Field>(curve: &QuantumCurve<F>, max_order: u32, constant: bool) -> Vec<Unknown> {
    let slots: Vec<(usize, Basis)> =
        (0..curve.d).flat_map(|i| sheet_basis(curve, i, max_order, constant).into_iter().map(move |b| (i, b))).collect();
    let mut u = Vec::new();
    for (p, a) in slots.iter().enumerate() {
        for b in &slots[p..] {
            u.push((a.0, a.1, b.0, b.1));
        }
    }
    u.sort_by_key(|&(i, a, j, b)| (a.degree() + b.degree(), i, a, j, b));
    u
}

fn unknown_bergman<F: Field>(d: usize, u: &Unknown, c: &F) -> Vec<Vec<PoleSum<F>>> {
    let (i, a, j, b) = *u;
    let mut m = vec![vec![PoleSum::zero(); d]; d];
    m[i][j].add_term(vec![a, b], c.clone());
    if (i, a) != (j, b) {
        m[j][i].add_term(vec![b, a], c.clone());
    }
    m
}

fn kernel_from_vector<F: Field>(curve: &QuantumCurve<F>, us: &[Unknown], v: &[F]) -> Result<SheetedKernel<F>> {
    let d = curve.d;
    let mut m = vec![vec![PoleSum::zero(); d]; d];
    for (u, c) in us.iter().zip(v) {
        let e = unknown_bergman(d, u, c);
        for i in 0..d {
            for j in 0..d {
                m[i][j] = m[i][j].add(&e[i][j]);
            }
        }
    }
    SheetedKernel::from_bergman(curve, &m)
}

struct LinearSystem<F> {
    unknowns: Vec<Unknown>,
    a: Vec<Vec<F>>,
    b: Vec<F>,
}

fn build_system<F: Field>(curve: &QuantumCurve<F>, opts: &AnsatzOptions, constant: bool) -> Result<LinearSystem<F>> {
    let us = unknowns(curve, opts.max_pole_order, constant);
    let base_kernel = SheetedKernel::decoupled(curve);
    let base = constraint_rows(curve, &base_kernel, opts)?;
    let mut cols: Vec<BTreeMap<Row, F>> = Vec::with_capacity(us.len());
    for u in &us {
        let k = SheetedKernel::from_bergman(curve, &unknown_bergman(curve.d, u, &F::one()))?;
        let mut r = constraint_rows(curve, &k, opts)?;
        for (key, c) in &base {
            let e = r.entry(key.clone()).or_insert_with(F::zero);
            *e = e.clone() - c;
        }
        cols.push(r);
    }
    let mut keys: Vec<Row> = base.keys().cloned().collect();
    for c in &cols {
        keys.extend(c.keys().cloned());
    }
    keys.sort();
    keys.dedup();
    let a = keys.iter().map(|key| cols.iter().map(|c| c.get(key).cloned().unwrap_or_else(F::zero)).collect()).collect();
    let b = keys.iter().map(|key| -base.get(key).cloned().unwrap_or_else(F::zero)).collect();
    Ok(LinearSystem { unknowns: us, a, b })
}

/// Solves for a curve-adapted kernel: sheet sums, symmetry (built into the
/// unknowns), Bethe compatibility and optionally the `(0, 1)` quadratic loop
/// equation. Free directions are set to zero, preferring low pole degree.
pub fn solve_g_ansatz<F: Field>(curve: &QuantumCurve<F>, opts: &AnsatzOptions) -> Result<AnsatzSolution<F>> {
    let attempts: &[bool] = match opts.constant {
        ConstantTerm::Never => &[false],
        ConstantTerm::Fallback => &[false, true],
        ConstantTerm::Always => &[true],
    };
    for &constant in attempts {
        let sys = build_system(curve, opts, constant)?;
        let n = sys.unknowns.len();
        let Some(sol) = solve(&sys.a, &sys.b, n) else { continue };
        let kernel = kernel_from_vector(curve, &sys.unknowns, &sol.particular)?;
        let null_directions =
            sol.nullspace.iter().map(|v| kernel_from_vector(curve, &sys.unknowns, v)).collect::<Result<Vec<_>>>()?;
        return Ok(AnsatzSolution {
            kernel,
            unknowns: n,
            rank: sol.rank,
            nullity: sol.nullspace.len(),
            used_constant: constant,
            null_directions,
        });
    }
    Err(Error::UnsolvableAnsatz(format!(
        "no kernel with poles of order <= {} at the Bethe roots; try a larger max pole order",
        opts.max_pole_order
    )))
}

/// Ranks of the ansatz system under different constraint sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSummary {
    pub unknowns: usize,
    pub rank: usize,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redundancy {
    pub bethe: SystemSummary,
    pub loop_equation: SystemSummary,
    pub both: SystemSummary,
}

impl Redundancy {
    /// Bethe compatibility and the `(0, 1)` loop equation cut out the same
    /// affine space.
    pub fn equivalent(&self) -> bool {
        self.bethe.consistent
            && self.loop_equation.consistent
            && self.both.consistent
            && self.bethe.rank == self.both.rank
            && self.loop_equation.rank == self.both.rank
    }
}

/// Compares the solution spaces cut out by Bethe compatibility and by the
/// `(0, 1)` loop equation (both on top of sheet sums and symmetry).
pub fn redundancy<F: Field>(curve: &QuantumCurve<F>, max_pole_order: u32, constant: bool) -> Result<Redundancy> {
    let summary = |bethe: bool, loop_equation: bool| -> Result<SystemSummary> {
        let opts = AnsatzOptions { max_pole_order, constant: ConstantTerm::Always, bethe, loop_equation };
        let sys = build_system(curve, &opts, constant)?;
        let n = sys.unknowns.len();
        let zero = vec![F::zero(); sys.b.len()];
        let rank = solve(&sys.a, &zero, n).map(|s| s.rank).unwrap_or(0);
        Ok(SystemSummary { unknowns: n, rank, consistent: solve(&sys.a, &sys.b, n).is_some() })
    };
    Ok(Redundancy { bethe: summary(true, false)?, loop_equation: summary(false, true)?, both: summary(true, true)? })
}
