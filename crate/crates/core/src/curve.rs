//! Quantum spectral curves: sheet functions `Y_μ`, Bethe roots, builders
//! from solution data, and their consistency checks.

use std::cmp::Ordering;

use crate::diffop::{factor_from_y, symbol, ClassicalPoly, DiffOp};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::det;
use crate::poly::Poly;
use crate::quasi::{rational_exp_integral, QuasiRational};
use crate::ratfunc::RatFunc;
use crate::report::{is_small, same_point, Report};
use crate::roots::roots;

/// A Bethe root `s` sitting between sheets `mu` and `mu + 1` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct BetheRoot<F> {
    pub s: F,
    pub mu: usize,
}

/// A regular singular point of the sheet functions.
#[derive(Clone, Debug, PartialEq)]
pub struct Puncture<F> {
    pub z: F,
    pub alpha: Option<F>,
    /// Residues of `Y_1, …, Y_d` at `z`.
    pub residues: Vec<F>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builder {
    QuasiPoly,
    RawY,
    Wronskian,
}

/// How the sheet functions depend on `Q` when taking the classical limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalMode {
    /// `Y_μ ∝ Q`, as produced by the builders.
    ScaleWithQ,
    /// `Y_μ` held fixed while `Q → 0`.
    FixedY,
    /// `ŷ → y` at the curve's own `Q`, no limit taken.
    AtCurrentQ,
}

#[derive(Clone, Debug)]
pub struct QuantumCurve<F: Field> {
    pub d: usize,
    pub q: F,
    pub y: Vec<RatFunc<F>>,
    /// Sorted by position; the index in this list identifies the root.
    pub bethe: Vec<BetheRoot<F>>,
    pub punctures: Vec<Puncture<F>>,
    pub builder: Builder,
    /// Known solutions `ψ_j`, used for annihilation checks.
    pub solutions: Vec<QuasiRational<F>>,
}

fn sort_roots<F: Field>(b: &mut [BetheRoot<F>]) {
    b.sort_by(|a, c| a.s.total_cmp(&c.s).then(a.mu.cmp(&c.mu)));
}

impl<F: Field> QuantumCurve<F> {
    /// `ψ_1 = exp(∫p′) q` for `d = 2`: `Y_1 = -Q(p′ + q′/q) = -Y_2`, Bethe
    /// roots at the zeros of `q`.
    pub fn from_quasi_poly(p_prime: &RatFunc<F>, qp: &Poly<F>, q: F) -> Result<Self> {
        check_q(&q)?;
        if qp.is_zero() {
            return Err(Error::Input("q must be a nonzero polynomial".into()));
        }
        let rs = roots(qp)?;
        if let Some((s, m)) = rs.iter().find(|(_, m)| *m > 1) {
            return Err(Error::NonSimpleRoot(format!("root {} of q has multiplicity {m}", s.display())));
        }
        let qr = RatFunc::from_poly(qp.clone());
        let y1 = -(p_prime.clone() + qr.derivative() / qr.clone()).scale(&q);
        let mut bethe: Vec<BetheRoot<F>> = rs.into_iter().map(|(s, _)| BetheRoot { s, mu: 1 }).collect();
        sort_roots(&mut bethe);
        let psi = rational_exp_integral(p_prime)?.mul_rat(&qr);
        let mut c = QuantumCurve {
            d: 2,
            q,
            y: vec![y1.clone(), -y1],
            bethe,
            punctures: Vec::new(),
            builder: Builder::QuasiPoly,
            solutions: vec![psi],
        };
        c.punctures = c.detect_punctures()?;
        Ok(c)
    }

    /// Sheet functions from rational solutions `ψ_1, …, ψ_d` through
    /// `Y_μ = Q ∂ ln(D_{μ-1}/D_μ)`, `D_μ = det((-Q∂)^i ψ_{j+1})`.
    pub fn from_wronskian(psi: &[RatFunc<F>], q: F) -> Result<Self> {
        check_q(&q)?;
        let d = psi.len();
        if d == 0 {
            return Err(Error::Input("need at least one solution".into()));
        }
        let mq = -q.clone();
        let rows: Vec<Vec<RatFunc<F>>> = (0..d)
            .map(|i| psi.iter().map(|p| (0..i).fold(p.clone(), |a, _| a.derivative().scale(&mq))).collect())
            .collect();
        let mut ds = vec![RatFunc::one()];
        for mu in 1..=d {
            let m: Vec<Vec<RatFunc<F>>> = rows[..mu].iter().map(|r| r[..mu].to_vec()).collect();
            let dm = det(&m);
            if dm.is_zero() {
                return Err(Error::Input(format!("solutions are linearly dependent (D_{mu} = 0)")));
            }
            ds.push(dm);
        }
        let logd = |f: &RatFunc<F>| f.derivative() / f.clone();
        let y: Vec<RatFunc<F>> = (1..=d).map(|mu| (logd(&ds[mu - 1]) - logd(&ds[mu])).scale(&q)).collect();
        let mut bethe = Vec::new();
        for (mu, dm) in ds.iter().enumerate().take(d).skip(1) {
            for (s, m) in roots(dm.numer())? {
                if m > 1 {
                    return Err(Error::NonSimpleRoot(format!("D_{mu} has a root of multiplicity {m} at {}", s.display())));
                }
                bethe.push(BetheRoot { s, mu });
            }
        }
        sort_roots(&mut bethe);
        for w in bethe.windows(2) {
            if same_point(&w[0].s, &w[1].s) {
                return Err(Error::Unsupported(format!(
                    "{} is a zero of two determinants; higher ramification is not supported",
                    w[0].s.display()
                )));
            }
        }
        let mut c = QuantumCurve {
            d,
            q,
            y,
            bethe,
            punctures: Vec::new(),
            builder: Builder::Wronskian,
            solutions: psi.iter().cloned().map(QuasiRational::from_rat).collect(),
        };
        c.punctures = c.detect_punctures()?;
        Ok(c)
    }

    /// A curve given directly by its sheet functions.
    pub fn from_raw_y(q: F, y: Vec<RatFunc<F>>, mut bethe: Vec<BetheRoot<F>>, punctures: Option<Vec<F>>) -> Result<Self> {
        check_q(&q)?;
        if y.is_empty() {
            return Err(Error::Input("need at least one sheet function".into()));
        }
        sort_roots(&mut bethe);
        let mut c =
            QuantumCurve { d: y.len(), q, y, bethe, punctures: Vec::new(), builder: Builder::RawY, solutions: Vec::new() };
        c.punctures = match punctures {
            Some(zs) => zs.into_iter().map(|z| c.puncture_at(z)).collect(),
            None => c.detect_punctures()?,
        };
        Ok(c)
    }

    fn puncture_at(&self, z: F) -> Puncture<F> {
        let residues = self.y.iter().map(|y| y.residue_at(&z).unwrap_or_else(|_| F::zero())).collect();
        Puncture { z, alpha: None, residues }
    }

    /// Poles of the sheet functions that are not Bethe roots.
    fn detect_punctures(&self) -> Result<Vec<Puncture<F>>> {
        let mut zs: Vec<F> = Vec::new();
        for y in &self.y {
            for (p, _) in y.poles()? {
                if !self.bethe.iter().any(|b| same_point(&b.s, &p)) && !zs.iter().any(|z| same_point(z, &p)) {
                    zs.push(p);
                }
            }
        }
        zs.sort_by(|a, b| a.total_cmp(b));
        Ok(zs.into_iter().map(|z| self.puncture_at(z)).collect())
    }

    /// Bethe root positions in canonical order.
    pub fn root_points(&self) -> Vec<F> {
        self.bethe.iter().map(|b| b.s.clone()).collect()
    }

    /// Indices of the roots in `S_μ` (empty for `μ = 0` or `μ ≥ d`).
    pub fn sheet_roots(&self, mu: usize) -> Vec<usize> {
        (0..self.bethe.len()).filter(|&r| self.bethe[r].mu == mu && mu >= 1 && mu < self.d).collect()
    }

    /// `(h_i, h_j) = δ_ij - 1/d`.
    pub fn pair(&self, i: usize, j: usize) -> F {
        let delta = if i == j { F::one() } else { F::zero() };
        delta - F::one() / F::from_i64(self.d as i64)
    }

    pub fn is_trace_free(&self) -> bool {
        let sum = self.y.iter().fold(RatFunc::zero(), |a, y| a + y);
        sum.is_zero() || (!F::EXACT && sum.magnitude() < crate::report::NUMERIC_IDENTITY_TOL)
    }

    /// `Ê = (ŷ - Y_1)···(ŷ - Y_d)`.
    pub fn quantum_curve(&self) -> DiffOp<RatFunc<F>> {
        factor_from_y(&self.q, &self.y)
    }

    /// Checks the pole structure at Bethe roots and elsewhere.
    pub fn validate(&self) -> Report {
        let mut rep = Report::default();
        let q = &self.q;
        let qmag = q.magnitude();
        for (i, b) in self.bethe.iter().enumerate() {
            let loc = format!("s = {} (mu = {})", b.s.display(), b.mu);
            if b.mu == 0 || b.mu >= self.d {
                rep.fail("bethe-sheet", &loc, format!("sheet label must lie in 1..{}", self.d - 1));
                continue;
            }
            for j in 0..i {
                if same_point(&self.bethe[j].s, &b.s) {
                    rep.fail("bethe-distinct", &loc, "repeated Bethe root");
                }
            }
            if self.punctures.iter().any(|p| same_point(&p.z, &b.s)) {
                rep.fail("bethe-puncture", &loc, "Bethe root coincides with a puncture");
            }
            for nu in 1..=self.d {
                let y = &self.y[nu - 1];
                let order = y.pole_order_at(&b.s);
                let expect = if nu == b.mu {
                    Some(-q.clone())
                } else if nu == b.mu + 1 {
                    Some(q.clone())
                } else {
                    None
                };
                match expect {
                    None if order > 0 => {
                        rep.fail("bethe-regular", &loc, format!("Y_{nu} has a pole of order {order}"));
                    }
                    Some(r) => {
                        if order != 1 {
                            rep.fail("bethe-simple-pole", &loc, format!("Y_{nu} has pole order {order}, expected 1"));
                        } else {
                            match y.residue_at(&b.s) {
                                Ok(res) if is_small(&(res.clone() - &r), qmag) => {}
                                Ok(res) => rep.fail(
                                    "bethe-residue",
                                    &loc,
                                    format!("Res Y_{nu} = {}, expected {}", res.display(), r.display()),
                                ),
                                Err(e) => rep.fail("bethe-residue", &loc, e.to_string()),
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for (nu, y) in self.y.iter().enumerate() {
            match y.poles() {
                Ok(ps) => {
                    for (p, _) in ps {
                        let known = self.bethe.iter().any(|b| same_point(&b.s, &p))
                            || self.punctures.iter().any(|z| same_point(&z.z, &p));
                        if !known {
                            rep.fail("pole-locus", format!("Y_{}", nu + 1), format!("undeclared pole at {}", p.display()));
                        }
                    }
                }
                Err(e) => rep.fail("pole-locus", format!("Y_{}", nu + 1), e.to_string()),
            }
        }
        if !self.is_trace_free() {
            rep.note("sum of Y is nonzero: gl-type curve, sl-specific checks do not apply");
        }
        rep
    }

    /// `R_μ = exp(∫(Y_μ - Y_{μ+1})/Q dx)`.
    pub fn ratio_r(&self, mu: usize) -> Result<QuasiRational<F>> {
        if mu == 0 || mu >= self.d {
            return Err(Error::Input(format!("ratio R_mu needs 1 <= mu <= {}", self.d - 1)));
        }
        let r = (self.y[mu - 1].clone() - &self.y[mu]) / RatFunc::constant(self.q.clone());
        rational_exp_integral(&r)
    }

    /// `Res_s R_μ = 0` at every `s ∈ S_μ`.
    pub fn hirota_residue_check(&self) -> Result<HirotaReport<F>> {
        let mut entries = Vec::new();
        for mu in 1..self.d {
            let roots = self.sheet_roots(mu);
            if roots.is_empty() {
                continue;
            }
            let r = self.ratio_r(mu)?;
            let scale = r.rat.magnitude().max(1.0);
            for idx in roots {
                let s = self.bethe[idx].s.clone();
                let res = r.residue_at(&s)?;
                let pass = is_small(&res, scale);
                entries.push(HirotaEntry { mu, s, residue: res, pass });
            }
        }
        Ok(HirotaReport { entries })
    }

    /// `ψ_j · Ê` for each known solution.
    pub fn annihilation_residuals(&self) -> Vec<QuasiRational<F>> {
        let e = self.quantum_curve();
        self.solutions.iter().map(|psi| e.right_act(psi)).collect()
    }

    /// Largest relative size of `ψ_j · Ê` over the known solutions, measured
    /// at a few sample points against `|ψ_j|`.
    pub fn annihilation_error(&self) -> f64 {
        let e = self.quantum_curve();
        let samples: Vec<F> = [7i64, -5, 11, 13]
            .iter()
            .map(|n| F::from_rat(&crate::field::rat(*n, 3)))
            .collect();
        let mut worst: f64 = 0.0;
        for psi in &self.solutions {
            let res = e.right_act(psi);
            for x in &samples {
                // Both sides share the exponential factor, which cancels.
                if let (Some(a), Some(b)) = (res.rat.eval(x), psi.rat.eval(x)) {
                    let denom = b.magnitude().max(1e-300);
                    worst = worst.max(a.magnitude() / denom);
                }
            }
        }
        worst
    }

    /// Classical spectral curve `E(x, y)`.
    pub fn classical_curve(&self, mode: ClassicalMode) -> Result<ClassicalPoly<RatFunc<F>>> {
        match mode {
            ClassicalMode::AtCurrentQ => Ok(self.quantum_curve().symbol_fixed()),
            ClassicalMode::FixedY => {
                let ys = self.y.clone();
                symbol(&move |q: &F| factor_from_y(q, &ys), self.d)
            }
            ClassicalMode::ScaleWithQ => {
                let ys = self.y.clone();
                let q0 = self.q.clone();
                symbol(
                    &move |q: &F| {
                        let f = q.clone() / &q0;
                        let scaled: Vec<RatFunc<F>> = ys.iter().map(|y| y.scale(&f)).collect();
                        factor_from_y(q, &scaled)
                    },
                    self.d,
                )
            }
        }
    }

    /// The same curve with `Y_μ` rescaled to background charge `q`.
    pub fn rescaled(&self, q: F) -> Result<Self> {
        check_q(&q)?;
        let f = q.clone() / &self.q;
        let mut c = self.clone();
        c.y = self.y.iter().map(|y| y.scale(&f)).collect();
        c.q = q;
        c.solutions.clear();
        c.punctures = c.detect_punctures()?;
        Ok(c)
    }
}

fn check_q<F: Field>(q: &F) -> Result<()> {
    if q.is_zero() {
        return Err(Error::Input("background charge Q must be nonzero".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HirotaEntry<F> {
    pub mu: usize,
    pub s: F,
    pub residue: F,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HirotaReport<F> {
    pub entries: Vec<HirotaEntry<F>>,
}

impl<F: Field> HirotaReport<F> {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Orders roots the way curves store them.
pub fn cmp_points<F: Field>(a: &F, b: &F) -> Ordering {
    a.total_cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, Rat, Ring};

    fn hermite1() -> QuantumCurve<Rat> {
        let p = RatFunc::from_poly(Poly::new(vec![Rat::zero(), -Rat::one()]));
        QuantumCurve::from_quasi_poly(&p, &Poly::x(), Rat::one()).unwrap()
    }

    #[test]
    fn hermite_curve() {
        let c = hermite1();
        let x = RatFunc::<Rat>::x();
        assert_eq!(c.y[0], x.clone() - RatFunc::one() / x.clone());
        assert!(c.validate().passed());
        assert_eq!(c.bethe, vec![BetheRoot { s: Rat::zero(), mu: 1 }]);
        let e = c.quantum_curve();
        assert_eq!(e.coeff(0), RatFunc::constant(Rat::from_i64(3)) - x.clone() * &x);
        assert!(c.annihilation_residuals().iter().all(|r| r.is_zero()));
        assert!(c.hirota_residue_check().unwrap().passed());
        let cl = c.classical_curve(ClassicalMode::ScaleWithQ).unwrap();
        assert_eq!(cl.coeffs(), &[RatFunc::zero(), RatFunc::zero(), RatFunc::one()]);
        let at = c.classical_curve(ClassicalMode::AtCurrentQ).unwrap();
        assert_eq!(at.coeff(0), e.coeff(0));
    }

    #[test]
    fn trivial_curve_checks() {
        let q = rat(3, 4);
        let x = RatFunc::<Rat>::x();
        let y1 = RatFunc::constant(-q.clone()) / x.clone();
        let good = QuantumCurve::from_raw_y(q.clone(), vec![y1.clone(), -y1.clone()], vec![BetheRoot { s: Rat::zero(), mu: 1 }], None)
            .unwrap();
        assert!(good.validate().passed());
        assert!(good.quantum_curve().coeff(0).is_zero());
        let bad = QuantumCurve::from_raw_y(q, vec![y1.clone(), -y1], vec![BetheRoot { s: Rat::one(), mu: 1 }], None).unwrap();
        assert!(!bad.validate().passed());
    }

    #[test]
    fn adversarial_curve_fails_hirota() {
        let q = Rat::one();
        let d1 = RatFunc::from_poly(Poly::new(vec![-Rat::one(), Rat::zero(), Rat::one()]));
        let y1 = -(d1.derivative() / d1).scale(&q);
        let bethe = vec![BetheRoot { s: -Rat::one(), mu: 1 }, BetheRoot { s: Rat::one(), mu: 1 }];
        let c = QuantumCurve::from_raw_y(q, vec![y1.clone(), -y1], bethe, None).unwrap();
        assert!(c.validate().passed());
        let h = c.hirota_residue_check().unwrap();
        assert!(!h.passed());
        let at1 = h.entries.iter().find(|e| e.s == Rat::one()).unwrap();
        assert_eq!(at1.residue, rat(-1, 4));
    }

    #[test]
    fn wronskian_d3() {
        let x = RatFunc::<Rat>::x();
        let psi = vec![x.clone() - RatFunc::one(), x.clone() * &x, RatFunc::one()];
        let c = QuantumCurve::from_wronskian(&psi, rat(1, 2)).unwrap();
        assert_eq!(c.sheet_roots(1).len(), 1);
        assert_eq!(c.sheet_roots(2).len(), 2);
        assert!(c.validate().passed(), "{:?}", c.validate());
        assert!(c.is_trace_free());
        assert!(c.hirota_residue_check().unwrap().passed());
        assert!(c.quantum_curve().coeffs().iter().take(3).all(|k| k.is_zero()));
        assert!(c.annihilation_residuals().iter().all(|r| r.is_zero()));
    }
}
