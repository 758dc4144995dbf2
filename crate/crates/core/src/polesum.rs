//! Pole-sum canonical form: finite sums of products of one-variable basis
//! functions `1/(x - s_r)^k` and `x^k`, one factor per slot.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{binom, Field};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;
use crate::report::NUMERIC_IDENTITY_TOL;
use crate::series::{Additive, Laurent};

/// A one-variable basis function. Poles refer to an index into the list of
/// Bethe roots of the curve in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Basis {
    Pole { root: usize, order: u32 },
    Mono(u32),
}

impl Basis {
    pub fn pole(root: usize, order: u32) -> Self {
        Basis::Pole { root, order }
    }

    /// Pole order, `0` for monomials.
    pub fn degree(&self) -> u32 {
        match self {
            Basis::Pole { order, .. } => *order,
            Basis::Mono(_) => 0,
        }
    }

    pub fn eval<F: Field>(&self, roots: &[F], x: &F) -> Option<F> {
        match self {
            Basis::Pole { root, order } => {
                let t = x.clone() - &roots[*root];
                if t.is_zero() {
                    return None;
                }
                Some(crate::field::Ring::pow(&t, *order).inv())
            }
            Basis::Mono(k) => Some(crate::field::Ring::pow(x, *k)),
        }
    }

    pub fn to_ratfunc<F: Field>(&self, roots: &[F]) -> RatFunc<F> {
        match self {
            Basis::Pole { root, order } => RatFunc::pole(F::one(), &roots[*root], *order),
            Basis::Mono(k) => RatFunc::from_poly(Poly::monomial(F::one(), *k as usize)),
        }
    }

    /// `d/dx` as `(factor, basis)`, `None` when it vanishes.
    pub fn derivative<F: Field>(&self) -> Option<(F, Basis)> {
        match *self {
            Basis::Pole { root, order } => Some((F::from_i64(-(order as i64)), Basis::pole(root, order + 1))),
            Basis::Mono(0) => None,
            Basis::Mono(k) => Some((F::from_i64(k as i64), Basis::Mono(k - 1))),
        }
    }

    /// Antiderivative with zero constant; simple poles have none.
    pub fn antiderivative<F: Field>(&self) -> Result<(F, Basis)> {
        match *self {
            Basis::Pole { order: 1, .. } => Err(Error::Unsupported("antiderivative of a simple pole".into())),
            Basis::Pole { root, order } => Ok((F::from_i64(-(order as i64 - 1)).inv(), Basis::pole(root, order - 1))),
            Basis::Mono(k) => Ok((F::from_i64(k as i64 + 1).inv(), Basis::Mono(k + 1))),
        }
    }

    /// Lowest power of `t` in the expansion at root `r0`.
    pub fn min_val(&self, r0: usize) -> i64 {
        match *self {
            Basis::Pole { root, order } if root == r0 => -(order as i64),
            _ => 0,
        }
    }

    /// Expansion at `x = s_{r0} + t`, known below `t^prec`.
    pub fn local_expand<F: Field>(&self, roots: &[F], r0: usize, prec: i64) -> Laurent<F> {
        match *self {
            Basis::Pole { root, order } if root == r0 => Laurent::from_terms(vec![(-(order as i64), F::one())], prec),
            Basis::Pole { root, order } => {
                // (t + δ)^{-o} = Σ_k binom(-o, k) δ^{-o-k} t^k
                let delta = roots[r0].clone() - &roots[root];
                let dinv = delta.inv();
                let mut p = crate::field::Ring::pow(&dinv, order);
                let mut terms = Vec::new();
                for k in 0..prec.max(0) {
                    let c: F = binom(order + k as u32 - 1, k as u32);
                    let c = if k % 2 == 1 { -c } else { c };
                    terms.push((k, c * &p));
                    p = p * &dinv;
                }
                Laurent::from_terms(terms, prec)
            }
            Basis::Mono(k) => {
                let s = &roots[r0];
                let terms = (0..=k as i64)
                    .filter(|j| *j < prec)
                    .map(|j| (j, binom::<F>(k, j as u32) * crate::field::Ring::pow(s, k - j as u32)))
                    .collect();
                Laurent::from_terms(terms, prec)
            }
        }
    }

    pub fn fmt_with<F: Field>(&self, var: &str, roots: &[F]) -> String {
        match *self {
            Basis::Pole { root, order } => {
                let s = &roots[root];
                let base = if s.is_zero() { var.to_string() } else { format!("({var} - {})", s.display()) };
                if order == 1 {
                    format!("1/{base}")
                } else {
                    format!("1/{base}^{order}")
                }
            }
            Basis::Mono(0) => "1".into(),
            Basis::Mono(1) => var.to_string(),
            Basis::Mono(k) => format!("{var}^{k}"),
        }
    }
}

/// `Σ c · Π_slot basis(slot)`; the arity is the common key length.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSum<F> {
    terms: BTreeMap<Vec<Basis>, F>,
}

impl<F: Field> Default for PoleSum<F> {
    fn default() -> Self {
        PoleSum { terms: BTreeMap::new() }
    }
}

impl<F: Field> PoleSum<F> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A constant of arity 0.
    pub fn scalar(c: F) -> Self {
        Self::term(Vec::new(), c)
    }

    pub fn term(key: Vec<Basis>, c: F) -> Self {
        let mut p = Self::zero();
        p.add_term(key, c);
        p
    }

    pub fn add_term(&mut self, key: Vec<Basis>, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                let s = v.clone() + &c;
                if s.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Basis>, &F)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &[Basis]) -> F {
        self.terms.get(key).cloned().unwrap_or_else(F::zero)
    }

    /// The constant of an arity-0 sum.
    pub fn as_scalar(&self) -> F {
        self.coeff(&[])
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        PoleSum { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut r = Self::zero();
        for (k, v) in &self.terms {
            r.add_term(k.clone(), v.clone() * c);
        }
        r
    }

    /// Outer product: keys are concatenated.
    pub fn tensor(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                let mut k = ka.clone();
                k.extend_from_slice(kb);
                r.add_term(k, ca.clone() * cb);
            }
        }
        r
    }

    /// Outer product with the slots of `self` placed at positions `pa` and
    /// those of `o` at `pb` (together a permutation of `0..arity`).
    pub fn merge(&self, pa: &[usize], o: &Self, pb: &[usize]) -> Self {
        let n = pa.len() + pb.len();
        let mut r = Self::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                let mut k = vec![Basis::Mono(0); n];
                for (i, &p) in pa.iter().enumerate() {
                    k[p] = ka[i];
                }
                for (i, &p) in pb.iter().enumerate() {
                    k[p] = kb[i];
                }
                r.add_term(k, ca.clone() * cb);
            }
        }
        r
    }

    /// Slot `i` of the result is slot `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut r = Self::zero();
        for (k, c) in &self.terms {
            r.add_term(perm.iter().map(|&p| k[p]).collect(), c.clone());
        }
        r
    }

    pub fn derivative(&self, slot: usize) -> Self {
        let mut r = Self::zero();
        for (k, c) in &self.terms {
            if let Some((f, b)) = k[slot].derivative::<F>() {
                let mut nk = k.clone();
                nk[slot] = b;
                r.add_term(nk, c.clone() * f);
            }
        }
        r
    }

    pub fn antiderivative(&self, slot: usize) -> Result<Self> {
        let mut r = Self::zero();
        for (k, c) in &self.terms {
            let (f, b) = k[slot].antiderivative::<F>()?;
            let mut nk = k.clone();
            nk[slot] = b;
            r.add_term(nk, c.clone() * f);
        }
        Ok(r)
    }

    /// Lower bound for the valuation in `slot` at root `r0`.
    pub fn min_val(&self, slot: usize, r0: usize) -> i64 {
        self.terms.keys().map(|k| k[slot].min_val(r0)).min().unwrap_or(0)
    }

    /// Laurent expansion in `slot` at root `r0`; coefficients carry the
    /// remaining slots in order.
    pub fn expand_slot(&self, slot: usize, roots: &[F], r0: usize, prec: i64) -> Laurent<PoleSum<F>> {
        let mut cache: BTreeMap<Basis, Laurent<F>> = BTreeMap::new();
        let mut acc: BTreeMap<i64, PoleSum<F>> = BTreeMap::new();
        for (k, c) in &self.terms {
            let ser = cache.entry(k[slot]).or_insert_with(|| k[slot].local_expand(roots, r0, prec));
            let mut rest = k.clone();
            rest.remove(slot);
            for (e, a) in ser.terms() {
                acc.entry(e).or_default().add_term(rest.clone(), a.clone() * c);
            }
        }
        Laurent::from_terms(acc.into_iter().collect(), prec)
    }

    /// Expansion with slots `0` and `1` both set to `x = s_{r0} + t`.
    pub fn expand_diagonal(&self, roots: &[F], r0: usize, prec: i64) -> Laurent<PoleSum<F>> {
        let v0 = self.min_val(0, r0);
        let v1 = self.min_val(1, r0);
        let mut c0: BTreeMap<Basis, Laurent<F>> = BTreeMap::new();
        let mut c1: BTreeMap<Basis, Laurent<F>> = BTreeMap::new();
        let mut acc: BTreeMap<i64, PoleSum<F>> = BTreeMap::new();
        for (k, c) in &self.terms {
            let a = c0.entry(k[0]).or_insert_with(|| k[0].local_expand(roots, r0, prec - v1));
            let b = c1.entry(k[1]).or_insert_with(|| k[1].local_expand(roots, r0, prec - v0));
            let ser = a.mul(b).truncate(prec);
            let rest = k[2..].to_vec();
            for (e, x) in ser.terms() {
                acc.entry(e).or_default().add_term(rest.clone(), x.clone() * c);
            }
        }
        Laurent::from_terms(acc.into_iter().collect(), prec)
    }

    /// Value at a point; `None` on a pole.
    pub fn eval(&self, roots: &[F], pts: &[F]) -> Option<F> {
        let mut acc = F::zero();
        for (k, c) in &self.terms {
            let mut v = c.clone();
            for (b, x) in k.iter().zip(pts) {
                v = v * b.eval(roots, x)?;
            }
            acc = acc + v;
        }
        Some(acc)
    }

    /// Drops coefficients negligible against the largest one (numeric
    /// fields only).
    pub fn chop(&self, rel_tol: f64) -> Self {
        if F::EXACT {
            return self.clone();
        }
        let norm = self.max_magnitude();
        PoleSum {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| !c.is_negligible(norm, rel_tol))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Zero test: exact, or relative to `scale` on numeric fields.
    pub fn is_negligible(&self, scale: f64) -> bool {
        if F::EXACT {
            return self.is_empty();
        }
        self.max_magnitude() <= NUMERIC_IDENTITY_TOL * scale.max(1.0)
    }

    /// Equality under the same rule as [`PoleSum::is_negligible`].
    pub fn approx_eq(&self, o: &Self) -> bool {
        let scale = self.max_magnitude().max(o.max_magnitude());
        self.sub(o).is_negligible(scale)
    }

    /// The rational function of a one-slot sum.
    pub fn to_ratfunc(&self, roots: &[F]) -> RatFunc<F> {
        let mut acc = RatFunc::zero();
        for (k, c) in &self.terms {
            acc = acc + k[0].to_ratfunc(roots).scale(c);
        }
        acc
    }

    /// Decomposes a rational function whose poles are among `roots`.
    pub fn from_ratfunc(f: &RatFunc<F>, roots: &[F]) -> Result<Self> {
        let pf = f.partial_fractions()?;
        let mut r = Self::zero();
        for (k, c) in pf.poly.coeffs().iter().enumerate() {
            r.add_term(vec![Basis::Mono(k as u32)], c.clone());
        }
        for (s, cs) in &pf.parts {
            let idx = roots
                .iter()
                .position(|x| crate::report::same_point(x, s))
                .ok_or_else(|| Error::Input(format!("pole at {} is not a Bethe root", s.display())))?;
            for (k, c) in cs.iter().enumerate() {
                r.add_term(vec![Basis::pole(idx, k as u32 + 1)], c.clone());
            }
        }
        Ok(r)
    }

    /// Human-readable form with the given slot variable names.
    pub fn fmt_with(&self, vars: &[&str], roots: &[F]) -> String {
        if self.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let factors: Vec<String> =
                k.iter().zip(vars).filter(|(b, _)| **b != Basis::Mono(0)).map(|(b, v)| b.fmt_with(v, roots)).collect();
            if factors.is_empty() {
                let _ = write!(out, "{}", c.display());
            } else {
                let _ = write!(out, "{}*{}", c.display(), factors.join("*"));
            }
        }
        out
    }
}

impl<F: Field> Additive for PoleSum<F> {
    fn zero_value() -> Self {
        Self::zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn negated(&self) -> Self {
        self.neg()
    }
    fn is_zero_value(&self) -> bool {
        self.is_empty()
    }
}

/// Termwise `d/dt` of a series with pole-sum coefficients.
pub fn series_derivative<F: Field>(s: &Laurent<PoleSum<F>>) -> Laurent<PoleSum<F>> {
    let terms = s.terms().filter(|(k, _)| *k != 0).map(|(k, c)| (k - 1, c.scale(&F::from_i64(k)))).collect();
    Laurent::from_terms(terms, s.precision() - 1)
}

/// Scalar series times pole-sum series.
pub fn series_scale<F: Field>(a: &Laurent<F>, b: &Laurent<PoleSum<F>>) -> Laurent<PoleSum<F>> {
    a.mul_with(b, |x, p| p.scale(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, Rat, Ring};

    #[test]
    fn expansions_match_ratfunc() {
        let roots = vec![rat(0, 1), rat(2, 1)];
        let p = PoleSum::term(vec![Basis::pole(1, 2)], rat(3, 1))
            .add(&PoleSum::term(vec![Basis::pole(0, 1)], rat(1, 2)))
            .add(&PoleSum::term(vec![Basis::Mono(2)], rat(-1, 1)));
        let f = p.to_ratfunc(&roots);
        for r0 in 0..2 {
            let a = p.expand_slot(0, &roots, r0, 5);
            let b = f.local_expand(&roots[r0], 5).unwrap().series;
            for k in -2..5 {
                assert_eq!(a.coeff(k).unwrap().as_scalar(), b.coeff(k).unwrap());
            }
        }
        assert_eq!(PoleSum::from_ratfunc(&f, &roots).unwrap(), p);
    }

    #[test]
    fn derivative_and_antiderivative() {
        let p = PoleSum::<Rat>::term(vec![Basis::pole(0, 3), Basis::Mono(2)], Rat::one());
        let a = p.antiderivative(0).unwrap().derivative(0);
        assert_eq!(a, p);
        assert!(PoleSum::<Rat>::term(vec![Basis::pole(0, 1)], Rat::one()).antiderivative(0).is_err());
    }

    #[test]
    fn diagonal_expansion() {
        let roots = vec![rat(0, 1), rat(1, 1)];
        let p = PoleSum::term(vec![Basis::pole(0, 2), Basis::pole(1, 1), Basis::Mono(1)], Rat::one());
        let d = p.expand_diagonal(&roots, 0, 1);
        // x^{-2}/(x-1) = -x^{-2} - x^{-1} - 1 - ...
        assert_eq!(d.coeff(-2).unwrap(), PoleSum::term(vec![Basis::Mono(1)], -Rat::one()));
        assert_eq!(d.coeff(0).unwrap(), PoleSum::term(vec![Basis::Mono(1)], -Rat::one()));
    }
}
