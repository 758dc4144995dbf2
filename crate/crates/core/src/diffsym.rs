//! Formal differential polynomials and fractions in symbols `ψ_j^{(k)}` or
//! `J_i^{(k)}`, with the derivation `∂ ψ_j^{(k)} = ψ_j^{(k+1)}`.

use std::collections::BTreeMap;
use std::fmt;

use crate::field::{rat_to_string, Field, Rat, Ring};

/// Symbol families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Psi,
    J,
}

/// The `order`-th derivative of symbol `index` of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub family: Family,
    pub index: u16,
    pub order: u16,
}

impl Var {
    pub fn psi(index: u16) -> Self {
        Var { family: Family::Psi, index, order: 0 }
    }
    pub fn j(index: u16) -> Self {
        Var { family: Family::J, index, order: 0 }
    }
    pub fn derived(self, k: u16) -> Self {
        Var { order: self.order + k, ..self }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.family {
            Family::Psi => "psi",
            Family::J => "J",
        };
        match self.order {
            0 => write!(f, "{name}{}", self.index),
            1..=3 => write!(f, "{name}{}{}", self.index, "'".repeat(self.order as usize)),
            k => write!(f, "{name}{}^({k})", self.index),
        }
    }
}

/// Sorted list of `(variable, exponent)`.
pub type Monomial = Vec<(Var, u32)>;

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Total derivative order of a monomial (its weight under `∂`).
pub fn mono_weight(m: &Monomial) -> u32 {
    m.iter().map(|(v, e)| v.order as u32 * e).sum()
}

/// Polynomial in the formal symbols with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !Ring::is_zero(&c) {
            terms.insert(Vec::new(), c);
        }
        DiffPoly { terms }
    }

    pub fn var(v: Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(v, 1)], <Rat as Ring>::one());
        DiffPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a monomial.
    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(<Rat as Ring>::zero)
    }

    fn insert(&mut self, m: Monomial, c: Rat) {
        if Ring::is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.clone() + c;
                if Ring::is_zero(v) {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg_ref(&self) -> Self {
        DiffPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.insert(mono_mul(ma, mb), ca.clone() * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if Ring::is_zero(c) {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c)).collect() }
    }

    pub fn derivative(&self) -> Self {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for (i, (v, e)) in m.iter().enumerate() {
                let mut rest: Monomial = m.clone();
                if *e == 1 {
                    rest.remove(i);
                } else {
                    rest[i].1 -= 1;
                }
                let nm = mono_mul(&rest, &vec![(v.derived(1), 1)]);
                out.insert(nm, c.clone() * Rat::from_i64(*e as i64));
            }
        }
        out
    }

    pub fn nth_derivative(&self, k: u32) -> Self {
        (0..k).fold(self.clone(), |acc, _| acc.derivative())
    }

    /// Keeps only the monomials of a given derivative weight.
    pub fn weight_part(&self, w: u32) -> Self {
        DiffPoly { terms: self.terms.iter().filter(|(m, _)| mono_weight(m) == w).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    /// Evaluates by substituting each variable.
    pub fn substitute<R: Ring>(&self, val: &dyn Fn(Var) -> R, scalar: &dyn Fn(&Rat) -> R) -> R {
        let mut acc = R::zero();
        for (m, c) in &self.terms {
            let mut t = scalar(c);
            for (v, e) in m {
                t = t * val(*v).pow(*e);
            }
            acc = acc + t;
        }
        acc
    }

    /// Formats each monomial with `Q^w`, `w` its derivative weight. This is
    /// the natural display for coefficients computed at `Q = 1` in a
    /// `Q`-graded identity.
    pub fn fmt_graded(&self, q_name: &str) -> String {
        self.fmt_inner(Some(q_name))
    }

    fn fmt_inner(&self, q_name: Option<&str>) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by_key(|(m, _)| (mono_weight(m), std::cmp::Reverse(m.iter().map(|x| x.1).sum::<u32>())));
        for (m, c) in keys {
            let mut factors: Vec<String> = Vec::new();
            if let Some(q) = q_name {
                match mono_weight(m) {
                    0 => {}
                    1 => factors.push(q.to_string()),
                    w => factors.push(format!("{q}^{w}")),
                }
            }
            for (v, e) in m {
                if *e == 1 {
                    factors.push(v.to_string());
                } else {
                    factors.push(format!("{v}^{e}"));
                }
            }
            let cs = rat_to_string(c);
            let body = factors.join("*");
            let term = if body.is_empty() {
                cs
            } else if cs == "1" {
                body
            } else if cs == "-1" {
                format!("-{body}")
            } else {
                format!("{cs}*{body}")
            };
            parts.push(term);
        }
        crate::poly::join_terms(&parts)
    }

    /// The constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(<Rat as Ring>::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    /// First (smallest) term's coefficient, used to normalise atoms.
    fn first_coeff(&self) -> Option<&Rat> {
        self.terms.values().next()
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_inner(None))
    }
}

crate::impl_ring_ops!([] DiffPoly);

impl Ring for DiffPoly {
    fn zero() -> Self {
        DiffPoly::zero()
    }
    fn one() -> Self {
        DiffPoly::constant(<Rat as Ring>::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_i64(n: i64) -> Self {
        DiffPoly::constant(Rat::from_i64(n))
    }
}

/// `num / Π atom^e` with atoms normalised so their first coefficient is 1.
/// Denominators are kept factored; equality is decided by clearing them.
#[derive(Clone, Debug)]
pub struct DiffFrac {
    num: DiffPoly,
    den: BTreeMap<DiffPoly, u32>,
}

impl DiffFrac {
    pub fn from_poly(p: DiffPoly) -> Self {
        DiffFrac { num: p, den: BTreeMap::new() }
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(DiffPoly::var(v))
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_poly(DiffPoly::constant(c))
    }

    pub fn numer(&self) -> &DiffPoly {
        &self.num
    }

    pub fn denom_atoms(&self) -> impl Iterator<Item = (&DiffPoly, &u32)> {
        self.den.iter()
    }

    /// `1 / p`.
    pub fn recip_poly(p: &DiffPoly) -> Self {
        assert!(!p.is_zero(), "division by zero differential polynomial");
        if let Some(c) = p.as_constant() {
            return Self::constant(c.inv());
        }
        let lead = p.first_coeff().unwrap().clone();
        let atom = p.scale(&lead.inv());
        let mut den = BTreeMap::new();
        den.insert(atom, 1);
        DiffFrac { num: DiffPoly::constant(lead.inv()), den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn atoms_pow(atoms: &BTreeMap<DiffPoly, u32>) -> DiffPoly {
        let mut acc = DiffPoly::one();
        for (a, e) in atoms {
            for _ in 0..*e {
                acc = acc.mul_ref(a);
            }
        }
        acc
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let num = self.num.add_ref(&o.num);
            return self.with_num(num);
        }
        let mut l = self.den.clone();
        for (a, e) in &o.den {
            let x = l.entry(a.clone()).or_insert(0);
            *x = (*x).max(*e);
        }
        let fa = Self::atoms_pow(&diff_atoms(&l, &self.den));
        let fb = Self::atoms_pow(&diff_atoms(&l, &o.den));
        let num = self.num.mul_ref(&fa).add_ref(&o.num.mul_ref(&fb));
        DiffFrac { num, den: l }.normalized()
    }

    fn with_num(&self, num: DiffPoly) -> Self {
        DiffFrac { num, den: self.den.clone() }.normalized()
    }

    fn normalized(self) -> Self {
        if self.num.is_zero() {
            return DiffFrac::from_poly(DiffPoly::zero());
        }
        self
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }

    pub fn neg_ref(&self) -> Self {
        DiffFrac { num: self.num.neg_ref(), den: self.den.clone() }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return DiffFrac::from_poly(DiffPoly::zero());
        }
        let mut den = self.den.clone();
        for (a, e) in &o.den {
            *den.entry(a.clone()).or_insert(0) += e;
        }
        DiffFrac { num: self.num.mul_ref(&o.num), den }
    }

    pub fn div_ref(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "division by zero differential fraction");
        let inv = DiffFrac::recip_poly(&o.num).mul_ref(&DiffFrac::from_poly(Self::atoms_pow(&o.den)));
        self.mul_ref(&inv)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        DiffFrac { num: self.num.scale(c), den: self.den.clone() }.normalized()
    }

    pub fn derivative(&self) -> Self {
        if self.den.is_empty() {
            return Self::from_poly(self.num.derivative());
        }
        // (n / Π A^e)' = (n' Π A - n Σ e A' Π_{B≠A} B) / Π A^{e+1}
        let atoms: Vec<(&DiffPoly, &u32)> = self.den.iter().collect();
        let prod_all = atoms.iter().fold(DiffPoly::one(), |acc, (a, _)| acc.mul_ref(a));
        let mut num = self.num.derivative().mul_ref(&prod_all);
        for (i, (a, e)) in atoms.iter().enumerate() {
            let others = atoms
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(DiffPoly::one(), |acc, (_, (b, _))| acc.mul_ref(b));
            let t = self.num.mul_ref(&a.derivative()).mul_ref(&others).scale(&Rat::from_i64(**e as i64));
            num = num.sub_ref(&t);
        }
        let den = self.den.iter().map(|(a, e)| (a.clone(), e + 1)).collect();
        DiffFrac { num, den }.normalized()
    }
}

fn diff_atoms(l: &BTreeMap<DiffPoly, u32>, a: &BTreeMap<DiffPoly, u32>) -> BTreeMap<DiffPoly, u32> {
    l.iter()
        .filter_map(|(k, e)| {
            let d = e - a.get(k).copied().unwrap_or(0);
            (d > 0).then(|| (k.clone(), d))
        })
        .collect()
}

impl PartialEq for DiffFrac {
    fn eq(&self, o: &Self) -> bool {
        self.sub_ref(o).is_zero()
    }
}

crate::impl_ring_ops!([] DiffFrac);
crate::impl_div_ops!([] DiffFrac);

impl Ring for DiffFrac {
    fn zero() -> Self {
        DiffFrac::from_poly(DiffPoly::zero())
    }
    fn one() -> Self {
        DiffFrac::from_poly(DiffPoly::one())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        DiffFrac::constant(Rat::from_i64(n))
    }
}

impl fmt::Display for DiffFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        let d: Vec<String> = self
            .den
            .iter()
            .map(|(a, e)| if *e == 1 { format!("({a})") } else { format!("({a})^{e}") })
            .collect();
        write!(f, "({}) / {}", self.num, d.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_on_products() {
        let a = DiffPoly::var(Var::psi(1)) * DiffPoly::var(Var::j(2)) + DiffPoly::from_i64(3);
        let b = DiffPoly::var(Var::psi(2).derived(1)).pow(2);
        let lhs = (a.clone() * &b).derivative();
        let rhs = a.derivative() * &b + a * b.derivative();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn fraction_quotient_rule() {
        let p = DiffFrac::var(Var::psi(1));
        let inv = DiffFrac::one() / p.clone();
        let lhs = inv.derivative();
        let rhs = -(p.derivative() / (p.clone() * p));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn display_is_readable() {
        let p = DiffPoly::var(Var::j(1)) * DiffPoly::var(Var::j(2).derived(1)) - DiffPoly::var(Var::j(3).derived(2));
        assert_eq!(p.to_string(), "J1*J2' - J3''");
        assert_eq!(p.fmt_graded("Q"), "Q*J1*J2' - Q^2*J3''");
    }
}
