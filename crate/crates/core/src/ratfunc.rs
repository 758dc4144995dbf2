//! Rational functions of one variable.

use std::cmp::Ordering;
use std::fmt;

use crate::error::Result;
use crate::field::{Field, Rat, Ring};
use crate::poly::Poly;
use crate::roots::roots;
use crate::series::{Laurent, LocalSeries};

/// Tolerance used to decide vanishing leading coefficients in numeric local
/// expansions.
pub const NUMERIC_VALUATION_TOL: f64 = 1e-40;

/// `num / den` with `den` monic; exact fields also keep them coprime.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc<F> {
    num: Poly<F>,
    den: Poly<F>,
}

/// Polynomial part plus principal parts at each pole.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialFractions<F> {
    pub poly: Poly<F>,
    /// `(s, c)` with `c[k]` the coefficient of `(x-s)^{-(k+1)}`.
    pub parts: Vec<(F, Vec<F>)>,
}

impl<F: Field> RatFunc<F> {
    pub fn new(num: Poly<F>, den: Poly<F>) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let (num, den) = if F::EXACT {
            let g = num.gcd(&den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_rem(&g).0, den.div_rem(&g).0)
            }
        } else {
            (num, den)
        };
        let l = den.lead().inv();
        RatFunc { num: num.scale(&l), den: den.monic() }
    }

    pub fn from_poly(p: Poly<F>) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn constant(c: F) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn x() -> Self {
        Self::from_poly(Poly::x())
    }

    /// `c / (x - s)^k`.
    pub fn pole(c: F, s: &F, k: u32) -> Self {
        Self::new(Poly::constant(c), Poly::linear(s).pow(k))
    }

    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Self::constant(F::one())
    }

    pub fn numer(&self) -> &Poly<F> {
        &self.num
    }

    pub fn denom(&self) -> &Poly<F> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// The constant value, if the function is constant.
    pub fn as_constant(&self) -> Option<F> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.coeff(0) / self.den.coeff(0))
        } else {
            None
        }
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::new(self.num.add_ref(&o.num), self.den.clone());
        }
        Self::new(self.num.mul_ref(&o.den).add_ref(&o.num.mul_ref(&self.den)), self.den.mul_ref(&o.den))
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }

    pub fn neg_ref(&self) -> Self {
        RatFunc { num: self.num.neg_ref(), den: self.den.clone() }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        Self::new(self.num.mul_ref(&o.num), self.den.mul_ref(&o.den))
    }

    pub fn div_ref(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "rational function division by zero");
        Self::new(self.num.mul_ref(&o.den), self.den.mul_ref(&o.num))
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn derivative(&self) -> Self {
        let n = self.num.derivative().mul_ref(&self.den).sub_ref(&self.num.mul_ref(&self.den.derivative()));
        Self::new(n, self.den.mul_ref(&self.den))
    }

    /// Value at `x`, or `None` at a pole.
    pub fn eval(&self, x: &F) -> Option<F> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// Laurent expansion at `x = s + t`, known for exponents below `prec`.
    pub fn local_expand(&self, s: &F, prec: i64) -> Result<LocalSeries<F>> {
        if self.num.is_zero() {
            return Ok(LocalSeries { point: s.clone(), series: Laurent::zero(prec) });
        }
        let n = self.num.taylor_shift(s);
        let d = self.den.taylor_shift(s);
        let vn = leading_zeros(&n);
        let vd = leading_zeros(&d);
        let val = vn as i64 - vd as i64;
        let len = prec - val;
        if len <= 0 {
            return Ok(LocalSeries { point: s.clone(), series: Laurent::zero(prec) });
        }
        let nn = Laurent::new(0, n.coeffs()[vn..].to_vec(), len);
        let dd = Laurent::new(0, d.coeffs()[vd..].to_vec(), len);
        let q = nn.div(&dd)?;
        Ok(LocalSeries { point: s.clone(), series: q.shift(val) })
    }

    /// Order of the pole at `s` (0 if regular there).
    pub fn pole_order_at(&self, s: &F) -> usize {
        let d = self.den.taylor_shift(s);
        let n = self.num.taylor_shift(s);
        leading_zeros(&d).saturating_sub(leading_zeros(&n))
    }

    pub fn residue_at(&self, s: &F) -> Result<F> {
        self.local_expand(s, 0)?.residue()
    }

    /// Distinct poles with their orders.
    pub fn poles(&self) -> Result<Vec<(F, usize)>> {
        let rs = roots(&self.den)?;
        Ok(rs
            .into_iter()
            .map(|(s, _)| {
                let k = self.pole_order_at(&s);
                (s, k)
            })
            .filter(|(_, k)| *k > 0)
            .collect())
    }

    pub fn partial_fractions(&self) -> Result<PartialFractions<F>> {
        let (poly, _) = self.num.div_rem(&self.den);
        let mut parts = Vec::new();
        for (s, k) in self.poles()? {
            let ls = self.local_expand(&s, 0)?;
            let mut c = Vec::with_capacity(k);
            for j in 1..=k {
                c.push(ls.series.coeff(-(j as i64))?);
            }
            parts.push((s, c));
        }
        Ok(PartialFractions { poly, parts })
    }

    /// Order of vanishing at infinity (`deg den - deg num`); `None` for zero.
    pub fn order_at_infinity(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        Some(self.den.degree().unwrap_or(0) as i64 - dn)
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> RatFunc<G> {
        RatFunc::new(self.num.map(&f), self.den.map(&f))
    }

    pub fn fmt_with(&self, var: &str, coef: &dyn Fn(&F) -> String) -> String {
        let n = self.num.fmt_with(var, coef);
        if self.den.is_constant() {
            return n;
        }
        let d = self.den.fmt_with(var, coef);
        let n = if self.num.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 { format!("({n})") } else { n };
        let d = if self.den.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 { format!("({d})") } else { d };
        format!("{n}/{d}")
    }
}

impl<F: Field> PartialFractions<F> {
    /// Reassembles the rational function.
    pub fn reassemble(&self) -> RatFunc<F> {
        let mut acc = RatFunc::from_poly(self.poly.clone());
        for (s, c) in &self.parts {
            for (k, ck) in c.iter().enumerate() {
                acc = acc.add_ref(&RatFunc::pole(ck.clone(), s, k as u32 + 1));
            }
        }
        acc
    }

    pub fn residue(&self, s: &F) -> F {
        self.parts
            .iter()
            .find(|(p, _)| p == s)
            .and_then(|(_, c)| c.first().cloned())
            .unwrap_or_else(F::zero)
    }
}

fn leading_zeros<F: Field>(p: &Poly<F>) -> usize {
    if F::EXACT {
        p.coeffs().iter().take_while(|c| c.is_zero()).count()
    } else {
        let n = p.norm();
        p.coeffs().iter().take_while(|c| c.is_negligible(n, NUMERIC_VALUATION_TOL)).count()
    }
}

crate::impl_ring_ops!([F: Field] RatFunc<F>);
crate::impl_div_ops!([F: Field] RatFunc<F>);

impl<F: Field> Ring for RatFunc<F> {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn one() -> Self {
        RatFunc::one()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        RatFunc::constant(F::from_i64(n))
    }
}

impl<F: Field> Field for RatFunc<F> {
    const EXACT: bool = F::EXACT;

    fn from_rat(r: &Rat) -> Self {
        RatFunc::constant(F::from_rat(r))
    }
    fn to_rat(&self) -> Option<Rat> {
        self.as_constant()?.to_rat()
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.num.norm() / self.den.norm().max(1e-300)
        }
    }
    fn re_f64(&self) -> f64 {
        self.as_constant().map(|c| c.re_f64()).unwrap_or(f64::NAN)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        let key = |r: &Self| (r.num.coeffs().to_vec(), r.den.coeffs().to_vec());
        let (a, b) = (key(self), key(other));
        cmp_seq(&a.0, &b.0).then_with(|| cmp_seq(&a.1, &b.1))
    }
    fn display(&self) -> String {
        self.fmt_with("x", &|c| c.display())
    }
}

fn cmp_seq<F: Field>(a: &[F], b: &[F]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            let c = x.total_cmp(y);
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    })
}

impl<F: Field + fmt::Display> fmt::Display for RatFunc<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with("x", &|c| c.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn p(v: &[i64]) -> Poly<Rat> {
        Poly::new(v.iter().map(|&c| Rat::from_i64(c)).collect())
    }

    #[test]
    fn normal_form_is_reduced_and_monic() {
        let f = RatFunc::new(p(&[-2, 2]), p(&[-2, 0, 2]));
        assert_eq!(f.numer(), &p(&[1]));
        assert_eq!(f.denom(), &p(&[1, 1]));
    }

    #[test]
    fn simple_residues() {
        let f = RatFunc::new(p(&[1]), p(&[-2, 1]));
        assert_eq!(f.residue_at(&Rat::from_i64(2)).unwrap(), Rat::one());
        let g = RatFunc::new(p(&[1]), p(&[0, 0, 1]));
        assert_eq!(g.residue_at(&Rat::zero()).unwrap(), Rat::zero());
    }

    #[test]
    fn geometric_expansion() {
        let f = RatFunc::new(p(&[1]), p(&[1, -1]));
        let s = f.local_expand(&Rat::zero(), 4).unwrap();
        for k in 0..4 {
            assert_eq!(s.series.coeff(k).unwrap(), Rat::one());
        }
    }

    #[test]
    fn partial_fractions_of_x2_minus_1() {
        let f = RatFunc::new(p(&[1]), p(&[-1, 0, 1]));
        let pf = f.partial_fractions().unwrap();
        assert!(pf.poly.is_zero());
        assert_eq!(pf.parts, vec![(Rat::from_i64(-1), vec![rat(-1, 2)]), (Rat::one(), vec![rat(1, 2)])]);
        assert_eq!(pf.reassemble(), f);
    }
}
