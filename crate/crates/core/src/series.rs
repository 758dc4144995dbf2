//! Truncated Laurent series in a local parameter `t`.

use crate::error::{Error, Result};
use crate::field::{Field, Ring};

/// Values that can be added and tested for zero. Series coefficients only
/// need this much; products are supplied explicitly.
pub trait Additive: Clone + std::fmt::Debug + Send + Sync {
    fn zero_value() -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn is_zero_value(&self) -> bool;
}

impl<T: Ring> Additive for T {
    fn zero_value() -> Self {
        T::zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self.clone() + o
    }
    fn negated(&self) -> Self {
        -self.clone()
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

/// `Σ_{k=val}^{prec-1} c_k t^k + O(t^prec)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent<C> {
    val: i64,
    coeffs: Vec<C>,
    prec: i64,
}

impl<C: Additive> Laurent<C> {
    /// Builds from coefficients starting at exponent `val`; `prec` is the
    /// first exponent that is not known.
    pub fn new(val: i64, coeffs: Vec<C>, prec: i64) -> Self {
        let mut coeffs = coeffs;
        coeffs.truncate((prec - val).max(0) as usize);
        let mut s = Laurent { val, coeffs, prec };
        s.normalize();
        s
    }

    /// The zero series known up to `prec`.
    pub fn zero(prec: i64) -> Self {
        Laurent { val: prec, coeffs: Vec::new(), prec }
    }

    /// An exact finite sum, truncated at `prec`.
    pub fn from_terms(terms: Vec<(i64, C)>, prec: i64) -> Self {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(prec).min(prec);
        let mut v = vec![C::zero_value(); (prec - lo).max(0) as usize];
        for (k, c) in terms {
            if k < prec {
                let i = (k - lo) as usize;
                v[i] = v[i].plus(&c);
            }
        }
        Self::new(lo, v, prec)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero_value()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.val += lead as i64;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero_value()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.val = self.prec;
        }
    }

    /// Lowest exponent with a nonzero coefficient (`prec` when zero).
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `t^k`.
    pub fn coeff(&self, k: i64) -> Result<C> {
        if k >= self.prec {
            return Err(Error::TruncationInsufficient { needed: k, known: self.prec });
        }
        if k < self.val {
            return Ok(C::zero_value());
        }
        Ok(self.coeffs.get((k - self.val) as usize).cloned().unwrap_or_else(C::zero_value))
    }

    /// Coefficient of `t^{-1}`.
    pub fn residue(&self) -> Result<C> {
        self.coeff(-1)
    }

    /// `(exponent, coefficient)` pairs of the nonzero terms.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero_value())
            .map(move |(i, c)| (self.val + i as i64, c))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        let p = prec.min(self.prec);
        Self::new(self.val, self.coeffs.clone(), p)
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        let lo = self.val.min(o.val).min(prec);
        let mut v = vec![C::zero_value(); (prec - lo).max(0) as usize];
        for (k, c) in self.terms().chain(o.terms()) {
            if k < prec {
                let i = (k - lo) as usize;
                v[i] = v[i].plus(c);
            }
        }
        Self::new(lo, v, prec)
    }

    pub fn neg(&self) -> Self {
        Laurent { val: self.val, coeffs: self.coeffs.iter().map(|c| c.negated()).collect(), prec: self.prec }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        Laurent { val: self.val + k, coeffs: self.coeffs.clone(), prec: self.prec + k }
    }

    pub fn map<D: Additive>(&self, f: impl Fn(&C) -> D) -> Laurent<D> {
        Laurent::new(self.val, self.coeffs.iter().map(f).collect(), self.prec)
    }

    /// Cauchy product with a caller-supplied coefficient product.
    pub fn mul_with<D: Additive, E: Additive>(&self, o: &Laurent<D>, f: impl Fn(&C, &D) -> E) -> Laurent<E> {
        let prec = (self.val + o.prec).min(o.val + self.prec);
        let val = self.val + o.val;
        let n = (prec - val).max(0) as usize;
        let mut v: Vec<Option<E>> = vec![None; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= n || a.is_zero_value() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if b.is_zero_value() {
                    continue;
                }
                let p = f(a, b);
                v[i + j] = Some(match v[i + j].take() {
                    Some(acc) => acc.plus(&p),
                    None => p,
                });
            }
        }
        Laurent::new(val, v.into_iter().map(|c| c.unwrap_or_else(E::zero_value)).collect(), prec)
    }
}

impl<F: Field> Laurent<F> {
    pub fn mul(&self, o: &Self) -> Self {
        self.mul_with(o, |a, b| a.clone() * b)
    }

    pub fn scale(&self, c: &F) -> Self {
        self.map(|a| a.clone() * c)
    }

    /// Multiplicative inverse; fails on the zero series.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = (self.prec - self.val) as usize;
        let a0inv = self.coeffs[0].inv();
        let mut b: Vec<F> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = if k == 0 { F::one() } else { F::zero() };
            for j in 1..=k {
                if let Some(a) = self.coeffs.get(j) {
                    acc = acc - a.clone() * &b[k - j];
                }
            }
            b.push(acc * &a0inv);
        }
        Ok(Laurent::new(-self.val, b, n as i64 - self.val))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inverse()?))
    }

    pub fn derivative(&self) -> Self {
        let v: Vec<F> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.clone() * F::from_i64(self.val + i as i64))
            .collect();
        Laurent::new(self.val - 1, v, self.prec - 1)
    }

    /// `exp(self)` for a series with positive valuation.
    pub fn exp(&self) -> Result<Self> {
        if !self.is_zero() && self.val < 1 {
            return Err(Error::EssentialSingularity("exp of a series with nonpositive valuation".into()));
        }
        let n = self.prec.max(0) as usize;
        let a = |k: usize| self.coeff(k as i64).unwrap_or_else(|_| F::zero());
        let mut e: Vec<F> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                e.push(F::one());
                continue;
            }
            let mut acc = F::zero();
            for j in 1..=k {
                let aj = a(j);
                if !aj.is_zero() {
                    acc = acc + aj * F::from_i64(j as i64) * &e[k - j];
                }
            }
            e.push(acc / F::from_i64(k as i64));
        }
        Ok(Laurent::new(0, e, n as i64))
    }

    /// Termwise antiderivative; fails if a `t^{-1}` term is present.
    pub fn integral(&self) -> Result<Self> {
        if !self.coeff(-1).map(|c| c.is_zero()).unwrap_or(true) {
            return Err(Error::EssentialSingularity("logarithmic term in series integral".into()));
        }
        let v: Vec<F> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.val + i as i64;
                if k == -1 {
                    F::zero()
                } else {
                    c.clone() / F::from_i64(k + 1)
                }
            })
            .collect();
        Ok(Laurent::new(self.val + 1, v, self.prec + 1))
    }

    /// Numeric cleanup: drops coefficients negligible against the largest.
    pub fn chop(&self, rel_tol: f64) -> Self {
        if F::EXACT {
            return self.clone();
        }
        let norm = self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max);
        let v = self
            .coeffs
            .iter()
            .map(|c| if c.is_negligible(norm, rel_tol) { F::zero() } else { c.clone() })
            .collect();
        Laurent::new(self.val, v, self.prec)
    }
}

/// A Laurent series attached to an expansion point `x = s + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSeries<F> {
    pub point: F,
    pub series: Laurent<F>,
}

impl<F: Field> LocalSeries<F> {
    pub fn residue(&self) -> Result<F> {
        self.series.residue()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, Rat};

    #[test]
    fn inverse_of_one_minus_t() {
        let s = Laurent::new(0, vec![Rat::one(), -Rat::one()], 6);
        let inv = s.inverse().unwrap();
        for k in 0..6 {
            assert_eq!(inv.coeff(k).unwrap(), Rat::one());
        }
        assert!(inv.coeff(6).is_err());
    }

    #[test]
    fn exp_of_t_squared() {
        let s = Laurent::new(2, vec![Rat::one()], 8);
        let e = s.exp().unwrap();
        assert_eq!(e.coeff(0).unwrap(), Rat::one());
        assert_eq!(e.coeff(2).unwrap(), Rat::one());
        assert_eq!(e.coeff(4).unwrap(), rat(1, 2));
        assert_eq!(e.coeff(6).unwrap(), rat(1, 6));
        assert_eq!(e.coeff(3).unwrap(), Rat::zero());
    }

    #[test]
    fn product_precision_is_conservative() {
        let a = Laurent::new(-2, vec![Rat::one(), Rat::one()], 3);
        let b = Laurent::new(0, vec![Rat::one(); 4], 4);
        let c = a.mul(&b);
        assert_eq!(c.precision(), 2);
    }
}
