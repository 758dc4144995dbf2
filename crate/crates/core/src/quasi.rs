//! Functions of the form `rational · exp(∫ r dx)`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Poly;
use crate::ratfunc::RatFunc;
use crate::series::{Laurent, LocalSeries};

/// Tolerance for recognising integer residues on the numeric backend.
const INTEGER_RESIDUE_TOL: f64 = 1e-30;

/// `rat · exp(∫ expo dx)`.
///
/// `expo` carries no integer residues: those are folded into `rat` as powers
/// of `(x - s)`. The antiderivative of `expo` is normalised to have no
/// constant term at the point of expansion, so local expansions are defined
/// up to a nonzero constant per point.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiRational<F> {
    pub rat: RatFunc<F>,
    pub expo: RatFunc<F>,
    /// Poles of the original exponent with their integer residues.
    pub certificates: Vec<(F, i64)>,
    /// Residues that were not integers; they stay inside `expo`.
    pub non_integer: Vec<(F, F)>,
}

impl<F: Field> QuasiRational<F> {
    pub fn from_rat(rat: RatFunc<F>) -> Self {
        QuasiRational { rat, expo: RatFunc::zero(), certificates: Vec::new(), non_integer: Vec::new() }
    }

    /// `rat · exp(∫ expo)` taken as given, without folding residues.
    pub fn with_exponent(rat: RatFunc<F>, expo: RatFunc<F>) -> Self {
        QuasiRational { rat, expo, certificates: Vec::new(), non_integer: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero()
    }

    /// True when there is no exponential factor left.
    pub fn is_rational(&self) -> bool {
        self.expo.is_zero()
    }

    pub fn derivative(&self) -> Self {
        let rat = self.rat.derivative() + self.rat.clone() * &self.expo;
        Self { rat, ..self.clone() }
    }

    pub fn mul_rat(&self, f: &RatFunc<F>) -> Self {
        Self { rat: self.rat.clone() * f, ..self.clone() }
    }

    pub fn scale(&self, c: &F) -> Self {
        Self { rat: self.rat.scale(c), ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut certificates = self.certificates.clone();
        certificates.extend(o.certificates.iter().cloned());
        let mut non_integer = self.non_integer.clone();
        non_integer.extend(o.non_integer.iter().cloned());
        QuasiRational { rat: self.rat.clone() * &o.rat, expo: self.expo.clone() + &o.expo, certificates, non_integer }
    }

    /// Sum of two functions sharing the exponential factor.
    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        if self.expo != o.expo {
            return Err(Error::Unsupported("sum of quasi-rational functions with different exponents".into()));
        }
        Ok(Self { rat: self.rat.clone() + &o.rat, ..self.clone() })
    }

    /// Local expansion at `s`, with the exponential factor normalised to 1
    /// at `s`.
    pub fn local_expand(&self, s: &F, prec: i64) -> Result<LocalSeries<F>> {
        let r = self.rat.local_expand(s, prec)?;
        if self.expo.is_zero() || r.series.is_zero() {
            return Ok(r);
        }
        let v = r.series.valuation();
        let need = (prec - v).max(1);
        let e = self.expo.local_expand(s, need - 1)?;
        if e.series.valuation() < 0 {
            return Err(Error::EssentialSingularity(format!("exponent has a pole at {s:?}")));
        }
        let phi = e.series.integral()?;
        let ex = phi.exp()?;
        Ok(LocalSeries { point: s.clone(), series: r.series.mul(&ex) })
    }

    pub fn residue_at(&self, s: &F) -> Result<F> {
        self.local_expand(s, 0)?.residue()
    }
}

/// `exp(∫ r dx)` in structured form. Integer residues of `r` become powers
/// of `(x - s)` in the rational part; the rest stays in the exponent.
pub fn rational_exp_integral<F: Field>(r: &RatFunc<F>) -> Result<QuasiRational<F>> {
    if r.is_zero() {
        return Ok(QuasiRational::from_rat(RatFunc::one()));
    }
    let pf = r.partial_fractions()?;
    let mut num = Poly::one();
    let mut den = Poly::one();
    let mut expo = RatFunc::from_poly(pf.poly.clone());
    let mut certificates = Vec::new();
    let mut non_integer = Vec::new();
    for (s, c) in &pf.parts {
        for (k, ck) in c.iter().enumerate().skip(1) {
            expo = expo + RatFunc::pole(ck.clone(), s, k as u32 + 1);
        }
        let res = &c[0];
        if res.is_zero() {
            continue;
        }
        match as_integer(res) {
            Some(n) => {
                let f = Poly::linear(s).pow(n.unsigned_abs() as u32);
                if n > 0 {
                    num = num * f;
                } else {
                    den = den * f;
                }
                certificates.push((s.clone(), n));
            }
            None => {
                expo = expo + RatFunc::pole(res.clone(), s, 1);
                non_integer.push((s.clone(), res.clone()));
            }
        }
    }
    Ok(QuasiRational { rat: RatFunc::new(num, den), expo, certificates, non_integer })
}

fn as_integer<F: Field>(x: &F) -> Option<i64> {
    if F::EXACT {
        let r = x.to_rat()?;
        if r.is_integer() {
            use num_traits::ToPrimitive;
            return r.to_integer().to_i64();
        }
        return None;
    }
    let m = x.magnitude();
    let n = x.re_f64().round() as i64;
    let diff = (x.clone() - F::from_i64(n)).magnitude();
    (diff <= INTEGER_RESIDUE_TOL * m.max(1.0)).then_some(n)
}

/// Local series of `rat · exp(∫expo)` as a plain [`Laurent`] value.
pub fn local_laurent<F: Field>(q: &QuasiRational<F>, s: &F, prec: i64) -> Result<Laurent<F>> {
    Ok(q.local_expand(s, prec)?.series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rat, Ring};

    fn p(v: &[i64]) -> Poly<Rat> {
        Poly::new(v.iter().map(|&c| Rat::from_i64(c)).collect())
    }

    #[test]
    fn exp_integral_of_one_over_x_is_x() {
        let r = RatFunc::new(p(&[1]), p(&[0, 1]));
        let q = rational_exp_integral(&r).unwrap();
        assert!(q.is_rational());
        assert_eq!(q.rat, RatFunc::x());
    }

    #[test]
    fn exp_integral_with_exponential_part() {
        // 2x - 2/x
        let r = RatFunc::new(p(&[-2, 0, 2]), p(&[0, 1]));
        let q = rational_exp_integral(&r).unwrap();
        assert_eq!(q.rat, RatFunc::new(p(&[1]), p(&[0, 0, 1])));
        assert_eq!(q.expo, RatFunc::from_poly(p(&[0, 2])));
        assert_eq!(q.residue_at(&Rat::zero()).unwrap(), Rat::zero());
    }

    #[test]
    fn exp_integral_of_zero_is_one() {
        let q = rational_exp_integral(&RatFunc::<Rat>::zero()).unwrap();
        assert_eq!(q.rat, RatFunc::one());
        assert!(q.is_rational());
    }
}
