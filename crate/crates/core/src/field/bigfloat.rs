//! Fixed-precision binary floats on a big-integer mantissa, and complex
//! numbers built from them.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Field, Rat, Ring};

static DEFAULT_PREC: AtomicU32 = AtomicU32::new(0);

/// Mantissa bits used for freshly created numeric values. Reads
/// `QTR_PRECISION_BITS` once; defaults to 256.
pub fn default_precision() -> u32 {
    let p = DEFAULT_PREC.load(AtomicOrdering::Relaxed);
    if p != 0 {
        return p;
    }
    let p = std::env::var("QTR_PRECISION_BITS")
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|&b| b >= 64)
        .unwrap_or(256);
    DEFAULT_PREC.store(p, AtomicOrdering::Relaxed);
    p
}

/// Overrides the default precision for the rest of the process.
pub fn set_default_precision(bits: u32) {
    DEFAULT_PREC.store(bits.max(64), AtomicOrdering::Relaxed);
}

/// `man * 2^exp`, with `man` holding exactly `prec` bits unless zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloat {
    man: BigInt,
    exp: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero_with(prec: u32) -> Self {
        BigFloat { man: BigInt::zero(), exp: 0, prec }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    fn normalized(man: BigInt, exp: i64, prec: u32) -> Self {
        if man.is_zero() {
            return Self::zero_with(prec);
        }
        let bits = man.bits() as i64;
        let p = prec as i64;
        if bits > p {
            let shift = (bits - p) as u64;
            let neg = man.is_negative();
            let mut a = man.abs();
            let half = BigInt::one() << (shift - 1);
            a = (a + half) >> shift;
            let mut e = exp + shift as i64;
            if a.bits() as i64 > p {
                a >>= 1u32;
                e += 1;
            }
            let m = if neg { -a } else { a };
            BigFloat { man: m, exp: e, prec }
        } else {
            let shift = (p - bits) as u64;
            BigFloat { man: man << shift, exp: exp - shift as i64, prec }
        }
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Self {
        Self::normalized(n.clone(), 0, prec)
    }

    pub fn from_rat_prec(r: &Rat, prec: u32) -> Self {
        let n = r.numer();
        let d = r.denom();
        if n.is_zero() {
            return Self::zero_with(prec);
        }
        let shift = prec as i64 + 2 + d.bits() as i64 - n.bits() as i64;
        let (num, e) = if shift >= 0 {
            (n << (shift as u64), -shift)
        } else {
            (n >> ((-shift) as u64), -shift)
        };
        let (q, _) = num.div_rem(d);
        Self::normalized(q, e, prec)
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        if v == 0.0 || !v.is_finite() {
            return Self::zero_with(prec);
        }
        let r = Rat::from_float(v).expect("finite float");
        Self::from_rat_prec(&r, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn to_rat(&self) -> Rat {
        if self.exp >= 0 {
            Rat::from_integer(&self.man << (self.exp as u64))
        } else {
            Rat::new(self.man.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.man.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits() as i64;
        let keep = 60i64.min(bits);
        let top = (&self.man >> ((bits - keep) as u64)).to_f64().unwrap_or(0.0);
        let e = self.exp + bits - keep;
        if e > 2000 {
            return top.signum() * f64::INFINITY;
        }
        if e < -2000 {
            return 0.0;
        }
        top * 2f64.powi(e as i32)
    }

    pub fn neg(&self) -> Self {
        BigFloat { man: -&self.man, exp: self.exp, prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        BigFloat { man: self.man.abs(), exp: self.exp, prec: self.prec }
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        if self.is_zero() {
            return Self::normalized(o.man.clone(), o.exp, prec);
        }
        if o.is_zero() {
            return Self::normalized(self.man.clone(), self.exp, prec);
        }
        let top_a = self.exp + self.man.bits() as i64;
        let top_b = o.exp + o.man.bits() as i64;
        let gap = 2 * prec as i64 + 8;
        if top_a - top_b > gap {
            return Self::normalized(self.man.clone(), self.exp, prec);
        }
        if top_b - top_a > gap {
            return Self::normalized(o.man.clone(), o.exp, prec);
        }
        let e = self.exp.min(o.exp);
        let a = &self.man << ((self.exp - e) as u64);
        let b = &o.man << ((o.exp - e) as u64);
        Self::normalized(a + b, e, prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        Self::normalized(&self.man * &o.man, self.exp + o.exp, prec)
    }

    pub fn div(&self, o: &Self) -> Self {
        assert!(!o.is_zero(), "BigFloat division by zero");
        let prec = self.prec.max(o.prec);
        if self.is_zero() {
            return Self::zero_with(prec);
        }
        let shift = prec as u64 + o.man.bits() + 4;
        let q = (&self.man << shift) / &o.man;
        Self::normalized(q, self.exp - o.exp - shift as i64, prec)
    }

    pub fn cmp_value(&self, o: &Self) -> Ordering {
        let d = self.sub(o);
        if d.is_zero() {
            Ordering::Equal
        } else if d.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Scientific decimal string with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let v = self.to_rat();
        let neg = v.is_negative();
        let v = v.abs();
        let log10 = (self.man.bits() as f64 + self.exp as f64) * std::f64::consts::LOG10_2;
        let mut e10 = log10.floor() as i64;
        let mut scaled;
        loop {
            let k = digits as i64 - 1 - e10;
            let s = if k >= 0 {
                &v * Rat::from_integer(BigInt::from(10u32).pow(k as u32))
            } else {
                &v / Rat::from_integer(BigInt::from(10u32).pow((-k) as u32))
            };
            scaled = s.round().to_integer();
            let len = scaled.to_string().len();
            if len > digits {
                e10 += 1;
            } else if len < digits {
                e10 -= 1;
            } else {
                break;
            }
        }
        let s = scaled.to_string();
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        let mantissa = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
        format!("{}{}e{}", if neg { "-" } else { "" }, mantissa, e10)
    }

    /// Parses a decimal literal such as "-1.25e-3".
    pub fn parse_decimal(s: &str, prec: u32) -> Option<Self> {
        Some(Self::from_rat_prec(&parse_decimal_rat(s)?, prec))
    }
}

/// Exact rational value of a decimal literal, or of "p/q".
pub fn parse_decimal_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.contains('/') {
        return super::parse_rat(s);
    }
    let (body, e) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match body.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, body.strip_prefix('+').unwrap_or(body)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n: BigInt = digits.parse().ok()?;
    let scale = e - fp.len() as i64;
    let ten = BigInt::from(10u32);
    let mut v = if scale >= 0 {
        Rat::from_integer(n * ten.pow(scale as u32))
    } else {
        Rat::new(n, ten.pow((-scale) as u32))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

/// Complex number with [`BigFloat`] parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Complex { re, im }
    }

    pub fn from_parts_f64(re: f64, im: f64) -> Self {
        let p = default_precision();
        Complex { re: BigFloat::from_f64(re, p), im: BigFloat::from_f64(im, p) }
    }

    pub fn precision(&self) -> u32 {
        self.re.prec.max(self.im.prec)
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: self.im.neg() }
    }

    fn add_ref(&self, o: &Self) -> Self {
        Complex { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }
    fn sub_ref(&self, o: &Self) -> Self {
        Complex { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }
    fn mul_ref(&self, o: &Self) -> Self {
        Complex {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }
    fn neg_ref(&self) -> Self {
        Complex { re: self.re.neg(), im: self.im.neg() }
    }
    fn div_ref(&self, o: &Self) -> Self {
        let den = o.re.mul(&o.re).add(&o.im.mul(&o.im));
        let num = self.mul_ref(&o.conj());
        Complex { re: num.re.div(&den), im: num.im.div(&den) }
    }

    /// `["re","im"]` decimal strings.
    pub fn to_strings(&self) -> [String; 2] {
        let digits = (self.precision() as f64 * std::f64::consts::LOG10_2).floor() as usize;
        [self.re.to_decimal(digits), self.im.to_decimal(digits)]
    }

    pub fn parse(re: &str, im: &str) -> Option<Self> {
        let p = default_precision();
        Some(Complex { re: BigFloat::parse_decimal(re, p)?, im: BigFloat::parse_decimal(im, p)? })
    }
}

crate::impl_ring_ops!([] Complex);
crate::impl_div_ops!([] Complex);

impl Ring for Complex {
    fn zero() -> Self {
        let p = default_precision();
        Complex { re: BigFloat::zero_with(p), im: BigFloat::zero_with(p) }
    }
    fn one() -> Self {
        let p = default_precision();
        Complex { re: BigFloat::from_bigint(&BigInt::one(), p), im: BigFloat::zero_with(p) }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        let p = default_precision();
        Complex { re: BigFloat::from_bigint(&BigInt::from(n), p), im: BigFloat::zero_with(p) }
    }
}

impl Field for Complex {
    const EXACT: bool = false;

    fn from_rat(r: &Rat) -> Self {
        let p = default_precision();
        Complex { re: BigFloat::from_rat_prec(r, p), im: BigFloat::zero_with(p) }
    }
    fn to_rat(&self) -> Option<Rat> {
        if self.im.is_zero() {
            Some(self.re.to_rat())
        } else {
            None
        }
    }
    fn magnitude(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
    fn re_f64(&self) -> f64 {
        self.re.to_f64()
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.re.cmp_value(&other.re).then_with(|| self.im.cmp_value(&other.im))
    }
    fn display(&self) -> String {
        self.to_string()
    }
}

impl std::fmt::Display for Complex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [re, im] = self.to_strings();
        write!(f, "({re}, {im})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn rational_roundtrip_is_close() {
        let x = BigFloat::from_rat_prec(&rat(1, 3), 256);
        let back = x.to_rat();
        let err = (back - rat(1, 3)).abs();
        assert!(err < Rat::new(1.into(), BigInt::one() << 250u32));
    }

    #[test]
    fn arithmetic_identities() {
        let p = 256;
        let a = BigFloat::from_rat_prec(&rat(7, 11), p);
        let b = BigFloat::from_rat_prec(&rat(-3, 5), p);
        let lhs = a.add(&b).mul(&a.sub(&b));
        let rhs = a.mul(&a).sub(&b.mul(&b));
        assert!(lhs.sub(&rhs).abs().to_f64() < 1e-70);
        let q = a.div(&b).mul(&b);
        assert!(q.sub(&a).abs().to_f64() < 1e-70);
    }

    #[test]
    fn decimal_format_and_parse() {
        let x = BigFloat::from_rat_prec(&rat(-1, 8), 128);
        assert_eq!(x.to_decimal(5), "-1.25e-1");
        let y = BigFloat::parse_decimal("-1.25e-1", 128).unwrap();
        assert_eq!(x, y);
        assert_eq!(parse_decimal_rat("2.5"), Some(rat(5, 2)));
    }

    #[test]
    fn complex_division() {
        let a = Complex::from_rat(&rat(1, 1)) + Complex::new(BigFloat::zero_with(256), BigFloat::from_rat_prec(&rat(2, 1), 256));
        let b = a.clone() / a.clone();
        assert!((b - Complex::one()).magnitude() < 1e-70);
    }
}
