//! Root finding: exact rational roots, and Aberth iteration for the numeric
//! backend.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::field::{default_precision, BigFloat, Complex, Field, Rat, Ring};
use crate::poly::Poly;

/// Roots with multiplicities, sorted by [`Field::total_cmp`].
///
/// Exact fields return rational roots and fail with `PoleFieldMismatch` if
/// an irreducible factor of higher degree remains. Numeric fields use Aberth
/// iteration and cluster nearby approximations into multiple roots.
pub fn roots<F: Field>(p: &Poly<F>) -> Result<Vec<(F, usize)>> {
    if p.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let mut out = if F::EXACT {
        let q: Option<Vec<Rat>> = p.coeffs().iter().map(|c| c.to_rat()).collect();
        let q = q.ok_or_else(|| Error::PoleFieldMismatch("polynomial over a non-rational exact field".into()))?;
        let (found, rest) = rational_roots(&Poly::new(q));
        if rest.degree().unwrap_or(0) > 0 {
            return Err(Error::PoleFieldMismatch(format!(
                "factor of degree {} has no rational roots; use the numeric backend",
                rest.degree().unwrap()
            )));
        }
        found.into_iter().map(|(r, m)| (F::from_rat(&r), m)).collect::<Vec<_>>()
    } else {
        let c: Vec<Complex> = p.coeffs().iter().map(as_complex).collect::<Option<_>>().ok_or_else(|| {
            Error::PoleFieldMismatch("numeric root finding needs complex coefficients".into())
        })?;
        let approx = aberth(&Poly::new(c));
        cluster(approx)
            .into_iter()
            .map(|(z, m)| (from_complex::<F>(&z), m))
            .collect::<Vec<_>>()
    };
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

fn as_complex<F: Field>(c: &F) -> Option<Complex> {
    // Field has no downcast; numeric fields in this crate are `Complex`.
    let any: &dyn std::any::Any = c;
    any.downcast_ref::<Complex>().cloned()
}

fn from_complex<F: Field>(z: &Complex) -> F {
    let any: &dyn std::any::Any = z;
    let mut slot: Option<F> = None;
    let s: &mut dyn std::any::Any = &mut slot;
    if let Some(target) = s.downcast_mut::<Option<Complex>>() {
        *target = Some(any.downcast_ref::<Complex>().unwrap().clone());
    }
    slot.expect("numeric field is Complex")
}

/// Rational roots with multiplicities, and the cofactor without them.
pub fn rational_roots(p: &Poly<Rat>) -> (Vec<(Rat, usize)>, Poly<Rat>) {
    let mut rest = p.clone();
    let mut found = Vec::new();
    if rest.is_zero() {
        return (found, rest);
    }
    let mut m0 = 0;
    while rest.degree().unwrap_or(0) > 0 && rest.coeff(0).is_zero() {
        rest = Poly::new(rest.coeffs()[1..].to_vec());
        m0 += 1;
    }
    if m0 > 0 {
        found.push((Rat::zero(), m0));
    }
    if rest.degree().unwrap_or(0) == 0 {
        return (found, rest);
    }
    let ints = integer_coeffs(&rest);
    let a0 = ints[0].abs();
    let an = ints.last().unwrap().abs();
    let (Some(dp), Some(dq)) = (divisors(&a0), divisors(&an)) else {
        return (found, rest);
    };
    let mut cands: Vec<Rat> = Vec::new();
    for num in &dp {
        for den in &dq {
            let r = Rat::new(num.clone(), den.clone());
            cands.push(r.clone());
            cands.push(-r);
        }
    }
    cands.sort();
    cands.dedup();
    for r in cands {
        let mut m = 0;
        loop {
            if rest.degree().unwrap_or(0) == 0 || !rest.eval(&r).is_zero() {
                break;
            }
            let (q, _) = rest.div_rem(&Poly::linear(&r));
            rest = q;
            m += 1;
        }
        if m > 0 {
            found.push((r, m));
        }
    }
    (found, rest)
}

fn integer_coeffs(p: &Poly<Rat>) -> Vec<BigInt> {
    let l = p.coeffs().iter().fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()));
    p.coeffs().iter().map(|c| (c * Rat::from_integer(l.clone())).to_integer()).collect()
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.to_u64()?;
    if n == 0 || n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            out.push(BigInt::from(i));
            if i * i != n {
                out.push(BigInt::from(n / i));
            }
        }
        i += 1;
    }
    Some(out)
}

/// Square-free decomposition `p = c * Π f_k^k` over the rationals.
pub fn squarefree_decomposition(p: &Poly<Rat>) -> Vec<(Poly<Rat>, usize)> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return out;
    }
    let dp = p.derivative();
    let mut a = p.gcd(&dp);
    let mut b = p.div_rem(&a).0;
    let mut c = dp.div_rem(&a).0;
    let mut d = c.sub_ref(&b.derivative());
    let mut k = 1;
    while b.degree().unwrap_or(0) > 0 {
        a = b.gcd(&d);
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.monic(), k));
        }
        b = b.div_rem(&a).0;
        c = d.div_rem(&a).0;
        d = c.sub_ref(&b.derivative());
        k += 1;
    }
    out
}

/// Numeric roots of a rational polynomial: rational roots exactly, the rest
/// by Aberth iteration on square-free factors.
pub fn numeric_roots_of_rational(p: &Poly<Rat>) -> Vec<(Complex, usize)> {
    let mut out = Vec::new();
    for (f, k) in squarefree_decomposition(p) {
        let (rs, rest) = rational_roots(&f);
        for (r, m) in rs {
            out.push((Complex::from_rat(&r), m * k));
        }
        if rest.degree().unwrap_or(0) > 0 {
            let c = rest.map(Complex::from_rat);
            for z in aberth(&c) {
                out.push((z, k));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// All complex roots by Aberth–Ehrlich iteration, polished by Newton steps.
pub fn aberth(p: &Poly<Complex>) -> Vec<Complex> {
    let n = match p.degree() {
        Some(n) if n > 0 => n,
        _ => return Vec::new(),
    };
    let prec = default_precision();
    let lead = p.lead().magnitude();
    let bound = 1.0 + p.coeffs()[..n].iter().map(|c| c.magnitude() / lead).fold(0.0, f64::max);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex::from_parts_f64(bound * 0.5 * th.cos(), bound * 0.5 * th.sin())
        })
        .collect();
    let dp = p.derivative();
    let tiny = 2f64.powi(-(prec as i32) + 24);
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let pv = p.eval(&z[k]);
            if pv.is_zero() {
                continue;
            }
            let ratio = pv / dp.eval(&z[k]);
            let mut s = Complex::zero();
            for j in 0..n {
                if j != k {
                    s = s + (z[k].clone() - &z[j]).inv();
                }
            }
            let w = ratio.clone() / (Complex::one() - ratio * s);
            worst = worst.max(w.magnitude() / z[k].magnitude().max(1.0));
            z[k] = z[k].clone() - w;
        }
        if worst < tiny {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let d = dp.eval(zk);
            if d.is_zero() {
                break;
            }
            *zk = zk.clone() - p.eval(zk) / d;
        }
        *zk = clean(zk);
    }
    z
}

/// Snaps parts that are negligible against the modulus to exact zero.
fn clean(z: &Complex) -> Complex {
    let m = z.magnitude();
    let tol = 2f64.powi(-(default_precision() as i32) + 40) * m.max(1.0);
    let re = if z.re.to_f64().abs() < tol { BigFloat::zero_with(z.precision()) } else { z.re.clone() };
    let im = if z.im.to_f64().abs() < tol { BigFloat::zero_with(z.precision()) } else { z.im.clone() };
    Complex::new(re, im)
}

fn cluster(z: Vec<Complex>) -> Vec<(Complex, usize)> {
    let mut groups: Vec<(Vec<Complex>, Complex)> = Vec::new();
    for w in z {
        let scale = w.magnitude().max(1.0);
        if let Some(g) = groups.iter_mut().find(|g| (g.1.clone() - &w).magnitude() < 1e-12 * scale) {
            g.0.push(w);
        } else {
            groups.push((vec![w.clone()], w));
        }
    }
    groups
        .into_iter()
        .map(|(ws, _)| {
            let m = ws.len();
            let sum = ws.into_iter().fold(Complex::zero(), |a, b| a + b);
            (sum / Complex::from_i64(m as i64), m)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn rational_roots_with_multiplicity() {
        // (x - 1/2)^2 (x + 3) x
        let p = Poly::new(vec![rat(-1, 2), Rat::one()]).pow(2)
            * Poly::new(vec![Rat::from_i64(3), Rat::one()])
            * Poly::x();
        let r = roots(&p).unwrap();
        assert_eq!(r, vec![(Rat::from_i64(-3), 1), (Rat::zero(), 1), (rat(1, 2), 2)]);
    }

    #[test]
    fn irrational_roots_rejected_exactly() {
        let p = Poly::new(vec![Rat::from_i64(-2), Rat::zero(), Rat::from_i64(4)]);
        assert!(matches!(roots(&p), Err(Error::PoleFieldMismatch(_))));
    }

    #[test]
    fn numeric_roots_of_hermite_two() {
        let p = Poly::new(vec![Rat::from_i64(-2), Rat::zero(), Rat::from_i64(4)]);
        let r = numeric_roots_of_rational(&p);
        assert_eq!(r.len(), 2);
        for (z, m) in r {
            assert_eq!(m, 1);
            let sq = z.clone() * &z - Complex::from_rat(&rat(1, 2));
            assert!(sq.magnitude() < 1e-70);
        }
    }
}
