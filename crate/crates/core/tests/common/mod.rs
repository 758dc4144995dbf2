#![allow(dead_code)]

use qtr::curve::QuantumCurve;
use qtr::field::rat;
use qtr::{Complex, Poly, Rat, RatFunc, Ring};

pub fn poly(c: &[i64]) -> Poly<Rat> {
    Poly::new(c.iter().map(|&v| Rat::from_i64(v)).collect())
}

/// `ψ = q(x) exp(p(x))`.
pub fn quasi(p_prime: &[i64], q: &[i64], big_q: Rat) -> QuantumCurve<Rat> {
    QuantumCurve::from_quasi_poly(&RatFunc::from_poly(poly(p_prime)), &poly(q), big_q).unwrap()
}

pub fn hermite_n1() -> QuantumCurve<Rat> {
    quasi(&[0, -1], &[0, 1], Rat::from_i64(1))
}

pub fn trivial(q: Rat) -> QuantumCurve<Rat> {
    quasi(&[], &[0, 1], q)
}

pub fn empty_bethe() -> QuantumCurve<Rat> {
    quasi(&[0, -1], &[1], Rat::from_i64(1))
}

pub fn wronskian_d3() -> QuantumCurve<Rat> {
    let x = RatFunc::<Rat>::x();
    QuantumCurve::from_wronskian(&[x.clone() - RatFunc::one(), x.clone() * &x, RatFunc::one()], Rat::one()).unwrap()
}

/// `Y_2 = -Y_1 = 2Qx/(x^2 - 1)`, Bethe roots ±1 on sheet 1. Not a Wronskian.
pub fn adversarial() -> QuantumCurve<Rat> {
    let q = Rat::one();
    let y1 = RatFunc::new(poly(&[0, -2]), poly(&[-1, 0, 1]));
    let bethe = vec![
        qtr::curve::BetheRoot { s: rat(-1, 1), mu: 1 },
        qtr::curve::BetheRoot { s: rat(1, 1), mu: 1 },
    ];
    QuantumCurve::from_raw_y(q, vec![y1.clone(), -y1], bethe, Some(vec![])).unwrap()
}

/// Hermite `n = 2` on the numeric backend: `ψ = (4x^2 - 2) exp(-x^2/2)`.
pub fn hermite_n2() -> QuantumCurve<Complex> {
    let f = |v: i64| Complex::from_i64(v);
    let pp = RatFunc::from_poly(Poly::new(vec![f(0), f(-1)]));
    QuantumCurve::from_quasi_poly(&pp, &Poly::new(vec![f(-2), f(0), f(4)]), f(1)).unwrap()
}

/// Deterministic rational sample points away from the origin.
pub fn points(seed: u64, n: usize) -> Vec<Rat> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let p = ((s >> 33) % 19) as i64 + 2;
            let q = ((s >> 17) % 7) as i64 + 1;
            let sign = if (s >> 5) & 1 == 0 { 1 } else { -1 };
            rat(sign * p, q)
        })
        .collect()
}
