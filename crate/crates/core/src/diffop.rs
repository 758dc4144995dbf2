//! Differential operators `Σ c_k(x) ŷ^k`, `ŷ = Q∂`, kept with every `ŷ` on
//! the right.

use std::fmt;

use crate::diffsym::{DiffFrac, DiffPoly};
use crate::error::{Error, Result};
use crate::field::{binom, Field, Rat, Ring};
use crate::quasi::QuasiRational;
use crate::ratfunc::RatFunc;

/// A ring of functions closed under `∂`, with scalars acting on it.
pub trait DiffRing: Ring {
    type Scalar: Field;
    fn deriv(&self) -> Self;
    fn scale_by(&self, c: &Self::Scalar) -> Self;
    fn from_scalar(c: &Self::Scalar) -> Self;
}

impl<F: Field> DiffRing for RatFunc<F> {
    type Scalar = F;
    fn deriv(&self) -> Self {
        self.derivative()
    }
    fn scale_by(&self, c: &F) -> Self {
        self.scale(c)
    }
    fn from_scalar(c: &F) -> Self {
        RatFunc::constant(c.clone())
    }
}

impl DiffRing for DiffPoly {
    type Scalar = Rat;
    fn deriv(&self) -> Self {
        self.derivative()
    }
    fn scale_by(&self, c: &Rat) -> Self {
        self.scale(c)
    }
    fn from_scalar(c: &Rat) -> Self {
        DiffPoly::constant(c.clone())
    }
}

impl DiffRing for DiffFrac {
    type Scalar = Rat;
    fn deriv(&self) -> Self {
        self.derivative()
    }
    fn scale_by(&self, c: &Rat) -> Self {
        self.scale(c)
    }
    fn from_scalar(c: &Rat) -> Self {
        DiffFrac::constant(c.clone())
    }
}

/// Targets of the right action `ψ · P`.
pub trait DModule<C: DiffRing>: Clone {
    fn times(&self, c: &C) -> Self;
    fn d(&self) -> Self;
    fn scaled(&self, q: &C::Scalar) -> Self;
    fn plus(&self, o: &Self) -> Self;
}

impl<C: DiffRing> DModule<C> for C {
    fn times(&self, c: &C) -> Self {
        c.clone() * self
    }
    fn d(&self) -> Self {
        self.deriv()
    }
    fn scaled(&self, q: &C::Scalar) -> Self {
        self.scale_by(q)
    }
    fn plus(&self, o: &Self) -> Self {
        self.clone() + o
    }
}

impl<F: Field> DModule<RatFunc<F>> for QuasiRational<F> {
    fn times(&self, c: &RatFunc<F>) -> Self {
        self.mul_rat(c)
    }
    fn d(&self) -> Self {
        self.derivative()
    }
    fn scaled(&self, q: &F) -> Self {
        self.scale(q)
    }
    fn plus(&self, o: &Self) -> Self {
        // Terms of one right action share the exponential factor of ψ.
        self.add(o).expect("terms of a right action share their exponent")
    }
}

/// `Σ_k coeffs[k] ŷ^k` at background charge `q`.
#[derive(Clone, Debug)]
pub struct DiffOp<C: DiffRing> {
    q: C::Scalar,
    coeffs: Vec<C>,
}

impl<C: DiffRing> PartialEq for DiffOp<C> {
    fn eq(&self, o: &Self) -> bool {
        self.q == o.q && self.coeffs == o.coeffs
    }
}

impl<C: DiffRing> DiffOp<C> {
    /// From coefficients in ascending powers of `ŷ`.
    pub fn new(q: C::Scalar, mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DiffOp { q, coeffs }
    }

    pub fn zero(q: C::Scalar) -> Self {
        DiffOp { q, coeffs: Vec::new() }
    }

    /// Multiplication by `f`.
    pub fn function(q: C::Scalar, f: C) -> Self {
        Self::new(q, vec![f])
    }

    pub fn yhat(q: C::Scalar) -> Self {
        Self::new(q, vec![C::zero(), C::one()])
    }

    /// `ŷ - f`.
    pub fn yhat_minus(q: C::Scalar, f: &C) -> Self {
        Self::new(q, vec![-f.clone(), C::one()])
    }

    pub fn q(&self) -> &C::Scalar {
        &self.q
    }

    /// Coefficients in ascending powers of `ŷ`.
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `ŷ^k`.
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.q.clone(), (0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.q.clone(), (0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    /// `f ∘ self`.
    pub fn left_mul(&self, f: &C) -> Self {
        Self::new(self.q.clone(), self.coeffs.iter().map(|c| f.clone() * c).collect())
    }

    /// Normal form of `ŷ^p ∘ f`: `Σ_k binom(p,k) Q^k f^{(k)} ŷ^{p-k}`.
    pub fn leibniz_push(q: &C::Scalar, p: usize, f: &C) -> Self {
        let mut coeffs = vec![C::zero(); p + 1];
        let mut fk = f.clone();
        let mut qk = C::Scalar::one();
        for k in 0..=p {
            let b: C::Scalar = binom(p as u32, k as u32);
            coeffs[p - k] = fk.scale_by(&(b * &qk));
            if k < p {
                fk = fk.deriv();
                qk = qk * q;
            }
        }
        Self::new(q.clone(), coeffs)
    }

    /// Product in normal form.
    pub fn mul(&self, o: &Self) -> Self {
        assert!(self.q == o.q, "operators with different background charge");
        let (Some(da), Some(db)) = (self.degree(), o.degree()) else {
            return Self::zero(self.q.clone());
        };
        let mut out = vec![C::zero(); da + db + 1];
        // Derivatives of o's coefficients, scaled by Q^k, up to order da.
        let mut ders: Vec<Vec<C>> = Vec::with_capacity(o.coeffs.len());
        for b in &o.coeffs {
            let mut v = Vec::with_capacity(da + 1);
            let mut f = b.clone();
            let mut qk = C::Scalar::one();
            for k in 0..=da {
                v.push(if b.is_zero() { C::zero() } else { f.scale_by(&qk) });
                if k < da && !b.is_zero() {
                    f = f.deriv();
                    qk = qk * &self.q;
                }
            }
            ders.push(v);
        }
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, dj) in ders.iter().enumerate() {
                for k in 0..=i {
                    let t = &dj[k];
                    if t.is_zero() {
                        continue;
                    }
                    let b: C::Scalar = binom(i as u32, k as u32);
                    let term = (a.clone() * t).scale_by(&b);
                    let slot = &mut out[i - k + j];
                    *slot = slot.clone() + term;
                }
            }
        }
        Self::new(self.q.clone(), out)
    }

    /// Right action `ψ · Σ c_k ŷ^k = Σ (-Q∂)^k (c_k ψ)`.
    pub fn right_act<M: DModule<C>>(&self, psi: &M) -> M {
        let mq = -self.q.clone();
        let mut acc: Option<M> = None;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut t = psi.times(c);
            for _ in 0..k {
                t = t.d().scaled(&mq);
            }
            acc = Some(match acc {
                Some(a) => a.plus(&t),
                None => t,
            });
        }
        acc.unwrap_or_else(|| psi.times(&C::zero()))
    }

    /// Replaces `ŷ` by `y`, treating the coefficients as `Q`-independent.
    pub fn symbol_fixed(&self) -> ClassicalPoly<C> {
        ClassicalPoly::new(self.coeffs.clone())
    }

    pub fn fmt_with(&self, coef: &dyn Fn(&C) -> String) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let y = match k {
                0 => String::new(),
                1 => "yhat".into(),
                k => format!("yhat^{k}"),
            };
            let cs = coef(c);
            parts.push(match (cs.as_str(), y.is_empty()) {
                (_, true) => wrap(&cs),
                ("1", false) => y,
                ("-1", false) => format!("-{y}"),
                _ => format!("{}*{y}", wrap(&cs)),
            });
        }
        crate::poly::join_terms(&parts)
    }
}

fn wrap(s: &str) -> String {
    let inner = s.strip_prefix('-').unwrap_or(s);
    if inner.contains(" + ") || inner.contains(" - ") {
        format!("({s})")
    } else {
        s.to_string()
    }
}

impl<C: DiffRing + fmt::Display> fmt::Display for DiffOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&|c| c.to_string()))
    }
}

/// `(ŷ - Y_1)(ŷ - Y_2)···(ŷ - Y_d)`, multiplied left to right.
pub fn factor_from_y<C: DiffRing>(q: &C::Scalar, ys: &[C]) -> DiffOp<C> {
    ys.iter().fold(DiffOp::function(q.clone(), C::one()), |acc, y| acc.mul(&DiffOp::yhat_minus(q.clone(), y)))
}

/// `U = (ŷ - Y_2)···(ŷ - Y_d)` and whether `(ŷ - Y_1) U` reproduces the full
/// product.
pub fn master_u<C: DiffRing>(q: &C::Scalar, ys: &[C]) -> Result<(DiffOp<C>, bool)> {
    if ys.len() < 2 {
        return Err(Error::Input("master operator needs d >= 2".into()));
    }
    let u = factor_from_y(q, &ys[1..]);
    let lhs = DiffOp::yhat_minus(q.clone(), &ys[0]).mul(&u);
    let ok = lhs == factor_from_y(q, ys);
    Ok((u, ok))
}

/// A polynomial in a commuting variable `y`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalPoly<C> {
    coeffs: Vec<C>,
}

impl<C: Ring> ClassicalPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ClassicalPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::new(Vec::new());
        }
        let mut out = vec![C::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b;
            }
        }
        Self::new(out)
    }

    /// `Π (y - r_μ)` in the given order.
    pub fn from_roots(rs: &[C]) -> Self {
        rs.iter().fold(Self::new(vec![C::one()]), |acc, r| acc.mul(&Self::new(vec![-r.clone(), C::one()])))
    }

    pub fn fmt_with(&self, coef: &dyn Fn(&C) -> String) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let y = match k {
                0 => String::new(),
                1 => "y".into(),
                k => format!("y^{k}"),
            };
            let cs = coef(c);
            parts.push(match (cs.as_str(), y.is_empty()) {
                (_, true) => wrap(&cs),
                ("1", false) => y,
                ("-1", false) => format!("-{y}"),
                _ => format!("{}*{y}", wrap(&cs)),
            });
        }
        crate::poly::join_terms(&parts)
    }
}

/// Sample values of `Q` used for interpolation: `1, 2, 3, …`.
fn q_nodes<S: Field>(n: usize) -> Vec<S> {
    (1..=n as i64).map(S::from_i64).collect()
}

/// Lagrange weights for evaluating at `t` from values at `nodes`.
fn lagrange_weights<S: Field>(nodes: &[S], t: &S) -> Vec<S> {
    (0..nodes.len())
        .map(|i| {
            let mut w = S::one();
            for (j, nj) in nodes.iter().enumerate() {
                if j != i {
                    w = w * (t.clone() - nj) / (nodes[i].clone() - nj);
                }
            }
            w
        })
        .collect()
}

/// Classical symbol of a `Q`-dependent family of operators: `ŷ → y` and
/// `Q → 0`.
///
/// Each coefficient is assumed polynomial in `Q` of degree at most
/// `degree_bound`. It is interpolated from `degree_bound + 1` nonzero values
/// of `Q` and checked at two more; a failed check means the coefficient is
/// not of that form (for instance it has a pole at `Q = 0`).
pub fn symbol<C: DiffRing>(family: &dyn Fn(&C::Scalar) -> DiffOp<C>, degree_bound: usize) -> Result<ClassicalPoly<C>> {
    let nodes: Vec<C::Scalar> = q_nodes(degree_bound + 1);
    let ops: Vec<DiffOp<C>> = nodes.iter().map(|q| family(q)).collect();
    let top = ops.iter().filter_map(|o| o.degree()).max().map_or(0, |d| d + 1);
    let combine = |w: &[C::Scalar], k: usize| -> C {
        ops.iter().zip(w).fold(C::zero(), |acc, (o, wi)| acc + o.coeff(k).scale_by(wi))
    };
    if C::Scalar::EXACT {
        for probe in [Rat::new((-1).into(), 2.into()), Rat::new(7.into(), 3.into())] {
            let t = C::Scalar::from_rat(&probe);
            let w = lagrange_weights(&nodes, &t);
            let actual = family(&t);
            for k in 0..top.max(actual.coeffs().len()) {
                if combine(&w, k) != actual.coeff(k) {
                    return Err(Error::DivergentClassicalLimit(format!(
                        "coefficient of yhat^{k} is not polynomial in Q of degree <= {degree_bound}"
                    )));
                }
            }
        }
    }
    let w0 = lagrange_weights(&nodes, &C::Scalar::zero());
    Ok(ClassicalPoly::new((0..top).map(|k| combine(&w0, k)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffsym::Var;
    use crate::field::rat;
    use crate::poly::Poly;

    fn j(i: u16) -> DiffPoly {
        DiffPoly::var(Var::j(i))
    }

    #[test]
    fn leibniz_small_cases() {
        let q = rat(3, 2);
        let f = j(1);
        let p1 = DiffOp::leibniz_push(&q, 1, &f);
        assert_eq!(p1.coeffs(), &[f.derivative().scale(&q), f.clone()]);
        let p2 = DiffOp::leibniz_push(&q, 2, &f);
        let expect = vec![
            f.derivative().derivative().scale(&(q.clone() * &q)),
            f.derivative().scale(&(q.clone() * Rat::from_i64(2))),
            f.clone(),
        ];
        assert_eq!(p2.coeffs(), expect.as_slice());
        assert_eq!(DiffOp::leibniz_push(&q, 0, &f).coeffs(), &[f]);
    }

    #[test]
    fn two_factor_product() {
        let q = rat(2, 5);
        let e = factor_from_y(&q, &[j(1), j(2)]);
        let c0 = j(1) * j(2) - j(2).derivative().scale(&q);
        assert_eq!(e.coeffs(), &[c0, -(j(1) + j(2)), DiffPoly::one()]);
    }

    #[test]
    fn hermite_operator_annihilates_ground_state() {
        let q = Rat::one();
        let x = RatFunc::<Rat>::x();
        let inv = RatFunc::one() / x.clone();
        let y1 = x.clone() - inv.clone();
        let e = factor_from_y(&q, &[y1.clone(), -y1]);
        let three = RatFunc::constant(Rat::from_i64(3));
        assert_eq!(e.coeffs(), &[three - x.clone() * &x, RatFunc::zero(), RatFunc::one()]);
        let psi = QuasiRational::with_exponent(x.clone(), -x);
        assert!(e.right_act(&psi).is_zero());
    }

    #[test]
    fn symbol_drops_quantum_terms() {
        let x = RatFunc::<Rat>::from_poly(Poly::x());
        let fam = |q: &Rat| {
            let y1 = x.scale(q);
            factor_from_y(q, &[y1.clone(), -y1])
        };
        let s = symbol(&fam, 4).unwrap();
        assert_eq!(s.coeffs(), &[RatFunc::zero(), RatFunc::zero(), RatFunc::one()]);
        let bad = |q: &Rat| DiffOp::function(q.clone(), RatFunc::constant(q.inv()));
        assert!(matches!(symbol(&bad, 3), Err(Error::DivergentClassicalLimit(_))));
    }
}
