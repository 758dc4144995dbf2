//! The quantum Miura transform `Ê = (ŷ - J_1)···(ŷ - J_d)` and its
//! generators `W^{(k)}`.

use crate::diffop::{factor_from_y, symbol, ClassicalPoly, DiffOp};
use crate::diffsym::{DiffPoly, Var};
use crate::field::{binom, Rat, Ring};

/// Formal currents `J_1, …, J_d`.
pub fn currents(d: usize) -> Vec<DiffPoly> {
    (1..=d as u16).map(|i| DiffPoly::var(Var::j(i))).collect()
}

/// Sets `J_d = -(J_1 + … + J_{d-1})`.
pub fn impose_trace_free(p: &DiffPoly, d: usize) -> DiffPoly {
    let d16 = d as u16;
    p.substitute(
        &|v: Var| {
            if v.index == d16 {
                (1..d16).fold(DiffPoly::zero(), |acc, i| acc - DiffPoly::var(Var::j(i).derived(v.order)))
            } else {
                DiffPoly::var(v)
            }
        },
        &|c: &Rat| DiffPoly::constant(c.clone()),
    )
}

/// `Ê` by direct noncommutative expansion.
pub fn build_e(js: &[DiffPoly], q: &Rat) -> DiffOp<DiffPoly> {
    factor_from_y(q, js)
}

/// `W^{(k)}` read off `Ê = Σ (-1)^k W^{(k)} ŷ^{d-k}`.
pub fn w_from_expansion(e: &DiffOp<DiffPoly>, k: usize) -> DiffPoly {
    let d = e.degree().unwrap_or(0);
    let c = e.coeff(d - k);
    if k % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `W^{(k)}` from the closed formula
///
/// `Σ_p (-Q)^{k-p} Σ_{i_1<…<i_p} Σ_{q} Π_l binom(i_l - i_{l-1} - 1, q_l)
///  ∂^{q_1}(J_{i_1} ∂^{q_2}(J_{i_2} ··· ∂^{q_p} J_{i_p}))`
///
/// with `i_0 = 0` and `p + Σ q_l = k`. The index set is the unconstrained
/// one; a lower bound `k ≤ i_p` would only remove vanishing terms.
pub fn w_closed_form(k: usize, js: &[DiffPoly], q: &Rat) -> DiffPoly {
    let d = js.len();
    let mut total = DiffPoly::zero();
    for p in 1..=k.min(d) {
        let sign_q = Ring::pow(&-q.clone(), (k - p) as u32);
        let mut part = DiffPoly::zero();
        for idx in increasing_tuples(d, p) {
            let gaps: Vec<usize> = idx.iter().enumerate().map(|(l, &i)| i - if l == 0 { 0 } else { idx[l - 1] } - 1).collect();
            for qs in compositions(k - p, &gaps) {
                let mut w = Rat::one();
                for (g, ql) in gaps.iter().zip(&qs) {
                    w = w * binom::<Rat>(*g as u32, *ql as u32);
                }
                if w.is_zero() {
                    continue;
                }
                let mut inner = js[idx[p - 1] - 1].nth_derivative(qs[p - 1] as u32);
                for l in (0..p - 1).rev() {
                    inner = (js[idx[l] - 1].clone() * inner).nth_derivative(qs[l] as u32);
                }
                part = part + inner.scale(&w);
            }
        }
        total = total + part.scale(&sign_q);
    }
    total
}

/// `1 ≤ i_1 < … < i_p ≤ d`.
fn increasing_tuples(d: usize, p: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=d {
            cur.push(i);
            go(i + 1, d, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, d, p, &mut Vec::new(), &mut out);
    out
}

/// Tuples `0 ≤ q_l ≤ caps[l]` summing to `total`.
fn compositions(total: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    fn go(l: usize, left: usize, caps: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if l == caps.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for ql in 0..=caps[l].min(left) {
            cur.push(ql);
            go(l + 1, left - ql, caps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, total, caps, &mut Vec::new(), &mut out);
    out
}

/// `Q`-graded form of `W^{(k)}`: computed at `Q = 1`, each monomial carries
/// `Q` to the power of its derivative weight.
pub fn w_graded(k: usize, d: usize) -> DiffPoly {
    w_closed_form(k, &currents(d), &Rat::one())
}

/// First disagreement found by [`cross_validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct MiuraMismatch {
    pub q: Rat,
    pub k: usize,
    pub closed_form: DiffPoly,
    pub expansion: DiffPoly,
}

/// Summary of a cross-validation run.
#[derive(Clone, Debug, PartialEq)]
pub struct MiuraReport {
    pub d: usize,
    pub q_values: Vec<Rat>,
    pub mismatch: Option<MiuraMismatch>,
}

impl MiuraReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// `d + 2` distinct nonzero rational values of `Q`.
pub fn certification_q_values(d: usize) -> Vec<Rat> {
    (0..d + 2).map(|i| Rat::new((2 * i as i64 + 1).into(), (i as i64 + 2).into()) * Rat::from_i64(if i % 2 == 0 { 1 } else { -1 })).collect()
}

/// Compares the closed formula with the expansion of `Ê` for every `k ≤ d`
/// at each value of `Q`.
pub fn cross_validate(d: usize, q_values: &[Rat]) -> MiuraReport {
    let js = currents(d);
    for q in q_values {
        let e = build_e(&js, q);
        for k in 1..=d {
            let closed = w_closed_form(k, &js, q);
            let expansion = w_from_expansion(&e, k);
            if closed != expansion {
                return MiuraReport {
                    d,
                    q_values: q_values.to_vec(),
                    mismatch: Some(MiuraMismatch { q: q.clone(), k, closed_form: closed, expansion }),
                };
            }
        }
    }
    MiuraReport { d, q_values: q_values.to_vec(), mismatch: None }
}

/// Elementary symmetric polynomial `e_k(J_1, …, J_d)`.
pub fn elementary_symmetric(k: usize, js: &[DiffPoly]) -> DiffPoly {
    increasing_tuples(js.len(), k)
        .into_iter()
        .fold(DiffPoly::zero(), |acc, idx| acc + idx.iter().fold(DiffPoly::one(), |m, &i| m * &js[i - 1]))
}

/// `symbol(Ê)` and `Π (y - J_i)`, whose coefficients are the signed
/// elementary symmetric polynomials.
pub fn symbol_and_classical(d: usize) -> crate::error::Result<(ClassicalPoly<DiffPoly>, ClassicalPoly<DiffPoly>)> {
    let js = currents(d);
    let fam = |q: &Rat| build_e(&js, q);
    let s = symbol(&fam, d)?;
    let coeffs = (0..=d)
        .map(|i| {
            let k = d - i;
            let e = elementary_symmetric(k, &js);
            if k % 2 == 1 {
                -e
            } else {
                e
            }
        })
        .collect();
    Ok((s, ClassicalPoly::new(coeffs)))
}

/// The reference display of `Ê` for `d = 2` or `d = 3`, transcribed term
/// by term. For `d = 2` with `trace_free`, the second line `J_2 = -J_1`.
pub fn reference_e(d: usize, q: &Rat, trace_free: bool) -> Option<DiffOp<DiffPoly>> {
    let js = currents(d);
    let j = |i: usize| js[i - 1].clone();
    let dj = |i: usize, k: u32| js[i - 1].nth_derivative(k);
    let one = DiffPoly::one();
    let coeffs = match (d, trace_free) {
        (2, false) => vec![j(1) * &j(2) - dj(2, 1).scale(q), -(j(1) + &j(2)), one],
        (2, true) => vec![-(j(1) * &j(1)) + dj(1, 1).scale(q), DiffPoly::zero(), one],
        (3, false) => {
            let q2 = q.clone() * q;
            vec![
                dj(3, 2).scale(&q2) + ((j(1) + &j(2)) * &dj(3, 1)).scale(q) + (dj(2, 1) * &j(3)).scale(q),
                j(1) * &j(2) + j(2) * &j(3) + j(1) * &j(3) - dj(2, 1).scale(q) - dj(3, 1).scale(&(q.clone() * Rat::from_i64(2))),
                -(j(1) + &j(2) + &j(3)),
                one,
            ]
        }
        _ => return None,
    };
    Some(DiffOp::new(q.clone(), coeffs))
}

/// The reference `W^{(2)} = Σ_{i<j} J_i J_j - Q Σ_{i≥2} (i-1) ∂J_i`.
pub fn reference_w2(js: &[DiffPoly], q: &Rat) -> DiffPoly {
    let d = js.len();
    let mut w = DiffPoly::zero();
    for i in 0..d {
        for j in i + 1..d {
            w = w + js[i].clone() * &js[j];
        }
    }
    for i in 2..=d {
        w = w - js[i - 1].derivative().scale(&(q.clone() * Rat::from_i64(i as i64 - 1)));
    }
    w
}

/// The reference `W^{(3)}`: cubic sum, the `Q` sum over `i < j` with
/// `j ≥ 3` of `(j-i-1) J_i ∂J_j + (i-1) ∂(J_i J_j)`, and
/// `Q² Σ_{i≥3} binom(i-1, 2) ∂²J_i`.
pub fn reference_w3(js: &[DiffPoly], q: &Rat) -> DiffPoly {
    let d = js.len();
    let mut w = elementary_symmetric(3, js);
    for j in 3..=d {
        for i in 1..j {
            let a = js[i - 1].clone() * &js[j - 1].derivative();
            let b = (js[i - 1].clone() * &js[j - 1]).derivative();
            let t = a.scale(&Rat::from_i64((j - i - 1) as i64)) + b.scale(&Rat::from_i64(i as i64 - 1));
            w = w - t.scale(q);
        }
    }
    for i in 3..=d {
        w = w + js[i - 1].nth_derivative(2).scale(&(q.clone() * q * binom::<Rat>(i as u32 - 1, 2)));
    }
    w
}

/// `computed - reference` for every power of `ŷ` where they differ.
pub fn reference_e_deviation(d: usize, q: &Rat, trace_free: bool) -> Option<Vec<(usize, DiffPoly)>> {
    let reference = reference_e(d, q, trace_free)?;
    let mut computed = build_e(&currents(d), q);
    if trace_free {
        computed = DiffOp::new(q.clone(), computed.coeffs().iter().map(|c| impose_trace_free(c, d)).collect());
    }
    let top = reference.coeffs().len().max(computed.coeffs().len());
    Some((0..top).filter_map(|k| {
        let diff = computed.coeff(k) - &reference.coeff(k);
        (!diff.is_zero()).then_some((k, diff))
    }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    #[test]
    fn w1_and_w2() {
        let js = currents(3);
        let q = rat(5, 7);
        assert_eq!(w_closed_form(1, &js, &q), js[0].clone() + &js[1] + &js[2]);
        let w2 = js[0].clone() * &js[1] + js[0].clone() * &js[2] + js[1].clone() * &js[2]
            - (js[1].derivative() + js[2].derivative().scale(&Rat::from_i64(2))).scale(&q);
        assert_eq!(w_closed_form(2, &js, &q), w2);
    }

    #[test]
    fn closed_form_matches_expansion() {
        for d in 2..=4 {
            let r = cross_validate(d, &certification_q_values(d));
            assert!(r.passed(), "{:?}", r.mismatch);
        }
    }

    #[test]
    fn trace_free_w1_vanishes() {
        let js = currents(3);
        let w1 = w_closed_form(1, &js, &rat(1, 3));
        assert!(impose_trace_free(&w1, 3).is_zero());
    }

    #[test]
    fn reference_displays() {
        let q = rat(3, 5);
        assert_eq!(reference_e_deviation(2, &q, false).unwrap(), vec![]);
        assert_eq!(reference_e_deviation(2, &q, true).unwrap(), vec![]);
        let dev = reference_e_deviation(3, &q, false).unwrap();
        let js = currents(3);
        let expect = -(js[0].clone() * &js[1] * &js[2]) - js[2].nth_derivative(2).scale(&(q.clone() * &q * rat(2, 1)));
        assert_eq!(dev, vec![(0, expect)]);
        for d in 2..=4 {
            let js = currents(d);
            assert_eq!(reference_w2(&js, &q), w_closed_form(2, &js, &q));
            assert_eq!(reference_w3(&js, &q), w_closed_form(3, &js, &q));
        }
    }

    #[test]
    fn classical_limit() {
        for d in 1..=3 {
            let (s, e) = symbol_and_classical(d).unwrap();
            assert_eq!(s, e);
        }
    }

    #[test]
    fn graded_display() {
        assert_eq!(w_graded(2, 2).fmt_graded("Q"), "J1*J2 - Q*J2'");
    }
}
