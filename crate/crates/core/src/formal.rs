//! Identities over formal solutions `ψ_1, …, ψ_d`: Wronskian-type
//! determinants `D_μ = det((-Q∂)^i ψ_{j+1})`, the determinant form of the
//! factorised operator, and the differential Hirota identities.

use crate::diffop::{factor_from_y, DiffOp};
use crate::diffsym::{DiffFrac, DiffPoly, Var};
use crate::field::Rat;
use crate::linalg::{det, minor};

fn psi(j: usize) -> DiffPoly {
    DiffPoly::var(Var::psi(j as u16))
}

/// `(-Q∂)^i f`.
fn minus_q_d(f: &DiffPoly, q: &Rat, i: usize) -> DiffPoly {
    let mq = -q.clone();
    (0..i).fold(f.clone(), |acc, _| acc.derivative().scale(&mq))
}

/// The `μ × μ` matrix `((-Q∂)^i ψ_{cols[j]})`.
fn wronskian_matrix(cols: &[usize], q: &Rat) -> Vec<Vec<DiffPoly>> {
    (0..cols.len()).map(|i| cols.iter().map(|&j| minus_q_d(&psi(j), q, i)).collect()).collect()
}

/// `D_μ` for `μ = 0..=d`, with `D_0 = 1`.
pub fn wronskians(d: usize, q: &Rat) -> Vec<DiffPoly> {
    (0..=d).map(|mu| det(&wronskian_matrix(&(1..=mu).collect::<Vec<_>>(), q))).collect()
}

/// `D̂_μ`: `D_μ` with `ψ_μ` replaced by `ψ_{μ+1}` in the last column.
pub fn wronskian_hat(mu: usize, q: &Rat) -> DiffPoly {
    let mut cols: Vec<usize> = (1..=mu).collect();
    cols[mu - 1] = mu + 1;
    det(&wronskian_matrix(&cols, q))
}

/// `Y_μ = Q ∂ ln(D_{μ-1} / D_μ)` for `μ = 1..=d`.
pub fn sheet_functions(d: usize, q: &Rat) -> Vec<DiffFrac> {
    let ds: Vec<DiffFrac> = wronskians(d, q).into_iter().map(DiffFrac::from_poly).collect();
    let logd = |f: &DiffFrac| f.derivative() / f.clone();
    (1..=d).map(|mu| (logd(&ds[mu - 1]) - logd(&ds[mu])).scale(q)).collect()
}

/// The bordered-determinant operator divided by `D_μ`:
/// `(-1)^μ Σ_i (-1)^i ŷ^i ∘ (M_i / D_μ)`, where `M_i` is the minor of the
/// `(μ+1) × (μ+1)` matrix whose first column is `(1, ŷ, …, ŷ^μ)` and whose
/// other columns are `((-Q∂)^i ψ_j)`.
pub fn bordered_operator(mu: usize, q: &Rat) -> DiffOp<DiffFrac> {
    let cols: Vec<usize> = (1..=mu).collect();
    let big: Vec<Vec<DiffPoly>> = (0..=mu)
        .map(|i| std::iter::once(DiffPoly::zero()).chain(cols.iter().map(|&j| minus_q_d(&psi(j), q, i))).collect())
        .collect();
    let dmu = DiffFrac::from_poly(det(&wronskian_matrix(&cols, q)));
    let mut acc = DiffOp::zero(q.clone());
    for i in 0..=mu {
        let m = DiffFrac::from_poly(det(&minor(&big, i, 0))) / dmu.clone();
        let term = DiffOp::leibniz_push(q, i, &m);
        acc = if (i + mu) % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Checks `(ŷ - Y_1)···(ŷ - Y_μ) = bordered_operator(μ)` for `μ = 1..=d` and
/// that every `ψ_ν`, `ν ≤ μ`, is annihilated by the product.
pub fn determinant_factorization_check(d: usize, q: &Rat) -> bool {
    let ys = sheet_functions(d, q);
    (1..=d).all(|mu| {
        let prod = factor_from_y(q, &ys[..mu]);
        if prod != bordered_operator(mu, q) {
            return false;
        }
        (1..=mu).all(|nu| prod.right_act(&DiffFrac::from_poly(psi(nu))).is_zero())
    })
}

/// Checks `D_{μ-1} D_{μ+1} = D_μ (-Q∂D̂_μ) - D̂_μ (-Q∂D_μ)` for
/// `μ = 1..d-1`.
pub fn hirota_determinant_check(d: usize, q: &Rat) -> bool {
    let ds = wronskians(d, q);
    (1..d).all(|mu| {
        let hat = wronskian_hat(mu, q);
        let lhs = ds[mu - 1].clone() * &ds[mu + 1];
        let rhs = ds[mu].clone() * minus_q_d(&hat, q, 1) - hat * minus_q_d(&ds[mu], q, 1);
        lhs == rhs
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rat, Ring};

    #[test]
    fn first_factor() {
        let q = rat(2, 3);
        let op = bordered_operator(1, &q);
        let p1 = DiffFrac::var(Var::psi(1));
        let expect = DiffOp::new(q.clone(), vec![(p1.derivative() / p1).scale(&q), DiffFrac::one()]);
        assert_eq!(op, expect);
    }

    #[test]
    fn small_identities() {
        for q in [rat(1, 1), rat(-3, 2)] {
            assert!(determinant_factorization_check(2, &q));
            assert!(hirota_determinant_check(3, &q));
        }
    }

    #[test]
    fn d3_factorization() {
        assert!(determinant_factorization_check(3, &rat(1, 2)));
    }

    #[test]
    fn hirota_needs_the_minus_q_factor() {
        let q = rat(1, 2);
        let ds = wronskians(2, &q);
        let hat = wronskian_hat(1, &q);
        let plain = ds[1].clone() * hat.derivative() - hat * ds[1].derivative();
        assert_ne!(ds[0].clone() * &ds[2], plain);
    }
}
