//! JSON forms of curve files, kernels and correlator tables.
//!
//! Sheets are 1-based in every file. Exact rationals are strings `"p/q"`;
//! complex floats are `["re", "im"]` decimal strings, and documents written
//! on that backend carry `precision_bits`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bergman::SheetedKernel;
use crate::curve::{BetheRoot, QuantumCurve};
use crate::error::{Error, Result};
use crate::field::{default_precision, parse_decimal_rat, rat_to_string, BigFloat, Complex, Field, Rat, Ring};
use crate::parse::{parse_ratfunc, parse_scalar};
use crate::polesum::{Basis, PoleSum};
use crate::poly::Poly;
use crate::ratfunc::RatFunc;
use crate::recursion::{CorrelatorTable, SignConvention};
use crate::report::same_point;

/// A backend scalar that can be written to and read from JSON.
pub trait Scalar: Field {
    /// Name of the backend, as used on the command line.
    const BACKEND: &'static str;

    fn to_json(&self) -> Value;

    /// Parses a JSON string (an expression), number, or backend-native form.
    fn from_json(v: &Value) -> Result<Self>;

    /// Named constants available in expressions besides `Q`.
    fn constants() -> Vec<(&'static str, Self)> {
        Vec::new()
    }

    /// Precision tag for written documents.
    fn precision_bits() -> Option<u32> {
        None
    }

    fn text(&self) -> String {
        match self.to_json() {
            Value::String(s) => s,
            v => v.to_string(),
        }
    }
}

fn number_text(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl Scalar for Rat {
    const BACKEND: &'static str = "exact";

    fn to_json(&self) -> Value {
        Value::String(rat_to_string(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_scalar(s, &[]),
            Value::Number(_) => {
                let t = number_text(v).unwrap_or_default();
                parse_decimal_rat(&t).ok_or_else(|| Error::Input(format!("bad number {t}")))
            }
            _ => Err(Error::Input(format!("expected a rational, got {v}"))),
        }
    }
}

impl Scalar for Complex {
    const BACKEND: &'static str = "f256";

    fn to_json(&self) -> Value {
        let [re, im] = self.to_strings();
        Value::Array(vec![Value::String(re), Value::String(im)])
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                let re = Self::from_json(&parts[0])?;
                let im = Self::from_json(&parts[1])?;
                Ok(re + im * imaginary_unit())
            }
            Value::String(s) => parse_scalar(s, &Self::constants()),
            Value::Number(_) => {
                let t = number_text(v).unwrap_or_default();
                let r = parse_decimal_rat(&t).ok_or_else(|| Error::Input(format!("bad number {t}")))?;
                Ok(Complex::from_rat(&r))
            }
            _ => Err(Error::Input(format!("expected a complex number, got {v}"))),
        }
    }

    fn constants() -> Vec<(&'static str, Self)> {
        vec![("I", imaginary_unit())]
    }

    fn precision_bits() -> Option<u32> {
        Some(default_precision())
    }
}

fn imaginary_unit() -> Complex {
    let p = default_precision();
    Complex::new(BigFloat::from_rat_prec(&Rat::zero(), p), BigFloat::from_rat_prec(&Rat::one(), p))
}

fn json_error(what: &str, e: serde_json::Error) -> Error {
    Error::Input(format!("{what}: {e}"))
}

/// Curve file as read from disk.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "Q")]
    pub q: Value,
    pub builder: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<String>,
    #[serde(default, rename = "q", skip_serializing_if = "Option::is_none")]
    pub q_poly: Option<String>,
    #[serde(default, rename = "Y", skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bethe: Option<Vec<BetheSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punctures: Option<Vec<Value>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BetheSpec {
    pub s: Value,
    pub mu: usize,
}

fn required<'a, T>(v: &'a Option<T>, field: &str, builder: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Input(format!("curve file: builder \"{builder}\" requires field \"{field}\"")))
}

fn field_expr<F: Scalar>(src: &str, var: &str, q: &F, field: &str) -> Result<RatFunc<F>> {
    let mut consts = vec![("Q", q.clone())];
    consts.extend(F::constants());
    parse_ratfunc(src, var, &consts).map_err(|e| Error::Input(format!("curve file field \"{field}\": {e}")))
}

impl CurveSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| json_error("curve file", e))
    }

    pub fn build<F: Scalar>(&self) -> Result<QuantumCurve<F>> {
        let q = F::from_json(&self.q).map_err(|e| Error::Input(format!("curve file field \"Q\": {e}")))?;
        let b = self.builder.as_str();
        let curve = match b {
            "quasi_poly" => {
                let pp = field_expr(required(&self.p_prime, "p_prime", b)?, "x", &q, "p_prime")?;
                let qp = field_expr(required(&self.q_poly, "q", b)?, "x", &q, "q")?;
                if !qp.is_polynomial() {
                    return Err(Error::Input("curve file field \"q\": not a polynomial".into()));
                }
                let lead = qp.denom().coeff(0);
                let qp = Poly::new(qp.numer().coeffs().iter().map(|c| c.clone() / &lead).collect());
                QuantumCurve::from_quasi_poly(&pp, &qp, q)?
            }
            "wronskian" => {
                let psi = required(&self.psi, "psi", b)?
                    .iter()
                    .enumerate()
                    .map(|(i, s)| field_expr(s, "x", &q, &format!("psi[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                QuantumCurve::from_wronskian(&psi, q)?
            }
            "raw_Y" => {
                let y = required(&self.y, "Y", b)?
                    .iter()
                    .enumerate()
                    .map(|(i, s)| field_expr(s, "x", &q, &format!("Y[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let bethe = required(&self.bethe, "bethe", b)?
                    .iter()
                    .map(|r| Ok(BetheRoot { s: F::from_json(&r.s)?, mu: r.mu }))
                    .collect::<Result<Vec<_>>>()?;
                let punct = match &self.punctures {
                    None => None,
                    Some(ps) => Some(ps.iter().map(F::from_json).collect::<Result<Vec<_>>>()?),
                };
                QuantumCurve::from_raw_y(q, y, bethe, punct)?
            }
            other => {
                return Err(Error::Input(format!(
                    "curve file field \"builder\": unknown builder \"{other}\" (expected quasi_poly, wronskian or raw_Y)"
                )))
            }
        };
        if let Some(d) = self.d {
            if d != curve.d {
                return Err(Error::Input(format!("curve file field \"d\": declared {d}, curve has {} sheets", curve.d)));
            }
        }
        Ok(curve)
    }
}

/// Reads a curve file from JSON text.
pub fn read_curve<F: Scalar>(text: &str) -> Result<QuantumCurve<F>> {
    CurveSpec::parse(text)?.build()
}

/// One basis function: a pole `1/(x - s)^order` or a monomial `x^power`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum BasisJson {
    Pole { s: Value, order: u32 },
    Mono { power: u32 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub basis: Vec<BasisJson>,
    pub c: Value,
}

fn basis_to_json<F: Scalar>(b: &Basis, roots: &[F]) -> BasisJson {
    match b {
        Basis::Pole { root, order } => BasisJson::Pole { s: roots[*root].to_json(), order: *order },
        Basis::Mono(k) => BasisJson::Mono { power: *k },
    }
}

fn root_index<F: Scalar>(s: &F, roots: &[F]) -> Result<usize> {
    roots
        .iter()
        .position(|r| same_point(r, s))
        .ok_or_else(|| Error::Input(format!("pole at {} is not a Bethe root of the curve", s.display())))
}

fn basis_from_json<F: Scalar>(b: &BasisJson, roots: &[F]) -> Result<Basis> {
    Ok(match b {
        BasisJson::Pole { s, order } => {
            if *order == 0 {
                return Err(Error::Input("pole of order 0".into()));
            }
            Basis::pole(root_index(&F::from_json(s)?, roots)?, *order)
        }
        BasisJson::Mono { power } => Basis::Mono(*power),
    })
}

pub fn polesum_to_json<F: Scalar>(p: &PoleSum<F>, roots: &[F]) -> Vec<TermJson> {
    p.terms()
        .map(|(k, c)| TermJson { basis: k.iter().map(|b| basis_to_json(b, roots)).collect(), c: c.to_json() })
        .collect()
}

pub fn polesum_from_json<F: Scalar>(terms: &[TermJson], roots: &[F], slots: usize) -> Result<PoleSum<F>> {
    let mut p = PoleSum::zero();
    for t in terms {
        if t.basis.len() != slots {
            return Err(Error::Input(format!("term with {} basis functions, expected {slots}", t.basis.len())));
        }
        let key = t.basis.iter().map(|b| basis_from_json(b, roots)).collect::<Result<Vec<_>>>()?;
        p.add_term(key, F::from_json(&t.c)?);
    }
    Ok(p)
}

/// A function of `x0`: a rational-function string, or pole-sum terms.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Text(String),
    Terms(Vec<TermJson>),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPole {
    pub s: Value,
    pub order: u32,
    pub coeff: CoeffJson,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPower {
    pub power: u32,
    pub coeff: CoeffJson,
}

/// `G[i0][mu](x0, x) = -pair/(x - x0) + Σ coeff(x0)/(x - s)^order + Σ coeff(x0) x^power`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub i0: usize,
    pub mu: usize,
    pub pair: Value,
    pub poles: Vec<KernelPole>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poly: Vec<KernelPower>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    pub roots: Vec<Value>,
    pub entries: Vec<KernelEntry>,
}

fn coeff_to_json<F: Scalar>(p: &PoleSum<F>, roots: &[F]) -> CoeffJson {
    if F::EXACT {
        CoeffJson::Text(p.to_ratfunc(roots).fmt_with("x0", &|c: &F| c.text()))
    } else {
        CoeffJson::Terms(polesum_to_json(p, roots))
    }
}

fn coeff_from_json<F: Scalar>(c: &CoeffJson, roots: &[F]) -> Result<PoleSum<F>> {
    match c {
        CoeffJson::Text(s) => {
            let f: RatFunc<F> = parse_ratfunc(s, "x0", &F::constants())?;
            PoleSum::from_ratfunc(&f, roots)
        }
        CoeffJson::Terms(t) => polesum_from_json(t, roots, 1),
    }
}

pub fn kernel_to_json<F: Scalar>(k: &SheetedKernel<F>) -> KernelFile {
    let mut entries = Vec::new();
    for i0 in 0..k.d {
        for mu in 0..k.d {
            let mut poles: BTreeMap<Basis, PoleSum<F>> = BTreeMap::new();
            for (key, c) in k.regular[i0][mu].terms() {
                let e = poles.entry(key[1]).or_default();
                e.add_term(vec![key[0]], c.clone());
            }
            let mut pole_list = Vec::new();
            let mut poly = Vec::new();
            for (b, coeff) in &poles {
                let coeff = coeff_to_json(coeff, &k.roots);
                match b {
                    Basis::Pole { root, order } => pole_list.push(KernelPole { s: k.roots[*root].to_json(), order: *order, coeff }),
                    Basis::Mono(p) => poly.push(KernelPower { power: *p, coeff }),
                }
            }
            entries.push(KernelEntry { i0: i0 + 1, mu: mu + 1, pair: k.pair(i0, mu).to_json(), poles: pole_list, poly });
        }
    }
    KernelFile { d: k.d, precision_bits: F::precision_bits(), roots: k.roots.iter().map(|r| r.to_json()).collect(), entries }
}

/// Reads a kernel for `curve`. Entries not listed have no regular part.
pub fn kernel_from_json<F: Scalar>(f: &KernelFile, curve: &QuantumCurve<F>) -> Result<SheetedKernel<F>> {
    let d = curve.d;
    if f.d != d {
        return Err(Error::Input(format!("kernel has d = {}, curve has d = {d}", f.d)));
    }
    let roots = curve.root_points();
    for r in &f.roots {
        root_index(&F::from_json(r)?, &roots)?;
    }
    let mut k = SheetedKernel::decoupled(curve);
    for e in &f.entries {
        if e.i0 == 0 || e.i0 > d || e.mu == 0 || e.mu > d {
            return Err(Error::Input(format!("kernel entry (i0 = {}, mu = {}) out of range 1..={d}", e.i0, e.mu)));
        }
        let pair = F::from_json(&e.pair)?;
        if !same_point(&pair, &curve.pair(e.i0 - 1, e.mu - 1)) {
            return Err(Error::Input(format!(
                "kernel entry (i0 = {}, mu = {}): diagonal coefficient {} differs from {}",
                e.i0,
                e.mu,
                pair.display(),
                curve.pair(e.i0 - 1, e.mu - 1).display()
            )));
        }
        let mut reg = PoleSum::zero();
        for p in &e.poles {
            let b = basis_from_json(&BasisJson::Pole { s: p.s.clone(), order: p.order }, &roots)?;
            reg = reg.add(&coeff_from_json(&p.coeff, &roots)?.tensor(&PoleSum::term(vec![b], F::one())));
        }
        for p in &e.poly {
            reg = reg.add(&coeff_from_json(&p.coeff, &roots)?.tensor(&PoleSum::term(vec![Basis::Mono(p.power)], F::one())));
        }
        k.regular[e.i0 - 1][e.mu - 1] = reg;
    }
    Ok(k)
}

pub fn read_kernel<F: Scalar>(text: &str, curve: &QuantumCurve<F>) -> Result<SheetedKernel<F>> {
    let f: KernelFile = serde_json::from_str(text).map_err(|e| json_error("kernel", e))?;
    kernel_from_json(&f, curve)
}

/// Key `W_g_n[s1,…,sn]` with 1-based sheets.
pub fn entry_key(g: usize, n: usize, sheets: &[usize]) -> String {
    let s: Vec<String> = sheets.iter().map(|j| (j + 1).to_string()).collect();
    format!("W_{g}_{n}[{}]", s.join(","))
}

fn parse_entry_key(k: &str) -> Result<(usize, usize, Vec<usize>)> {
    let bad = || Error::Input(format!("bad table key \"{k}\""));
    let rest = k.strip_prefix("W_").ok_or_else(bad)?;
    let (head, sheets) = rest.split_once('[').ok_or_else(bad)?;
    let sheets = sheets.strip_suffix(']').ok_or_else(bad)?;
    let (g, n) = head.split_once('_').ok_or_else(bad)?;
    let g: usize = g.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    let sheets = sheets
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<usize>().ok().filter(|&j| j > 0).map(|j| j - 1).ok_or_else(bad))
        .collect::<Result<Vec<_>>>()?;
    if sheets.len() != n {
        return Err(bad());
    }
    Ok((g, n, sheets))
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SampleJson {
    pub at: Vec<Value>,
    pub value: Value,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub display: String,
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleJson>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub d: usize,
    pub chi_max: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    pub convention: String,
    pub entries: BTreeMap<String, EntryJson>,
}

/// Correlator tables, with evaluations at the first `n` sample points for
/// each entry with `n` slots.
pub fn table_to_json<F: Scalar>(
    table: &CorrelatorTable<F>,
    curve: &QuantumCurve<F>,
    conv: SignConvention,
    samples: &[Vec<F>],
) -> TableFile {
    let roots = curve.root_points();
    let mut entries = BTreeMap::new();
    for (g, n) in table.keys() {
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        for (sheets, w) in table.get(g, n).into_iter().flatten() {
            let samples = samples
                .iter()
                .filter(|p| p.len() >= n)
                .filter_map(|p| {
                    let at = &p[..n];
                    w.eval(&roots, at).map(|v| SampleJson { at: at.iter().map(|a| a.to_json()).collect(), value: v.to_json() })
                })
                .collect();
            entries.insert(
                entry_key(g, n, sheets),
                EntryJson { display: w.fmt_with(&names, &roots), terms: polesum_to_json(w, &roots), samples },
            );
        }
    }
    TableFile {
        d: table.d,
        chi_max: table.chi_max,
        precision_bits: F::precision_bits(),
        convention: conv.label(),
        entries,
    }
}

pub fn table_from_json<F: Scalar>(f: &TableFile, curve: &QuantumCurve<F>) -> Result<CorrelatorTable<F>> {
    if f.d != curve.d {
        return Err(Error::Input(format!("table has d = {}, curve has d = {}", f.d, curve.d)));
    }
    let roots = curve.root_points();
    let mut by_gn: BTreeMap<(usize, usize), BTreeMap<Vec<usize>, PoleSum<F>>> = BTreeMap::new();
    for (k, e) in &f.entries {
        let (g, n, sheets) = parse_entry_key(k)?;
        if sheets.iter().any(|&j| j >= curve.d) {
            return Err(Error::Input(format!("table key \"{k}\" has a sheet above {}", curve.d)));
        }
        by_gn.entry((g, n)).or_default().insert(sheets, polesum_from_json(&e.terms, &roots, n)?);
    }
    let mut t = CorrelatorTable::new(f.d, f.chi_max);
    for ((g, n), m) in by_gn {
        t.insert(g, n, m);
    }
    Ok(t)
}

pub fn read_table<F: Scalar>(text: &str, curve: &QuantumCurve<F>) -> Result<CorrelatorTable<F>> {
    let f: TableFile = serde_json::from_str(text).map_err(|e| json_error("table", e))?;
    table_from_json(&f, curve)
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{solve_g_ansatz, AnsatzOptions};
    use crate::recursion::{recurse, RecursionOptions};

    const HERMITE: &str = r#"{"d": 2, "Q": "1", "builder": "quasi_poly", "p_prime": "-x", "q": "x"}"#;

    #[test]
    fn curve_file_errors_name_the_field() {
        let e = read_curve::<Rat>(r#"{"builder": "quasi_poly", "p_prime": "-x", "q": "x"}"#).unwrap_err();
        assert!(e.to_string().contains("missing field `Q`"), "{e}");
        let e = read_curve::<Rat>(r#"{"Q": "1", "builder": "quasi_poly", "q": "x"}"#).unwrap_err();
        assert!(e.to_string().contains("p_prime"), "{e}");
        let e = read_curve::<Rat>(r#"{"Q": "1", "builder": "quasi_poly", "p_prime": "-x", "q": "1/x"}"#).unwrap_err();
        assert!(e.to_string().contains("\"q\""), "{e}");
    }

    #[test]
    fn kernel_and_table_roundtrip() {
        let c: QuantumCurve<Rat> = read_curve(HERMITE).unwrap();
        let k = solve_g_ansatz(&c, &AnsatzOptions::default()).unwrap().kernel;
        let text = to_pretty(&kernel_to_json(&k));
        let back = read_kernel(&text, &c).unwrap();
        assert_eq!(back.regular, k.regular);
        let t = recurse(&c, &k, 1, &RecursionOptions::default()).unwrap();
        let file = table_to_json(&t, &c, SignConvention::RESOLVED, &[]);
        let back = read_table(&to_pretty(&file), &c).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn complex_scalars_roundtrip() {
        let z = Complex::from_rat(&crate::field::rat(1, 3)) + imaginary_unit() * Complex::from_i64(2);
        let back = Complex::from_json(&z.to_json()).unwrap();
        assert!((back - &z).magnitude() < 1e-70);
        assert_eq!(entry_key(1, 2, &[0, 1]), "W_1_2[1,2]");
        assert_eq!(parse_entry_key("W_1_2[1,2]").unwrap(), (1, 2, vec![0, 1]));
    }
}
