//! Bundled curves with their pinned statuses.

use std::path::Path;

use serde::{Deserialize, Serialize};

use qtr::bergman::{solve_g_ansatz, AnsatzOptions};
use qtr::io::{read_curve, to_pretty, Scalar};
use qtr::loopcheck::{check_loop_equations, resolve_convention};
use qtr::recursion::{recurse, RecursionOptions, SignConvention};
use qtr::{Complex, Rat};

use crate::commands::{annihilates, write_file};
use crate::{CliError, Outcome};

pub const MANIFEST: &str = include_str!("../corpus/manifest.json");

pub const FILES: &[(&str, &str)] = &[
    ("hermite_n1", include_str!("../corpus/hermite_n1.json")),
    ("hermite_n1_q23", include_str!("../corpus/hermite_n1_q23.json")),
    ("hermite_n2", include_str!("../corpus/hermite_n2.json")),
    ("trivial", include_str!("../corpus/trivial.json")),
    ("trivial_q34", include_str!("../corpus/trivial_q34.json")),
    ("trivial_wronskian", include_str!("../corpus/trivial_wronskian.json")),
    ("wronskian_d3", include_str!("../corpus/wronskian_d3.json")),
    ("adversarial", include_str!("../corpus/adversarial.json")),
    ("empty_bethe", include_str!("../corpus/empty_bethe.json")),
];

#[derive(Debug, Deserialize)]
struct Manifest {
    curves: Vec<Pinned>,
}

#[derive(Debug, Deserialize)]
struct Pinned {
    name: String,
    backend: String,
    validate: String,
    hirota: String,
    #[serde(default)]
    annihilation: Option<String>,
    recursion: bool,
}

#[derive(Debug, Default, Serialize)]
struct Outcomes {
    name: String,
    validate: String,
    hirota: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    annihilation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convention: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loop_equations: Option<String>,
    matches_pin: bool,
}

fn word(b: bool) -> String {
    if b { "pass" } else { "fail" }.to_string()
}

fn check<F: Scalar>(text: &str, pin: &Pinned) -> Result<(Outcomes, Option<SignConvention>), CliError> {
    let c = read_curve::<F>(text)?;
    let mut o = Outcomes { name: pin.name.clone(), ..Default::default() };
    o.validate = word(c.validate().passed());
    o.hirota = word(c.hirota_residue_check()?.passed());
    o.annihilation = annihilates(&c).map(word);
    let mut conv = None;
    if pin.recursion {
        let k = solve_g_ansatz(&c, &AnsatzOptions::default())?.kernel;
        let resolved = resolve_convention(&c, &k)?;
        let table = recurse(&c, &k, 2, &RecursionOptions { convention: resolved, ..Default::default() })?;
        let (rep, _) = check_loop_equations(&c, &k, &table)?;
        o.convention = Some(resolved.label());
        o.loop_equations = Some(word(rep.passed()));
        conv = Some(resolved);
    }
    o.matches_pin = o.validate == pin.validate
        && o.hirota == pin.hirota
        && (pin.annihilation.is_none() || o.annihilation == pin.annihilation)
        && o.loop_equations.as_deref().map_or(true, |s| s == "pass");
    Ok((o, conv))
}

pub fn run(name: Option<&str>, show: bool, out: Option<&Path>) -> Outcome {
    let manifest: Manifest = serde_json::from_str(MANIFEST).expect("bundled manifest");
    if let Some(n) = name {
        if !FILES.iter().any(|(f, _)| *f == n) {
            let known: Vec<&str> = FILES.iter().map(|(f, _)| *f).collect();
            return Err(CliError::Io(format!("unknown corpus curve \"{n}\"; known: {}", known.join(", "))));
        }
    }
    if show {
        let (_, text) = FILES.iter().find(|(f, _)| Some(*f) == name).expect("checked above");
        match out {
            Some(p) => write_file(p, text)?,
            None => print!("{text}"),
        }
        return Ok(true);
    }
    let mut all = Vec::new();
    let mut conventions = Vec::new();
    for pin in manifest.curves.iter().filter(|p| name.map_or(true, |n| n == p.name)) {
        let (_, text) = FILES.iter().find(|(f, _)| *f == pin.name).expect("manifest names a bundled file");
        let (o, conv) = match pin.backend.as_str() {
            "exact" => check::<Rat>(text, pin)?,
            _ => check::<Complex>(text, pin)?,
        };
        println!(
            "{:<18} validate {:<4} hirota {:<4}{}{}  {}",
            o.name,
            o.validate,
            o.hirota,
            o.annihilation.as_ref().map(|a| format!(" annihilation {a:<4}")).unwrap_or_default(),
            o.convention.as_ref().map(|c| format!(" convention {c}")).unwrap_or_default(),
            if o.matches_pin { "as pinned" } else { "MISMATCH" }
        );
        conventions.extend(conv);
        all.push(o);
    }
    let consistent = conventions.windows(2).all(|w| w[0] == w[1]);
    if !conventions.is_empty() {
        println!(
            "resolved convention {} across {} curves",
            if consistent { "identical" } else { "DIFFERS" },
            conventions.len()
        );
    }
    let ok = consistent && all.iter().all(|o| o.matches_pin);
    if let Some(p) = out {
        write_file(p, &to_pretty(&serde_json::json!({"passed": ok, "curves": all})))?;
    }
    Ok(ok)
}
