//! The `qhahn` command line: flag/config resolution, the command pipelines
//! and report emission.
//!
//! Exit status: 0 when every relation passed, 1 when some relation failed
//! (the report is still written), 2 on input or pipeline errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::exactq::{int, parse_rational, Lattice, Rational};
use crate::families::{
    class1_example, qfreud, qfreud_monomial_coeffs, table1_family, Class1Data, Family,
    FamilyParams, FamilyTag, QFreudData, HORIZON_SLACK,
};
use crate::functional::{
    pearson_moments, reduce_pair, smop_from_moments, OrthoSequence, PearsonPair,
};
use crate::latticepoly::Poly;
use crate::relations::{
    rows, verify_class1, verify_classical_trio, verify_diagonal, verify_first_structure,
    verify_lemma31, verify_lemma31p, verify_prop34, verify_qfreud_second,
    verify_second_structure_classical, verify_thm31, verify_thm34, RelationId, RelationReport,
};
use crate::suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_N: usize = 10;
const DEFAULT_FREUD_N: usize = 12;

#[derive(Parser, Debug)]
#[command(
    name = "qhahn",
    version,
    about = "Exact structure relations on q-linear lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a q-classical family: polynomials, recurrence and table coefficients.
    Family(Flags),
    /// Moments of the source functional.
    Moments(Flags),
    /// Three-term recurrence data of the source sequence.
    Ttrr(Flags),
    /// Verify relations and write one report per relation.
    Verify(Flags),
    /// The q-Freud sequence with its relation reports.
    Freud(Flags),
    /// The class-one example with its relation reports.
    Class1(Flags),
    /// Reduce the source Pearson pair and report the class.
    Reduce(Flags),
    /// Run the full acceptance matrix.
    Suite(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Family(_) => "family",
            Command::Moments(_) => "moments",
            Command::Ttrr(_) => "ttrr",
            Command::Verify(_) => "verify",
            Command::Freud(_) => "freud",
            Command::Class1(_) => "class1",
            Command::Reduce(_) => "reduce",
            Command::Suite(_) => "suite",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Family(f)
            | Command::Moments(f)
            | Command::Ttrr(f)
            | Command::Verify(f)
            | Command::Freud(f)
            | Command::Class1(f)
            | Command::Reduce(f)
            | Command::Suite(f) => f,
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
struct Flags {
    /// big_q_jacobi | q_laguerre | al_salam_carlitz_1 | q_charlier
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c2: Option<String>,
    #[arg(long = "K", allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m1: Option<String>,
    /// JSON coefficient array, constant term first, e.g. '["1","2","3"]'
    #[arg(long)]
    psi: Option<String>,
    /// JSON coefficient array of a monic Φ (default [1])
    #[arg(long)]
    phi: Option<String>,
    /// JSON array of the free Pearson moments
    #[arg(long)]
    free: Option<String>,
    #[arg(long = "N")]
    n: Option<usize>,
    /// σ for DIAGONAL (default: least σ ≤ 2 that passes)
    #[arg(long)]
    sigma: Option<usize>,
    /// Comma-separated relation ids
    #[arg(long)]
    relations: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv
    #[arg(long)]
    format: Option<String>,
    /// JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Inputs after merging the config file and the flags.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c1: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c2: Option<Value>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    k: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m1: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    free: Option<Value>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relations: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<String>,
}

/// An input or pipeline error; always exit status 2.
#[derive(Debug)]
struct Fail(String);

impl From<crate::Error> for Fail {
    fn from(e: crate::Error) -> Self {
        Fail(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Fail>;

fn merge(flags: &Flags) -> CliResult<Inputs> {
    let mut inp: Inputs = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Fail(format!("--config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Fail(format!("--config {}: {e}", path.display())))?
        }
        None => Inputs::default(),
    };
    let s = |v: &Option<String>| v.as_ref().map(|x| Value::String(x.clone()));
    let j = |v: &Option<String>, name: &str| -> CliResult<Option<Value>> {
        v.as_ref()
            .map(|x| {
                serde_json::from_str(x).map_err(|e| Fail(format!("--{name}: invalid JSON: {e}")))
            })
            .transpose()
    };
    macro_rules! over {
        ($field:ident, $val:expr) => {
            if let Some(v) = $val {
                inp.$field = Some(v);
            }
        };
    }
    over!(family, flags.family.clone());
    over!(q, s(&flags.q));
    over!(omega, s(&flags.omega));
    over!(a, s(&flags.a));
    over!(b, s(&flags.b));
    over!(c, s(&flags.c));
    over!(c1, s(&flags.c1));
    over!(c2, s(&flags.c2));
    over!(k, s(&flags.k));
    over!(m1, s(&flags.m1));
    over!(psi, j(&flags.psi, "psi")?);
    over!(phi, j(&flags.phi, "phi")?);
    over!(free, j(&flags.free, "free")?);
    over!(n, flags.n);
    over!(sigma, flags.sigma);
    over!(relations, s(&flags.relations));
    over!(out, flags.out.as_ref().map(|p| p.display().to_string()));
    over!(format, flags.format.clone());
    Ok(inp)
}

fn rational_of(v: &Value, name: &str) -> CliResult<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| Fail(format!("--{name}: {e}"))),
        Value::Number(n) => n.as_i64().map(int).ok_or_else(|| {
            Fail(format!(
                "--{name}: {n} is not an integer; write rationals as \"p/q\""
            ))
        }),
        other => Err(Fail(format!("--{name}: expected a rational, got {other}"))),
    }
}

fn opt_rational(v: &Option<Value>, name: &str) -> CliResult<Option<Rational>> {
    v.as_ref().map(|v| rational_of(v, name)).transpose()
}

fn need_rational(v: &Option<Value>, name: &str) -> CliResult<Rational> {
    opt_rational(v, name)?.ok_or_else(|| Fail(format!("--{name} is required")))
}

fn rational_list(v: &Value, name: &str) -> CliResult<Vec<Rational>> {
    match v {
        Value::Array(items) => items.iter().map(|x| rational_of(x, name)).collect(),
        _ => Err(Fail(format!("--{name}: expected a JSON array"))),
    }
}

fn poly_of(v: &Value, name: &str) -> CliResult<Poly> {
    Ok(Poly::new(rational_list(v, name)?))
}

fn lattice_of(inp: &Inputs, default_omega: Rational) -> CliResult<Lattice> {
    let q = need_rational(&inp.q, "q")?;
    let omega = opt_rational(&inp.omega, "omega")?;
    if q == int(1) {
        return match omega {
            None => Ok(Lattice::uniform()),
            Some(w) if w == int(1) => Ok(Lattice::uniform()),
            Some(w) => Err(Fail(format!(
                "--omega: the uniform lattice has omega = 1, got {w}"
            ))),
        };
    }
    Lattice::new(q, omega.unwrap_or(default_omega)).map_err(|e| Fail(format!("--q/--omega: {e}")))
}

fn relation_list(inp: &Inputs) -> CliResult<Option<Vec<RelationId>>> {
    let Some(v) = &inp.relations else {
        return Ok(None);
    };
    let names: Vec<String> = match v {
        Value::String(s) => s.split(',').map(str::to_string).collect(),
        Value::Array(items) => items
            .iter()
            .map(|x| {
                x.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Fail("--relations: expected strings".into()))
            })
            .collect::<CliResult<_>>()?,
        _ => return Err(Fail("--relations: expected a comma list".into())),
    };
    let mut ids = Vec::new();
    for n in names.iter().filter(|n| !n.trim().is_empty()) {
        let id = RelationId::parse(n).map_err(|e| Fail(format!("--relations: {e}")))?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    Ok(Some(ids))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

fn format_of(inp: &Inputs) -> CliResult<Format> {
    match inp.format.as_deref().unwrap_or("json") {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => Err(Fail(format!(
            "--format: expected json or csv, got {other:?}"
        ))),
    }
}

/// The object a command runs on.
enum Source {
    Family(Box<Family>),
    Freud(Box<QFreudData>),
    Class1(Box<Class1Data>),
    Pearson {
        seq: Box<OrthoSequence>,
        pp: PearsonPair,
    },
}

impl Source {
    fn kind(&self) -> &'static str {
        match self {
            Source::Family(_) => "family",
            Source::Freud(_) => "q_freud",
            Source::Class1(_) => "class1",
            Source::Pearson { .. } => "pearson",
        }
    }

    fn seq(&self) -> &OrthoSequence {
        match self {
            Source::Family(f) => &f.seq,
            Source::Freud(d) => &d.seq,
            Source::Class1(d) => &d.seq,
            Source::Pearson { seq, .. } => seq,
        }
    }

    fn pair(&self) -> PearsonPair {
        match self {
            Source::Family(f) => f.pearson.clone(),
            Source::Freud(d) => d.pearson(),
            Source::Class1(d) => d.pearson(),
            Source::Pearson { pp, .. } => pp.clone(),
        }
    }

    /// Φ and σ of the first structure relation.
    fn first_structure(&self) -> (Poly, usize) {
        match self {
            Source::Family(f) => (f.row.phi.clone(), 0),
            other => {
                let pp = other.pair();
                let s = pp.sigma();
                (pp.phi, s)
            }
        }
    }

    fn default_relations(&self) -> Vec<RelationId> {
        let mut v = vec![if self.first_structure().1 == 0 {
            RelationId::FirstStruct
        } else {
            RelationId::SemiclassicalFirst
        }];
        match self {
            Source::Family(_) => v.extend([
                RelationId::SecondStructClassical,
                RelationId::ClassicalTrio,
                RelationId::Diagonal,
            ]),
            Source::Freud(_) => v.push(RelationId::QfreudSecond),
            Source::Class1(_) => v.push(RelationId::Class1Pair),
            Source::Pearson { pp, .. } => {
                if pp.sigma() == 0 {
                    v.push(RelationId::SecondStructClassical);
                }
            }
        }
        v.extend([
            RelationId::Lemma31Iii,
            RelationId::Lemma31p,
            RelationId::Prop34,
            RelationId::Thm31,
            RelationId::Thm34,
        ]);
        v
    }

    fn run(&self, id: RelationId, inp: &Inputs) -> CliResult<RelationReport> {
        let seq = self.seq();
        let r = match id {
            RelationId::FirstStruct | RelationId::SemiclassicalFirst => {
                let (phi, sigma) = self.first_structure();
                verify_first_structure(seq, &phi, sigma)?
            }
            RelationId::SecondStructClassical => {
                let pp = self.pair();
                if pp.sigma() != 0 {
                    return Err(not_applicable(id, self));
                }
                verify_second_structure_classical(seq, pp.t())?
            }
            RelationId::ClassicalTrio => match self {
                Source::Family(f) => verify_classical_trio(seq, &f.row)?,
                _ => return Err(not_applicable(id, self)),
            },
            RelationId::Diagonal => {
                let phi = match &inp.phi {
                    Some(v) if !matches!(self, Source::Pearson { .. }) => poly_of(v, "phi")?,
                    _ => Poly::one(),
                };
                match inp.sigma {
                    Some(s) => verify_diagonal(seq, &phi, s)?,
                    None => {
                        let mut last = None;
                        for s in 0..=2 {
                            let r = verify_diagonal(seq, &phi, s)?;
                            let pass = r.pass;
                            last = Some(r);
                            if pass {
                                break;
                            }
                        }
                        last.expect("at least one sigma")
                    }
                }
            }
            RelationId::Lemma31Iii => verify_lemma31(seq, &self.pair())?,
            RelationId::Lemma31p => verify_lemma31p(seq, &self.pair())?,
            RelationId::Prop34 => verify_prop34(seq, &self.pair())?,
            RelationId::Thm31 => verify_thm31(seq, &self.pair())?,
            RelationId::Thm34 => verify_thm34(seq, &self.pair())?,
            RelationId::QfreudSecond => match self {
                Source::Freud(d) => verify_qfreud_second(d)?,
                _ => return Err(not_applicable(id, self)),
            },
            RelationId::Class1Pair => match self {
                Source::Class1(d) => verify_class1(d)?,
                _ => return Err(not_applicable(id, self)),
            },
        };
        Ok(r)
    }
}

fn not_applicable(id: RelationId, src: &Source) -> Fail {
    Fail(format!(
        "--relations: {id} does not apply to a {} source",
        src.kind()
    ))
}

/// Builds the source: --family, else --c1 (q-Freud), else --psi with --m1
/// (class-one example) or without (Pearson-generated functional).
fn build_source(inp: &Inputs, default_n: usize) -> CliResult<Source> {
    let n = inp.n.unwrap_or(default_n);
    if let Some(name) = &inp.family {
        let tag = FamilyTag::parse(name).map_err(|e| Fail(format!("--family: {e}")))?;
        let lat = lattice_of(inp, int(0))?;
        let params = family_params(inp, tag)?;
        return Ok(Source::Family(Box::new(table1_family(
            tag, &params, &lat, n,
        )?)));
    }
    if inp.c1.is_some() {
        let c1 = need_rational(&inp.c1, "c1")?;
        let c2 = need_rational(&inp.c2, "c2")?;
        let k = opt_rational(&inp.k, "K")?.unwrap_or_else(|| int(4));
        let q = need_rational(&inp.q, "q")?;
        return Ok(Source::Freud(Box::new(qfreud(&c1, &c2, &k, &q, n)?)));
    }
    if let Some(psi) = &inp.psi {
        let psi = poly_of(psi, "psi")?;
        let lat = lattice_of(inp, int(0))?;
        if let Some(m1) = opt_rational(&inp.m1, "m1")? {
            return Ok(Source::Class1(Box::new(class1_example(
                &psi, &m1, &lat, n,
            )?)));
        }
        let phi = match &inp.phi {
            Some(v) => poly_of(v, "phi")?,
            None => Poly::one(),
        };
        let free = match &inp.free {
            Some(v) => rational_list(v, "free")?,
            None => Vec::new(),
        };
        let pp = PearsonPair::new(phi, psi)?;
        let u = pearson_moments(&pp, &lat, &free, 2 * n + HORIZON_SLACK)?;
        let seq = smop_from_moments(&u, n)?;
        return Ok(Source::Pearson {
            seq: Box::new(seq),
            pp,
        });
    }
    Err(Fail(
        "no source: give --family, --c1 (q-Freud) or --psi".into(),
    ))
}

fn family_params(inp: &Inputs, tag: FamilyTag) -> CliResult<FamilyParams> {
    let mut p = FamilyParams::documented(tag);
    if let Some(a) = opt_rational(&inp.a, "a")? {
        p.a = Some(a);
    }
    if let Some(b) = opt_rational(&inp.b, "b")? {
        p.b = Some(b);
    }
    if let Some(c) = opt_rational(&inp.c, "c")? {
        p.c = Some(c);
    }
    Ok(p)
}

/// Fills in the defaults so the echoed config reproduces the run.
fn resolved(inp: &Inputs, command: &str, src: Option<&Source>, rels: &[RelationId]) -> Value {
    let mut r = inp.clone();
    r.out = None;
    if r.format.is_none() {
        r.format = Some("json".into());
    }
    if let Some(src) = src {
        r.n = Some(src.seq().n());
        if let Source::Family(f) = src {
            let s = |x: &Option<Rational>| x.as_ref().map(|v| Value::String(v.to_string()));
            r.a = s(&Some(f.row.a.clone()));
            r.b = if f.row.tag == FamilyTag::BigQJacobi {
                s(&Some(f.row.b.clone()))
            } else {
                None
            };
            r.c = if f.row.tag == FamilyTag::BigQJacobi {
                s(&Some(f.row.c.clone()))
            } else {
                None
            };
        }
        if let Source::Freud(d) = src {
            r.k = Some(Value::String(d.k.to_string()));
        }
    }
    if !rels.is_empty() {
        r.relations = Some(Value::Array(
            rels.iter()
                .map(|id| Value::String(id.to_string()))
                .collect(),
        ));
    }
    let mut m = Map::new();
    m.insert("command".into(), Value::String(command.into()));
    if let Value::Object(fields) = serde_json::to_value(&r).expect("inputs serialize") {
        m.extend(fields);
    }
    Value::Object(m)
}

/// One CSV row in the fixed four-column layout.
struct CsvRow {
    relation: String,
    n: usize,
    nu: usize,
    value: String,
}

/// Serializes reports as a JSON array, or as CSV rows ordered by relation, n, ν.
pub fn emit_report(reports: &[RelationReport], csv: bool) -> crate::Result<String> {
    if csv {
        let rs = rows(reports)
            .into_iter()
            .map(|r| CsvRow {
                relation: r.relation,
                n: r.n,
                nu: r.nu,
                value: r.value.to_string(),
            })
            .collect::<Vec<_>>();
        write_csv(&rs)
    } else {
        let mut s = serde_json::to_string_pretty(reports)
            .map_err(|e| crate::Error::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

fn write_csv(rows: &[CsvRow]) -> crate::Result<String> {
    let io = |e: csv::Error| crate::Error::Parse(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["relation", "n", "nu", "value"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.relation.as_str(),
            &r.n.to_string(),
            &r.nu.to_string(),
            &r.value,
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn strs(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|r| Value::String(r.to_string())).collect())
}

fn vector_rows(out: &mut Vec<CsvRow>, name: &str, v: &[Rational], first: usize) {
    for (i, x) in v.iter().enumerate() {
        out.push(CsvRow {
            relation: name.into(),
            n: first + i,
            nu: 0,
            value: x.to_string(),
        });
    }
}

fn poly_rows(out: &mut Vec<CsvRow>, name: &str, polys: &[Poly]) {
    for (n, p) in polys.iter().enumerate() {
        for (k, c) in p.coeffs().iter().enumerate() {
            out.push(CsvRow {
                relation: name.into(),
                n,
                nu: k,
                value: c.to_string(),
            });
        }
    }
}

fn reports_value(reports: &[RelationReport]) -> Value {
    serde_json::to_value(reports).expect("reports serialize")
}

fn all_pass(reports: &[RelationReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

/// A command's result: the JSON document, the CSV rows and the verdict.
struct Output {
    doc: Map<String, Value>,
    csv: Vec<CsvRow>,
    pass: bool,
}

fn sequence_doc(doc: &mut Map<String, Value>, csv: &mut Vec<CsvRow>, seq: &OrthoSequence) {
    doc.insert(
        "lattice".into(),
        serde_json::to_value(seq.lattice()).expect("lattice"),
    );
    doc.insert(
        "polys".into(),
        serde_json::to_value(seq.polys()).expect("polys"),
    );
    doc.insert("beta".into(), strs(seq.beta()));
    doc.insert("gamma".into(), strs(seq.gamma()));
    doc.insert("norms".into(), strs(seq.norms()));
    vector_rows(csv, "beta", seq.beta(), 0);
    vector_rows(csv, "gamma", seq.gamma(), 0);
    vector_rows(csv, "norms", seq.norms(), 0);
    poly_rows(csv, "poly", seq.polys());
}

fn run_verify(src: &Source, rels: &[RelationId], inp: &Inputs) -> CliResult<Vec<RelationReport>> {
    rels.par_iter().map(|&id| src.run(id, inp)).collect()
}

fn execute(cmd: &Command, inp: &Inputs) -> CliResult<Output> {
    let mut doc = Map::new();
    let mut csv = Vec::new();
    let mut pass = true;
    let requested = relation_list(inp)?;
    match cmd {
        Command::Suite(_) => {
            let results = suite::run_all()?;
            doc.insert("config".into(), resolved(inp, cmd.name(), None, &[]));
            doc.insert(
                "criteria".into(),
                serde_json::to_value(&results).expect("criteria"),
            );
            for c in &results {
                pass &= c.pass;
                for l in &c.reports {
                    for r in rows(std::slice::from_ref(&l.report)) {
                        csv.push(CsvRow {
                            relation: format!("C{} {}: {}", c.id, l.label, r.relation),
                            n: r.n,
                            nu: r.nu,
                            value: r.value.to_string(),
                        });
                    }
                }
            }
        }
        Command::Family(_) => {
            if inp.family.is_none() {
                return Err(Fail("--family is required".into()));
            }
            let src = build_source(inp, DEFAULT_N)?;
            let Source::Family(f) = &src else {
                unreachable!("family source")
            };
            doc.insert("config".into(), resolved(inp, cmd.name(), Some(&src), &[]));
            doc.insert("family".into(), Value::String(f.row.tag.to_string()));
            doc.insert("phi".into(), serde_json::to_value(&f.row.phi).expect("phi"));
            doc.insert(
                "sigma".into(),
                serde_json::to_value(&f.row.sigma_poly).expect("sigma"),
            );
            doc.insert(
                "pearson".into(),
                json!({"phi": f.pearson.phi, "psi": f.pearson.psi, "class": f.pearson.sigma()}),
            );
            let n = f.seq.n();
            let mut table = Map::new();
            type Eval = fn(&crate::families::Table1Row, usize) -> crate::Result<Rational>;
            let evals: [(&str, Eval); 8] = [
                ("alpha_hat", |r, k| r.alpha_hat(k)),
                ("beta_hat", |r, k| r.beta_hat(k)),
                ("gamma_hat", |r, k| r.gamma_hat(k)),
                ("alpha_tilde", |r, k| r.alpha_tilde(k)),
                ("beta_tilde", |r, k| r.beta_tilde(k)),
                ("gamma_tilde", |r, k| r.gamma_tilde(k)),
                ("delta", |r, k| r.delta(k)),
                ("epsilon", |r, k| r.epsilon(k)),
            ];
            for (name, eval) in evals {
                let vals = (0..=n)
                    .map(|k| eval(&f.row, k))
                    .collect::<crate::Result<Vec<_>>>()?;
                vector_rows(&mut csv, name, &vals, 0);
                table.insert(name.into(), strs(&vals));
            }
            doc.insert("table".into(), Value::Object(table));
            sequence_doc(&mut doc, &mut csv, &f.seq);
        }
        Command::Moments(_) | Command::Ttrr(_) => {
            let src = build_source(inp, DEFAULT_N)?;
            doc.insert("config".into(), resolved(inp, cmd.name(), Some(&src), &[]));
            doc.insert("source".into(), Value::String(src.kind().into()));
            let u = src.seq().functional();
            if matches!(cmd, Command::Moments(_)) {
                doc.insert(
                    "functional".into(),
                    serde_json::to_value(u).expect("functional"),
                );
                vector_rows(&mut csv, "moment", u.moments(), 0);
            } else {
                sequence_doc(&mut doc, &mut csv, src.seq());
            }
        }
        Command::Verify(_) => {
            let src = build_source(inp, DEFAULT_N)?;
            let rels = requested.unwrap_or_else(|| src.default_relations());
            let reports = run_verify(&src, &rels, inp)?;
            doc.insert(
                "config".into(),
                resolved(inp, cmd.name(), Some(&src), &rels),
            );
            doc.insert("source".into(), Value::String(src.kind().into()));
            pass = all_pass(&reports);
            doc.insert("pass".into(), Value::Bool(pass));
            doc.insert("reports".into(), reports_value(&reports));
            report_rows(&mut csv, &reports);
        }
        Command::Freud(_) => {
            if inp.c1.is_none() {
                return Err(Fail("--c1 is required".into()));
            }
            let src = build_source(inp, DEFAULT_FREUD_N)?;
            let Source::Freud(d) = &src else {
                unreachable!("q-Freud source")
            };
            let rels = requested.unwrap_or_else(|| src.default_relations());
            let reports = run_verify(&src, &rels, inp)?;
            doc.insert(
                "config".into(),
                resolved(inp, cmd.name(), Some(&src), &rels),
            );
            doc.insert("c".into(), strs(&d.c));
            doc.insert("a".into(), strs(&d.a));
            doc.insert("moments".into(), strs(d.seq.functional().moments()));
            doc.insert("psi".into(), serde_json::to_value(&d.psi).expect("psi"));
            doc.insert("symmetric".into(), Value::Bool(d.symmetric()));
            doc.insert(
                "moment_relation_holds".into(),
                Value::Bool(d.moment_relation_holds()),
            );
            let lam = qfreud_monomial_coeffs(d, d.seq.n())?;
            doc.insert(
                "monomial_coefficients".into(),
                Value::Array(lam.iter().map(|r| strs(r)).collect()),
            );
            let (_, class) = reduce_pair(&d.pearson(), d.seq.functional(), 2 * d.seq.n())?;
            doc.insert("class".into(), json!(class));
            pass = all_pass(&reports) && class == 2;
            doc.insert("pass".into(), Value::Bool(pass));
            doc.insert("reports".into(), reports_value(&reports));
            vector_rows(&mut csv, "c", &d.c, 0);
            vector_rows(&mut csv, "a", &d.a, 0);
            report_rows(&mut csv, &reports);
        }
        Command::Class1(_) => {
            if inp.psi.is_none() || inp.m1.is_none() {
                return Err(Fail("--psi and --m1 are required".into()));
            }
            let src = build_source(inp, DEFAULT_N)?;
            let Source::Class1(d) = &src else {
                unreachable!("class-one source")
            };
            let rels = requested.unwrap_or_else(|| src.default_relations());
            let reports = run_verify(&src, &rels, inp)?;
            doc.insert(
                "config".into(),
                resolved(inp, cmd.name(), Some(&src), &rels),
            );
            doc.insert("C".into(), Value::String(d.c.to_string()));
            doc.insert("rho".into(), strs(&d.rho));
            doc.insert("v0".into(), strs(&d.v0));
            doc.insert("lambda".into(), strs(&d.lam));
            doc.insert("beta".into(), strs(d.seq.beta()));
            doc.insert("gamma".into(), strs(d.seq.gamma()));
            let (_, class) = reduce_pair(&d.pearson(), d.seq.functional(), 2 * d.seq.n())?;
            doc.insert("class".into(), json!(class));
            pass = all_pass(&reports) && class == 1;
            doc.insert("pass".into(), Value::Bool(pass));
            doc.insert("reports".into(), reports_value(&reports));
            vector_rows(&mut csv, "rho", &d.rho, 0);
            vector_rows(&mut csv, "v0", &d.v0, 0);
            vector_rows(&mut csv, "lambda", &d.lam, 0);
            report_rows(&mut csv, &reports);
        }
        Command::Reduce(_) => {
            let src = build_source(inp, DEFAULT_N)?;
            let pp = src.pair();
            let u = src.seq().functional();
            let (min, class) = reduce_pair(&pp, u, u.horizon())?;
            doc.insert("config".into(), resolved(inp, cmd.name(), Some(&src), &[]));
            doc.insert("input".into(), json!({"phi": pp.phi, "psi": pp.psi}));
            doc.insert("reduced".into(), json!({"phi": min.phi, "psi": min.psi}));
            doc.insert("class".into(), json!(class));
            for (name, p) in [("phi", &min.phi), ("psi", &min.psi)] {
                for (k, c) in p.coeffs().iter().enumerate() {
                    csv.push(CsvRow {
                        relation: format!("reduced.{name}"),
                        n: class,
                        nu: k,
                        value: c.to_string(),
                    });
                }
            }
        }
    }
    Ok(Output { doc, csv, pass })
}

fn report_rows(csv: &mut Vec<CsvRow>, reports: &[RelationReport]) {
    csv.extend(rows(reports).into_iter().map(|r| CsvRow {
        relation: r.relation,
        n: r.n,
        nu: r.nu,
        value: r.value.to_string(),
    }));
}

fn set_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("QHAHN_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            Fail(format!(
                "QHAHN_THREADS: expected a positive integer, got {v:?}"
            ))
        })?;
        if n == 0 {
            return Err(Fail("QHAHN_THREADS must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn run(cmd: &Command) -> CliResult<bool> {
    set_threads()?;
    let inp = merge(cmd.flags())?;
    let format = format_of(&inp)?;
    let out = execute(cmd, &inp)?;
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&Value::Object(out.doc)).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => {
            if let Some(cfg) = out.doc.get("config") {
                eprintln!("config: {cfg}");
            }
            write_csv(&out.csv)?
        }
    };
    match &inp.out {
        Some(path) => fs::write(path, text).map_err(|e| Fail(format!("--out {path}: {e}")))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Fail(format!("stdout: {e}")))?;
        }
    }
    Ok(out.pass)
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(args: &[&str]) -> CliResult<Inputs> {
        let mut full = vec!["qhahn", "verify"];
        full.extend_from_slice(args);
        let cli = Cli::try_parse_from(full).map_err(|e| Fail(e.to_string()))?;
        merge(cli.command.flags())
    }

    #[test]
    fn malformed_rational_names_the_flag() {
        let inp = inputs(&["--q", "1/0"]).unwrap();
        let Fail(msg) = need_rational(&inp.q, "q").unwrap_err();
        assert!(msg.starts_with("--q:"), "{msg}");
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("qhahn-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        fs::write(
            &path,
            r#"{"family":"q_laguerre","q":"1/2","N":6,"a":"2/5"}"#,
        )
        .unwrap();
        let inp = inputs(&["--config", path.to_str().unwrap(), "--q", "2/3"]).unwrap();
        assert_eq!(inp.q, Some(Value::String("2/3".into())));
        assert_eq!(inp.n, Some(6));
        assert_eq!(inp.family.as_deref(), Some("q_laguerre"));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = std::env::temp_dir().join(format!("qhahn-bad-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        fs::write(&path, r#"{"familly":"q_laguerre"}"#).unwrap();
        assert!(inputs(&["--config", path.to_str().unwrap()]).is_err());
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn relation_list_parses_and_dedups() {
        let inp = inputs(&["--relations", "classical_trio,THM31,classical_trio"]).unwrap();
        assert_eq!(
            relation_list(&inp).unwrap().unwrap(),
            vec![RelationId::ClassicalTrio, RelationId::Thm31]
        );
        assert!(relation_list(&inputs(&["--relations", "nope"]).unwrap()).is_err());
    }

    #[test]
    fn q_one_means_uniform() {
        let inp = inputs(&["--q", "1"]).unwrap();
        assert!(lattice_of(&inp, int(0)).unwrap().is_uniform());
        let inp = inputs(&["--q", "1", "--omega", "2"]).unwrap();
        assert!(lattice_of(&inp, int(0)).is_err());
    }

    #[test]
    fn empty_report_list() {
        assert_eq!(emit_report(&[], false).unwrap(), "[]\n");
        assert_eq!(emit_report(&[], true).unwrap(), "relation,n,nu,value\n");
    }

    #[test]
    fn inapplicable_relation_is_an_input_error() {
        let inp = inputs(&["--family", "q_charlier", "--q", "1/2", "--N", "5"]).unwrap();
        let src = build_source(&inp, DEFAULT_N).unwrap();
        assert!(src.run(RelationId::QfreudSecond, &inp).is_err());
        assert!(src.run(RelationId::ClassicalTrio, &inp).unwrap().pass);
    }
}
