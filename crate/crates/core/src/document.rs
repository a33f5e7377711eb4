//! Text documents for combs, test functions, exponential sums and point
//! lists.
//!
//! Combs, test functions and sums are TOML with a `format` tag; every number
//! is a string so exact rationals survive (`"3/4"`) and doubles are written
//! with 17 significant digits. Complex numbers are `["re", "im"]`. Point
//! lists are plain text, one point per line.
//!
//! ```toml
//! format = "comb"
//! dimension = 1
//! regime = "exact"
//!
//! [[components]]
//! lattice = [["1"]]
//! translate = ["0"]
//!
//! [[components.terms]]
//! k = [0]
//! m = [0]
//! omega = ["1/2"]
//! c = ["1", "0"]
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::almostperiodic::ExponentialSum;
use crate::comb::{Atom, CombDistribution, Component, Term, WindowedDistribution};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBasis, LatticeCoset};
use crate::multiindex::MultiIndex;
use crate::poly::Polynomial;
use crate::scalar::{format_f64, Regime, Scalar, Vector};
use crate::schwartz::TestFunction;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CombDoc {
    format: String,
    dimension: usize,
    regime: String,
    #[serde(default)]
    components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    atoms: Vec<AtomDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    lattice: Vec<Vec<String>>,
    translate: Vec<String>,
    terms: Vec<TermDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    k: Vec<u32>,
    m: Vec<u32>,
    omega: Vec<String>,
    c: [String; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    point: Vec<String>,
    k: Vec<u32>,
    c: [String; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestFnDoc {
    format: String,
    dimension: usize,
    width: String,
    center: Vec<String>,
    modulation: Vec<String>,
    poly: Vec<MonomialDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialDoc {
    m: Vec<u32>,
    c: [String; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpSumDoc {
    format: String,
    dimension: usize,
    terms: Vec<ExpTermDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpTermDoc {
    a: [String; 2],
    s: Vec<String>,
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{path}: {msg}")),
        other => Error::Parse(format!("{path}: {other}")),
    }
}

fn from_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))
}

fn to_toml<T: Serialize>(doc: &T) -> String {
    toml::to_string(doc).expect("documents serialize")
}

fn expect_format(text: &str, want: &str) -> Result<()> {
    let found = document_format(text)?;
    if found == want {
        Ok(())
    } else {
        Err(Error::Parse(format!("format: expected {want:?}, found {found:?}")))
    }
}

/// Reads the `format` tag of a TOML document.
pub fn document_format(text: &str) -> Result<String> {
    let v: toml::Value = toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))?;
    v.get("format")
        .and_then(toml::Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Parse("format: missing".into()))
}

fn complex_strings(c: Complex64) -> [String; 2] {
    [format_f64(c.re), format_f64(c.im)]
}

fn parse_complex(path: &str, c: &[String; 2]) -> Result<Complex64> {
    let re = Scalar::parse(&c[0], Regime::Float).map_err(|e| at(&format!("{path}[0]"), e))?;
    let im = Scalar::parse(&c[1], Regime::Float).map_err(|e| at(&format!("{path}[1]"), e))?;
    Ok(Complex64::new(re.to_f64(), im.to_f64()))
}

fn parse_f64(path: &str, s: &str) -> Result<f64> {
    Scalar::parse(s, Regime::Float).map(|x| x.to_f64()).map_err(|e| at(path, e))
}

fn parse_vector(path: &str, items: &[String], dim: usize, regime: Regime) -> Result<Vector> {
    if items.len() != dim {
        return Err(Error::Parse(format!("{path}: expected {dim} entries, found {}", items.len())));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, s)| Scalar::parse(s, regime).map_err(|e| at(&format!("{path}[{i}]"), e)))
        .collect()
}

fn parse_index(path: &str, parts: &[u32], dim: usize) -> Result<MultiIndex> {
    if parts.len() != dim {
        return Err(Error::Parse(format!("{path}: expected {dim} entries, found {}", parts.len())));
    }
    Ok(MultiIndex::new(parts.to_vec()))
}

fn doc_strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::to_doc_string).collect()
}

pub fn parse_comb(text: &str) -> Result<CombDistribution> {
    expect_format(text, "comb")?;
    let doc: CombDoc = from_toml(text)?;
    let regime = Regime::parse(&doc.regime).map_err(|e| at("regime", e))?;
    let d = doc.dimension;
    if d == 0 {
        return Err(Error::Parse("dimension: must be positive".into()));
    }
    let mut components = Vec::with_capacity(doc.components.len());
    for (ci, comp) in doc.components.iter().enumerate() {
        let path = format!("components[{ci}]");
        if comp.lattice.len() != d {
            return Err(Error::Parse(format!("{path}.lattice: expected {d} rows, found {}", comp.lattice.len())));
        }
        let rows = comp
            .lattice
            .iter()
            .enumerate()
            .map(|(ri, row)| parse_vector(&format!("{path}.lattice[{ri}]"), row, d, regime))
            .collect::<Result<Vec<_>>>()?;
        let lattice = LatticeBasis::from_rows(rows).map_err(|e| at(&format!("{path}.lattice"), e))?;
        let translate = parse_vector(&format!("{path}.translate"), &comp.translate, d, regime)?;
        let coset = LatticeCoset::new(lattice, translate).map_err(|e| at(&path, e))?;
        let terms = comp
            .terms
            .iter()
            .enumerate()
            .map(|(ti, t)| {
                let tp = format!("{path}.terms[{ti}]");
                Ok(Term::new(
                    parse_index(&format!("{tp}.k"), &t.k, d)?,
                    parse_index(&format!("{tp}.m"), &t.m, d)?,
                    parse_vector(&format!("{tp}.omega"), &t.omega, d, regime)?,
                    parse_complex(&format!("{tp}.c"), &t.c)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        components.push(Component { coset, terms });
    }
    let atoms = doc
        .atoms
        .iter()
        .enumerate()
        .map(|(ai, a)| {
            let ap = format!("atoms[{ai}]");
            Ok(Atom {
                point: parse_vector(&format!("{ap}.point"), &a.point, d, regime)?,
                k: parse_index(&format!("{ap}.k"), &a.k, d)?,
                c: parse_complex(&format!("{ap}.c"), &a.c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CombDistribution::new(d, components, atoms)
}

/// Canonical form of `f` as a document.
pub fn write_comb(f: &CombDistribution) -> String {
    let f = f.collect();
    let doc = CombDoc {
        format: "comb".into(),
        dimension: f.dim(),
        regime: f.regime().name().into(),
        components: f
            .components()
            .iter()
            .map(|comp| ComponentDoc {
                lattice: comp.coset.lattice().generator().rows().iter().map(|r| doc_strings(r)).collect(),
                translate: doc_strings(comp.coset.translate()),
                terms: comp
                    .terms
                    .iter()
                    .map(|t| TermDoc {
                        k: t.k.parts().to_vec(),
                        m: t.m.parts().to_vec(),
                        omega: doc_strings(&t.omega),
                        c: complex_strings(t.c),
                    })
                    .collect(),
            })
            .collect(),
        atoms: f
            .atoms()
            .iter()
            .map(|a| AtomDoc { point: doc_strings(&a.point), k: a.k.parts().to_vec(), c: complex_strings(a.c) })
            .collect(),
    };
    to_toml(&doc)
}

pub fn parse_testfn(text: &str) -> Result<TestFunction> {
    expect_format(text, "testfn")?;
    let doc: TestFnDoc = from_toml(text)?;
    let d = doc.dimension;
    let floats = |path: &str, items: &[String]| -> Result<Vec<f64>> {
        if items.len() != d {
            return Err(Error::Parse(format!("{path}: expected {d} entries, found {}", items.len())));
        }
        items.iter().enumerate().map(|(i, s)| parse_f64(&format!("{path}[{i}]"), s)).collect()
    };
    let terms = doc
        .poly
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = format!("poly[{i}]");
            Ok((parse_index(&format!("{p}.m"), &t.m, d)?, parse_complex(&format!("{p}.c"), &t.c)?))
        })
        .collect::<Result<Vec<_>>>()?;
    TestFunction::new(
        Polynomial::from_terms(d, terms),
        parse_f64("width", &doc.width)?,
        floats("center", &doc.center)?,
        floats("modulation", &doc.modulation)?,
    )
    .map_err(|e| at("testfn", e))
}

pub fn write_testfn(phi: &TestFunction) -> String {
    let floats = |v: &[f64]| v.iter().map(|x| format_f64(*x)).collect();
    let doc = TestFnDoc {
        format: "testfn".into(),
        dimension: phi.dim(),
        width: format_f64(phi.width()),
        center: floats(phi.center()),
        modulation: floats(phi.modulation()),
        poly: phi.poly().terms().map(|(m, c)| MonomialDoc { m: m.parts().to_vec(), c: complex_strings(*c) }).collect(),
    };
    to_toml(&doc)
}

pub fn parse_expsum(text: &str) -> Result<ExponentialSum> {
    expect_format(text, "expsum")?;
    let doc: ExpSumDoc = from_toml(text)?;
    let d = doc.dimension;
    let terms = doc
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = format!("terms[{i}]");
            if t.s.len() != d {
                return Err(Error::Parse(format!("{p}.s: expected {d} entries, found {}", t.s.len())));
            }
            let s = t.s.iter().enumerate().map(|(j, x)| parse_f64(&format!("{p}.s[{j}]"), x)).collect::<Result<_>>()?;
            Ok((parse_complex(&format!("{p}.a"), &t.a)?, s))
        })
        .collect::<Result<Vec<_>>>()?;
    ExponentialSum::new(d, terms)
}

pub fn write_expsum(g: &ExponentialSum) -> String {
    let doc = ExpSumDoc {
        format: "expsum".into(),
        dimension: g.dim(),
        terms: g
            .terms()
            .iter()
            .map(|(a, s)| ExpTermDoc { a: complex_strings(*a), s: s.iter().map(|x| format_f64(*x)).collect() })
            .collect(),
    };
    to_toml(&doc)
}

/// One point per line, coordinates separated by whitespace; blank lines and
/// `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let point = body
            .split_whitespace()
            .enumerate()
            .map(|(col, tok)| {
                Scalar::parse(tok, Regime::Float)
                    .map(|x| x.to_f64())
                    .map_err(|e| at(&format!("line {}, column {}", lineno + 1, col + 1), e))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = out.first() {
            if first.len() != point.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} coordinates, found {}",
                    lineno + 1,
                    first.len(),
                    point.len()
                )));
            }
        }
        out.push(point);
    }
    Ok(out)
}

pub fn write_points(points: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for p in points {
        let cols: Vec<String> = p.iter().map(|x| format_f64(*x)).collect();
        s.push_str(&cols.join(" "));
        s.push('\n');
    }
    s
}

/// Columns `x_1 .. x_d k re im`, one row per (point, derivative order).
pub fn write_window(w: &WindowedDistribution) -> String {
    let d = w.center.len();
    let mut s = String::new();
    let names: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    s.push_str(&format!("# {} k re im\n", names.join(" ")));
    for p in &w.points {
        let coords: Vec<String> = p.point.iter().map(Scalar::to_doc_string).collect();
        for (k, c) in &p.coeffs {
            let k: Vec<String> = k.parts().iter().map(u32::to_string).collect();
            s.push_str(&format!("{} {} {} {}\n", coords.join(" "), k.join(","), format_f64(c.re), format_f64(c.im)));
        }
    }
    s
}
