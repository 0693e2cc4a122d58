//! Self-describing text serialization for templates.
//!
//! ```text
//! pairspec-template 1
//! family M
//! variant xtheta
//! sigma 2.2999999999999998e0
//! q 1 2 3 ...
//! radial 1.6000000000000000e1 ...
//! source 1_1_1.xyt
//! data 320
//! 1 1.6000000000000000e1 <re> <im>
//! ...
//! end
//! ```
//!
//! Baseline templates use `family G`, `alpha`/`beta` axis lines and rows
//! `alpha beta value`. All reals are written with 17 significant digits so
//! a write/parse cycle is bit-exact. A file may hold several templates.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::baseline::{BaselineGrid, BaselineTemplate};
use crate::error::{Error, Result};
use crate::spectral::{Family, GridSpec, SpectralTemplate, Variant};

pub const MAGIC: &str = "pairspec-template 1";

#[derive(Debug, Clone, PartialEq)]
pub enum TemplateDoc {
    Pair(SpectralTemplate),
    Baseline(BaselineTemplate),
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn join_reals(values: &[f64]) -> String {
    values.iter().map(|&v| real(v)).collect::<Vec<_>>().join(" ")
}

pub fn write_template(t: &SpectralTemplate) -> String {
    let grid = t.grid();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "family {}", grid.family());
    let _ = writeln!(out, "variant {}", t.variant());
    let _ = writeln!(out, "sigma {}", real(grid.sigma()));
    let qs: Vec<String> = grid.q_values().iter().map(|q| q.to_string()).collect();
    let _ = writeln!(out, "q {}", qs.join(" "));
    let _ = writeln!(out, "radial {}", join_reals(grid.radial_values()));
    let _ = writeln!(out, "source {}", t.source().unwrap_or("-"));
    let _ = writeln!(out, "data {}", grid.len());
    let nr = grid.radial_values().len();
    for (qi, q) in grid.q_values().iter().enumerate() {
        for (ri, &r) in grid.radial_values().iter().enumerate() {
            let v = t.values()[qi * nr + ri];
            let _ = writeln!(out, "{q} {} {} {}", real(r), real(v.re), real(v.im));
        }
    }
    out.push_str("end\n");
    out
}

pub fn write_baseline(t: &BaselineTemplate) -> String {
    let grid = t.grid();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "family G");
    let _ = writeln!(out, "variant {}", t.variant());
    let _ = writeln!(out, "sigma {}", real(grid.sigma()));
    let _ = writeln!(out, "alpha {}", join_reals(grid.alpha_values()));
    let _ = writeln!(out, "beta {}", join_reals(grid.beta_values()));
    let _ = writeln!(out, "source {}", t.source().unwrap_or("-"));
    let _ = writeln!(out, "data {}", grid.len());
    for (ai, &a) in grid.alpha_values().iter().enumerate() {
        for (bi, &b) in grid.beta_values().iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", real(a), real(b), real(t.get(ai, bi)));
        }
    }
    out.push_str("end\n");
    out
}

pub fn write_doc(doc: &TemplateDoc) -> String {
    match doc {
        TemplateDoc::Pair(t) => write_template(t),
        TemplateDoc::Baseline(t) => write_baseline(t),
    }
}

/// True if the text starts with the template magic line.
pub fn looks_like_template(text: &str) -> bool {
    text.lines().next().is_some_and(|l| l.trim() == MAGIC)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let l = l.trim();
            if l.is_empty() {
                continue;
            }
            self.last = i + 1;
            return Some((i + 1, l));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::parse(self.last + 1, format!("unexpected end of input, expected {what}")))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, l) = self.expect(key)?;
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok((n, rest.trim())),
            None if l == key => Ok((n, "")),
            _ => Err(Error::parse(n, format!("expected \"{key} ...\", got {l:?}"))),
        }
    }
}

fn parse_real(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("not a finite number: {s:?}")))
}

fn parse_reals(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split_whitespace().map(|t| parse_real(t, line)).collect()
}

/// Parses every template in `text`.
pub fn parse_documents(text: &str) -> Result<Vec<TemplateDoc>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut docs = Vec::new();
    while let Some((n, l)) = lines.next() {
        if l != MAGIC {
            return Err(Error::parse(n, format!("expected {MAGIC:?}, got {l:?}")));
        }
        docs.push(parse_one(&mut lines)?);
    }
    if docs.is_empty() {
        return Err(Error::parse(1, "no template found"));
    }
    Ok(docs)
}

pub fn parse_template(text: &str) -> Result<SpectralTemplate> {
    let mut docs = parse_documents(text)?;
    match (docs.len(), docs.pop()) {
        (1, Some(TemplateDoc::Pair(t))) => Ok(t),
        (1, Some(TemplateDoc::Baseline(_))) => Err(Error::parse(1, "expected an L or M template, got G")),
        (n, _) => Err(Error::parse(1, format!("expected one template, found {n}"))),
    }
}

pub fn parse_baseline(text: &str) -> Result<BaselineTemplate> {
    let mut docs = parse_documents(text)?;
    match (docs.len(), docs.pop()) {
        (1, Some(TemplateDoc::Baseline(t))) => Ok(t),
        (1, Some(TemplateDoc::Pair(_))) => Err(Error::parse(1, "expected a G template")),
        (n, _) => Err(Error::parse(1, format!("expected one template, found {n}"))),
    }
}

pub fn read_documents(path: &Path) -> Result<Vec<TemplateDoc>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_documents(&text).map_err(|e| e.with_path(path))
}

pub fn write_documents(path: &Path, docs: &[TemplateDoc]) -> Result<()> {
    let text: String = docs.iter().map(write_doc).collect();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_one(lines: &mut Lines<'_>) -> Result<TemplateDoc> {
    let (n, family) = lines.keyed("family")?;
    let (vn, variant) = lines.keyed("variant")?;
    let variant: Variant = variant.parse().map_err(|e: Error| Error::parse(vn, e.to_string()))?;
    let (sn, sigma) = lines.keyed("sigma")?;
    let sigma = parse_real(sigma, sn)?;
    if family == "G" {
        return parse_baseline_body(lines, variant, sigma);
    }
    let family: Family = family.parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
    let (qn, qs) = lines.keyed("q")?;
    let q_values = qs
        .split_whitespace()
        .map(|t| {
            t.parse::<i32>()
                .map_err(|_| Error::parse(qn, format!("q is not an integer: {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rn, rs) = lines.keyed("radial")?;
    let radial_values = parse_reals(rs, rn)?;
    let grid = GridSpec::new(family, q_values, radial_values, sigma).map_err(|e| Error::parse(rn, e.to_string()))?;
    let source = parse_source(lines)?;
    let count = parse_count(lines, grid.len())?;

    let mut values = Vec::with_capacity(count);
    for &q in grid.q_values() {
        for &r in grid.radial_values() {
            let (ln, l) = lines.expect("data row")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::parse(ln, "expected \"q radial re im\""));
            }
            if f[0].parse::<i32>().ok() != Some(q) || parse_real(f[1], ln)?.to_bits() != r.to_bits() {
                return Err(Error::parse(ln, format!("row out of grid order, expected q={q} radial={r}")));
            }
            values.push(Complex64::new(parse_real(f[2], ln)?, parse_real(f[3], ln)?));
        }
    }
    expect_end(lines)?;
    let mut t = SpectralTemplate::from_parts(grid, variant, values)?;
    if let Some(s) = source {
        t = t.with_source(s);
    }
    Ok(TemplateDoc::Pair(t))
}

fn parse_baseline_body(lines: &mut Lines<'_>, variant: Variant, sigma: f64) -> Result<TemplateDoc> {
    let (an, a) = lines.keyed("alpha")?;
    let alpha = parse_reals(a, an)?;
    let (bn, b) = lines.keyed("beta")?;
    let beta = parse_reals(b, bn)?;
    let grid = BaselineGrid::from_values(alpha, beta, sigma).map_err(|e| Error::parse(bn, e.to_string()))?;
    let source = parse_source(lines)?;
    let count = parse_count(lines, grid.len())?;
    let mut values = Vec::with_capacity(count);
    for &a in grid.alpha_values() {
        for &b in grid.beta_values() {
            let (ln, l) = lines.expect("data row")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(ln, "expected \"alpha beta value\""));
            }
            if parse_real(f[0], ln)?.to_bits() != a.to_bits() || parse_real(f[1], ln)?.to_bits() != b.to_bits() {
                return Err(Error::parse(ln, "row out of grid order"));
            }
            values.push(parse_real(f[2], ln)?);
        }
    }
    expect_end(lines)?;
    let mut t = BaselineTemplate::from_parts(grid, variant, values)?;
    if let Some(s) = source {
        t = t.with_source(s);
    }
    Ok(TemplateDoc::Baseline(t))
}

fn parse_source(lines: &mut Lines<'_>) -> Result<Option<String>> {
    let (_, s) = lines.keyed("source")?;
    Ok(if s == "-" || s.is_empty() { None } else { Some(s.to_string()) })
}

fn parse_count(lines: &mut Lines<'_>, want: usize) -> Result<usize> {
    let (n, c) = lines.keyed("data")?;
    let count: usize = c
        .parse()
        .map_err(|_| Error::parse(n, format!("bad row count {c:?}")))?;
    if count != want {
        return Err(Error::parse(n, format!("row count {count} does not match grid size {want}")));
    }
    Ok(count)
}

fn expect_end(lines: &mut Lines<'_>) -> Result<()> {
    let (n, l) = lines.expect("end")?;
    if l != "end" {
        return Err(Error::parse(n, format!("expected \"end\", got {l:?}")));
    }
    Ok(())
}
