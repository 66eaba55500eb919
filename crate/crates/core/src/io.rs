//! Tab-separated dataset formats: state vectors, feature definitions, the
//! feature-vector table and bin assignments.
//!
//! Every format is line oriented with a mandatory header. Blank lines and lines
//! starting with `#` are ignored. Fields are split on tabs when the line has any,
//! otherwise on runs of whitespace.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::model::{
    BinAssignment, Compartment, FeatureDef, FeatureVectorTable, ProteinRecord, N_COMPARTMENTS,
    N_SUBSETS,
};

/// Rows whose milliprobabilities sum further than this from 1000 are rejected.
pub const ROW_SUM_TOLERANCE: u32 = 10;

pub const STATE_VECTOR_HEADER: [&str; 8] = ["scid_", "loc1", "subset", "C", "N", "M", "T", "E"];
pub const FEATURE_DEF_HEADER: [&str; 6] = [
    "feature",
    "category",
    "subtype",
    "pct_change",
    "status",
    "bins",
];
pub const FEATURE_TABLE_HEADER: [&str; 7] = ["feature", "bin", "C", "N", "M", "T", "E"];
pub const BIN_HEADER: [&str; 3] = ["scid_", "feature", "bin"];

/// How repeated protein ids in a state-vector file are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    #[default]
    Reject,
    KeepFirst,
}

/// Everything needed to localize proteins.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub proteins: Vec<ProteinRecord>,
    pub features: Vec<FeatureDef>,
    pub feature_table: FeatureVectorTable,
    pub bins: BinAssignment,
}

impl Dataset {
    pub fn protein(&self, id: &str) -> Option<&ProteinRecord> {
        self.proteins.iter().find(|p| p.id == id)
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureDef> {
        self.features.iter().find(|f| f.name == name)
    }

    /// Bin and feature vector that `feature` contributes to `protein`.
    pub fn feature_vector(
        &self,
        protein: &str,
        feature: &str,
    ) -> Result<(usize, &[f64; N_COMPARTMENTS])> {
        let bin = self
            .bins
            .get(protein, feature)
            .ok_or_else(|| Error::MissingAssignment {
                protein: protein.to_string(),
                feature: feature.to_string(),
            })?;
        let fv = self
            .feature_table
            .get(feature, bin)
            .ok_or_else(|| Error::MissingTableEntry {
                feature: feature.to_string(),
                bin,
            })?;
        Ok((bin, fv))
    }
}

/// One problem found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    MissingAssignment {
        protein: String,
        feature: String,
    },
    MissingTableEntry {
        protein: String,
        feature: String,
        bin: usize,
    },
    BinOutOfRange {
        protein: String,
        feature: String,
        bin: usize,
        bin_count: usize,
    },
    UnknownFeature(String),
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::MissingAssignment { protein, feature } => {
                write!(f, "missing bin assignment\t{protein}\t{feature}")
            }
            Issue::MissingTableEntry {
                protein,
                feature,
                bin,
            } => {
                write!(f, "no feature-table entry\t{protein}\t{feature}\t{bin}")
            }
            Issue::BinOutOfRange {
                protein,
                feature,
                bin,
                bin_count,
            } => {
                write!(
                    f,
                    "bin out of range\t{protein}\t{feature}\t{bin}\t(bins = {bin_count})"
                )
            }
            Issue::UnknownFeature(name) => write!(f, "unknown feature\t{name}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks that every protein can be chained through `selected` and that every
/// bin assignment resolves to a table entry.
pub fn validate_dataset(d: &Dataset, selected: &[String]) -> ValidationReport {
    let mut issues = Vec::new();
    let defs: HashMap<&str, &FeatureDef> =
        d.features.iter().map(|f| (f.name.as_str(), f)).collect();

    for name in selected {
        if !defs.contains_key(name.as_str()) {
            issues.push(Issue::UnknownFeature(name.clone()));
        }
    }
    for p in &d.proteins {
        for name in selected {
            if d.bins.get(&p.id, name).is_none() {
                issues.push(Issue::MissingAssignment {
                    protein: p.id.clone(),
                    feature: name.clone(),
                });
            }
        }
    }
    for (protein, feature, bin) in d.bins.iter() {
        if let Some(def) = defs.get(feature) {
            if bin >= def.bin_count {
                issues.push(Issue::BinOutOfRange {
                    protein: protein.to_string(),
                    feature: feature.to_string(),
                    bin,
                    bin_count: def.bin_count,
                });
                continue;
            }
        }
        if !d.feature_table.contains(feature, bin) {
            issues.push(Issue::MissingTableEntry {
                protein: protein.to_string(),
                feature: feature.to_string(),
                bin,
            });
        }
    }
    ValidationReport { issues }
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers. The first one
/// is checked against `header` (case-insensitively) and dropped.
fn data_lines<'a>(
    text: &'a str,
    header: &[&str],
    accept: impl Fn(usize, &str) -> bool,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
    let (lineno, first) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header line"))?;
    let got = split_fields(first);
    let ok = got.len() == header.len()
        && got
            .iter()
            .zip(header)
            .enumerate()
            .all(|(i, (g, h))| g.eq_ignore_ascii_case(h) || accept(i, g));
    if !ok {
        return Err(Error::parse(
            lineno,
            format!("expected header `{}`", header.join("\t")),
        ));
    }
    Ok(lines
        .map(|(n, l)| {
            let fields = split_fields(l);
            (n, fields)
        })
        .collect())
}

fn expect_columns(line: usize, fields: &[&str], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::parse(
            line,
            format!("expected {n} columns, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {s:?}")))
}

pub fn parse_state_vectors(text: &str) -> Result<Vec<ProteinRecord>> {
    parse_state_vectors_with(text, DuplicatePolicy::Reject)
}

pub fn parse_state_vectors_with(text: &str, policy: DuplicatePolicy) -> Result<Vec<ProteinRecord>> {
    // Files of unlabeled proteins may name the second column `bcl`.
    let lines = data_lines(text, &STATE_VECTOR_HEADER, |i, g| i == 1 && g == "bcl")?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(lines.len());
    for (n, f) in lines {
        expect_columns(n, &f, STATE_VECTOR_HEADER.len())?;
        let label = match f[1] {
            "?" => None,
            s => Some(
                s.parse::<Compartment>()
                    .map_err(|e| Error::parse(n, e.to_string()))?,
            ),
        };
        let subset: u8 = parse_num(n, "subset", f[2])?;
        if subset >= N_SUBSETS {
            return Err(Error::parse(n, format!("subset {subset} outside 0..6")));
        }
        let mut milli = [0u32; N_COMPARTMENTS];
        for (slot, s) in milli.iter_mut().zip(&f[3..]) {
            *slot = parse_num(n, "milliprobability", s)?;
        }
        let sum: u32 = milli.iter().sum();
        if sum.abs_diff(1000) > ROW_SUM_TOLERANCE {
            return Err(Error::parse(
                n,
                format!("milliprobabilities sum to {sum}, expected 1000 ± {ROW_SUM_TOLERANCE}"),
            ));
        }
        if !seen.insert(f[0].to_string()) {
            match policy {
                DuplicatePolicy::Reject => {
                    return Err(Error::parse(n, format!("duplicate protein id {}", f[0])))
                }
                DuplicatePolicy::KeepFirst => continue,
            }
        }
        let record = ProteinRecord::new(f[0], label, subset, milli)
            .map_err(|e| Error::parse(n, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn serialize_state_vectors(proteins: &[ProteinRecord]) -> String {
    let mut out = STATE_VECTOR_HEADER.join("\t");
    out.push('\n');
    for p in proteins {
        let label = p.label.map_or_else(|| "?".to_string(), |c| c.to_string());
        let _ = write!(out, "{}\t{}\t{}", p.id, label, p.subset);
        for m in p.milli {
            let _ = write!(out, "\t{m}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_feature_defs(text: &str) -> Result<Vec<FeatureDef>> {
    let lines = data_lines(text, &FEATURE_DEF_HEADER, |_, _| false)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(lines.len());
    for (n, f) in lines {
        expect_columns(n, &f, FEATURE_DEF_HEADER.len())?;
        let category = f[1]
            .parse()
            .map_err(|e: Error| Error::parse(n, e.to_string()))?;
        let pct_change: f64 = parse_num(n, "pct_change", f[3])?;
        let status = f[4]
            .parse()
            .map_err(|e: Error| Error::parse(n, e.to_string()))?;
        let bin_count: usize = parse_num(n, "bin count", f[5])?;
        if bin_count < 1 {
            return Err(Error::parse(n, "bin count must be at least 1"));
        }
        if !seen.insert(f[0].to_string()) {
            return Err(Error::parse(n, format!("duplicate feature {}", f[0])));
        }
        out.push(FeatureDef {
            name: f[0].to_string(),
            category,
            subtype: f[2].to_string(),
            pct_change,
            status,
            bin_count,
        });
    }
    Ok(out)
}

pub fn serialize_feature_defs(defs: &[FeatureDef]) -> String {
    let mut out = FEATURE_DEF_HEADER.join("\t");
    out.push('\n');
    for d in defs {
        let subtype = if d.subtype.is_empty() {
            "-"
        } else {
            &d.subtype
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            d.name,
            d.category.as_str(),
            subtype,
            d.pct_change,
            d.status.as_str(),
            d.bin_count
        );
    }
    out
}

/// Parses the feature table. When `defs` is given, bin indices are checked
/// against each feature's declared bin count.
pub fn parse_feature_table(text: &str, defs: Option<&[FeatureDef]>) -> Result<FeatureVectorTable> {
    let lines = data_lines(text, &FEATURE_TABLE_HEADER, |_, _| false)?;
    let bin_counts: Option<HashMap<&str, usize>> =
        defs.map(|ds| ds.iter().map(|d| (d.name.as_str(), d.bin_count)).collect());
    let mut table = FeatureVectorTable::new();
    for (n, f) in lines {
        expect_columns(n, &f, FEATURE_TABLE_HEADER.len())?;
        let bin: usize = parse_num(n, "bin index", f[1])?;
        if let Some(count) = bin_counts.as_ref().and_then(|m| m.get(f[0])) {
            if bin >= *count {
                return Err(Error::parse(
                    n,
                    format!("bin {bin} of {} exceeds declared bin count {count}", f[0]),
                ));
            }
        }
        let mut fractions = [0.0; N_COMPARTMENTS];
        for (slot, s) in fractions.iter_mut().zip(&f[2..]) {
            *slot = parse_num(n, "fraction", s)?;
        }
        match table.insert(f[0], bin, fractions) {
            Ok(None) => {}
            Ok(Some(_)) => {
                return Err(Error::parse(
                    n,
                    format!("duplicate entry {} bin {bin}", f[0]),
                ))
            }
            Err(Error::InvalidComponent { value, .. }) => {
                return Err(Error::parse(n, format!("fraction {value} outside [0, 1]")))
            }
            Err(e) => return Err(Error::parse(n, e.to_string())),
        }
    }
    Ok(table)
}

/// Fractions are written with six decimals.
pub fn serialize_feature_table(table: &FeatureVectorTable) -> String {
    let mut out = FEATURE_TABLE_HEADER.join("\t");
    out.push('\n');
    for (feature, bin, v) in table.iter() {
        let _ = write!(out, "{feature}\t{bin}");
        for x in v {
            let _ = write!(out, "\t{x:.6}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_bin_assignments(text: &str) -> Result<BinAssignment> {
    let lines = data_lines(text, &BIN_HEADER, |_, _| false)?;
    let mut bins = BinAssignment::new();
    for (n, f) in lines {
        expect_columns(n, &f, BIN_HEADER.len())?;
        let bin: usize = parse_num(n, "bin index", f[2])?;
        if bins.insert(f[0], f[1], bin).is_some() {
            return Err(Error::parse(
                n,
                format!("duplicate assignment for {} / {}", f[0], f[1]),
            ));
        }
    }
    Ok(bins)
}

pub fn serialize_bin_assignments(bins: &BinAssignment) -> String {
    let mut out = BIN_HEADER.join("\t");
    out.push('\n');
    for (protein, feature, bin) in bins.iter() {
        let _ = writeln!(out, "{protein}\t{feature}\t{bin}");
    }
    out
}
