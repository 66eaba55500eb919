//! Compartments, probability state vectors, protein records and feature metadata.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of collapsed compartments.
pub const N_COMPARTMENTS: usize = 5;

/// Tolerance on the sum of a normalized state vector.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// The five generalized subcellular compartments, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Compartment {
    /// Cytoplasm.
    C,
    /// Nucleus.
    N,
    /// Mitochondria.
    M,
    /// Membrane (integral transmembrane proteins).
    T,
    /// Secretory pathway: ER, Golgi, vacuole, peroxisome, vesicles, extracellular.
    E,
}

impl Compartment {
    pub const ALL: [Compartment; N_COMPARTMENTS] = [
        Compartment::C,
        Compartment::N,
        Compartment::M,
        Compartment::T,
        Compartment::E,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            Compartment::C => 'C',
            Compartment::N => 'N',
            Compartment::M => 'M',
            Compartment::T => 'T',
            Compartment::E => 'E',
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Compartment::C => "cytoplasm",
            Compartment::N => "nucleus",
            Compartment::M => "mitochondria",
            Compartment::T => "membrane",
            Compartment::E => "secretory pathway",
        }
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Compartment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" => Ok(Compartment::C),
            "N" => Ok(Compartment::N),
            "M" => Ok(Compartment::M),
            "T" => Ok(Compartment::T),
            "E" => Ok(Compartment::E),
            other => Err(Error::Config(format!("unknown compartment {other:?}"))),
        }
    }
}

/// Index of the first maximum; ties resolve to the earliest compartment.
pub fn argmax_index(v: &[f64; N_COMPARTMENTS]) -> usize {
    let mut best = 0;
    for i in 1..N_COMPARTMENTS {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// A probability distribution over the five compartments.
///
/// Constructed only through [`normalize`] or [`StateVector::from_milli`], so every
/// component is non-negative and the components sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector([f64; N_COMPARTMENTS]);

impl StateVector {
    /// Builds a state vector from milliprobabilities (probabilities × 1000).
    pub fn from_milli(raw: [u32; N_COMPARTMENTS]) -> Result<Self> {
        normalize(raw.map(|m| f64::from(m) / 1000.0))
    }

    /// Wraps components already known to be a distribution.
    pub(crate) fn from_normalized(p: [f64; N_COMPARTMENTS]) -> Self {
        StateVector(p)
    }

    pub fn uniform() -> Self {
        StateVector([1.0 / N_COMPARTMENTS as f64; N_COMPARTMENTS])
    }

    pub fn components(&self) -> &[f64; N_COMPARTMENTS] {
        &self.0
    }

    pub fn get(&self, c: Compartment) -> f64 {
        self.0[c.index()]
    }

    pub fn argmax(&self) -> Compartment {
        argmax_compartment(self)
    }

    /// Replaces exact zeros with `floor` and renormalizes. Vectors without zeros
    /// are returned unchanged.
    pub fn with_floor(self, floor: f64) -> Self {
        if !self.0.contains(&0.0) {
            return self;
        }
        let filled = self.0.map(|p| if p == 0.0 { floor } else { p });
        normalize(filled).expect("floored vector has positive mass")
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }
}

impl std::ops::Index<Compartment> for StateVector {
    type Output = f64;

    fn index(&self, c: Compartment) -> &f64 {
        &self.0[c.index()]
    }
}

/// Scales a non-negative vector so its components sum to one.
pub fn normalize(v: [f64; N_COMPARTMENTS]) -> Result<StateVector> {
    for (index, &value) in v.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidComponent { index, value });
        }
    }
    let sum: f64 = v.iter().sum();
    if sum == 0.0 {
        return Err(Error::DegenerateStateVector);
    }
    Ok(StateVector(v.map(|x| x / sum)))
}

pub fn argmax_compartment(s: &StateVector) -> Compartment {
    Compartment::ALL[argmax_index(&s.0)]
}

/// Number of cross-validation subsets.
pub const N_SUBSETS: u8 = 7;

/// One protein from the state-vector dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ProteinRecord {
    pub id: String,
    /// `None` for proteins of unknown localization.
    pub label: Option<Compartment>,
    pub subset: u8,
    /// Prior as stored on disk, in milliprobabilities.
    pub milli: [u32; N_COMPARTMENTS],
    pub prior: StateVector,
}

impl ProteinRecord {
    pub fn new(
        id: impl Into<String>,
        label: Option<Compartment>,
        subset: u8,
        milli: [u32; N_COMPARTMENTS],
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Config("empty protein id".into()));
        }
        if subset >= N_SUBSETS {
            return Err(Error::Config(format!(
                "subset {subset} outside 0..{}",
                N_SUBSETS - 1
            )));
        }
        let prior = StateVector::from_milli(milli)?;
        Ok(ProteinRecord {
            id,
            label,
            subset,
            milli,
            prior,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureCategory {
    Motif,
    OverallSequence,
    WholeGenome,
}

impl FeatureCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureCategory::Motif => "motif",
            FeatureCategory::OverallSequence => "overall-sequence",
            FeatureCategory::WholeGenome => "whole-genome",
        }
    }
}

impl FromStr for FeatureCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "motif" => Ok(FeatureCategory::Motif),
            "overall" | "overallsequence" => Ok(FeatureCategory::OverallSequence),
            "wholegenome" => Ok(FeatureCategory::WholeGenome),
            _ => Err(Error::Config(format!("unknown feature category {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureStatus {
    Important,
    Included,
    Redundant,
}

impl FeatureStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureStatus::Important => "Important",
            FeatureStatus::Included => "Included",
            FeatureStatus::Redundant => "Redundant",
        }
    }
}

impl FromStr for FeatureStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "important" => Ok(FeatureStatus::Important),
            "included" => Ok(FeatureStatus::Included),
            "redundant" => Ok(FeatureStatus::Redundant),
            _ => Err(Error::Config(format!("unknown feature status {s:?}"))),
        }
    }
}

/// Metadata for one binned feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDef {
    pub name: String,
    pub category: FeatureCategory,
    pub subtype: String,
    /// Accuracy change in percentage points attributed to the feature.
    pub pct_change: f64,
    pub status: FeatureStatus,
    pub bin_count: usize,
}

/// Per-bin compartment fractions, keyed by feature name then bin index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVectorTable {
    entries: BTreeMap<String, BTreeMap<usize, [f64; N_COMPARTMENTS]>>,
}

impl FeatureVectorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an entry, returning the previous one if present. Fractions must lie in [0, 1].
    pub fn insert(
        &mut self,
        feature: impl Into<String>,
        bin: usize,
        fractions: [f64; N_COMPARTMENTS],
    ) -> Result<Option<[f64; N_COMPARTMENTS]>> {
        for (index, &value) in fractions.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidComponent { index, value });
            }
        }
        Ok(self
            .entries
            .entry(feature.into())
            .or_default()
            .insert(bin, fractions))
    }

    pub fn get(&self, feature: &str, bin: usize) -> Option<&[f64; N_COMPARTMENTS]> {
        self.entries.get(feature)?.get(&bin)
    }

    pub fn contains(&self, feature: &str, bin: usize) -> bool {
        self.get(feature, bin).is_some()
    }

    /// Entries in (feature, bin) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, &[f64; N_COMPARTMENTS])> {
        self.entries
            .iter()
            .flat_map(|(f, bins)| bins.iter().map(move |(b, v)| (f.as_str(), *b, v)))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Precomputed bin index of every (protein, feature) pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BinAssignment {
    entries: BTreeMap<String, BTreeMap<String, usize>>,
}

impl BinAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        protein: impl Into<String>,
        feature: impl Into<String>,
        bin: usize,
    ) -> Option<usize> {
        self.entries
            .entry(protein.into())
            .or_default()
            .insert(feature.into(), bin)
    }

    pub fn remove(&mut self, protein: &str, feature: &str) -> Option<usize> {
        let bins = self.entries.get_mut(protein)?;
        let old = bins.remove(feature);
        if bins.is_empty() {
            self.entries.remove(protein);
        }
        old
    }

    pub fn get(&self, protein: &str, feature: &str) -> Option<usize> {
        self.entries.get(protein)?.get(feature).copied()
    }

    /// Entries in (protein, feature) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.entries
            .iter()
            .flat_map(|(p, fs)| fs.iter().map(move |(f, b)| (p.as_str(), f.as_str(), *b)))
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
