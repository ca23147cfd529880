//! Nutrient threshold dataset: RDA per sex and tolerable upper intake level.
//!
//! Tables are read from a comma-separated file with the header
//! `id,name,unit,rda_men,rda_women,ul,notes`. An empty cell means the value is
//! absent; absent values are never read as zero. The adult reference table
//! ships with the crate and is available through [`NutrientTable::bundled`].

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Expected header of a nutrient table file.
pub const TABLE_HEADER: [&str; 7] = ["id", "name", "unit", "rda_men", "rda_women", "ul", "notes"];

const BUNDLED_TABLE: &str = include_str!("../data/table1.csv");

/// Mass unit a nutrient is tabulated in. The canonical unit is mg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Mcg,
    Mg,
    G,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Mcg => "mcg",
            Unit::Mg => "mg",
            Unit::G => "g",
        }
    }

    /// Converts a quantity expressed in canonical mg back into this unit.
    pub fn from_canonical(self, mg: f64) -> f64 {
        match self {
            Unit::Mcg => mg * 1000.0,
            Unit::Mg => mg,
            Unit::G => mg / 1000.0,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mcg" | "µg" | "ug" => Ok(Unit::Mcg),
            "mg" => Ok(Unit::Mg),
            "g" => Ok(Unit::G),
            other => Err(Error::InvalidParams(format!("unknown unit `{other}`"))),
        }
    }
}

/// Converts `quantity` in `unit` into canonical mg.
pub fn to_canonical(quantity: f64, unit: Unit) -> f64 {
    match unit {
        Unit::Mcg => quantity / 1000.0,
        Unit::Mg => quantity,
        Unit::G => quantity * 1000.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sex {
    Men,
    Women,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Men => "men",
            Sex::Women => "women",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "men" | "man" | "male" | "m" => Ok(Sex::Men),
            "women" | "woman" | "female" | "f" | "w" => Ok(Sex::Women),
            other => Err(Error::InvalidParams(format!("unknown sex `{other}`"))),
        }
    }
}

/// Whether a nutrient has a tolerable upper intake level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UlType {
    /// A UL is defined; intake above it is harmful.
    TypeA,
    /// No UL; the plateau extends indefinitely.
    TypeB,
}

/// One row of the threshold table, quantities in the row's own unit.
#[derive(Debug, Clone, PartialEq)]
pub struct NutrientProfile {
    pub id: String,
    pub name: String,
    pub unit: Unit,
    pub rda_men: Option<f64>,
    pub rda_women: Option<f64>,
    pub ul: Option<f64>,
    pub notes: String,
}

impl NutrientProfile {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        unit: Unit,
        rda_men: Option<f64>,
        rda_women: Option<f64>,
        ul: Option<f64>,
    ) -> Result<Self> {
        let profile = NutrientProfile {
            id: id.into(),
            name: name.into(),
            unit,
            rda_men,
            rda_women,
            ul,
            notes: String::new(),
        };
        profile.check()?;
        Ok(profile)
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    fn check(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::InvalidParams("empty nutrient id".into()));
        }
        for (label, value) in [("rda_men", self.rda_men), ("rda_women", self.rda_women), ("ul", self.ul)] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "{}: {label} must be strictly positive, got {v}",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ul_type(&self) -> UlType {
        if self.ul.is_some() {
            UlType::TypeA
        } else {
            UlType::TypeB
        }
    }

    pub fn rda(&self, sex: Sex) -> Option<f64> {
        match sex {
            Sex::Men => self.rda_men,
            Sex::Women => self.rda_women,
        }
    }

    /// UL below the larger of the two RDAs. Such rows get no UL enforcement
    /// by default, for either sex.
    pub fn ul_below_rda(&self) -> bool {
        matches!((self.ul, self.max_rda()), (Some(ul), Some(rda)) if ul < rda)
    }

    fn max_rda(&self) -> Option<f64> {
        match (self.rda_men, self.rda_women) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Thresholds of one nutrient for one sex, ready for utility evaluation.
///
/// Quantities are expressed in `unit`; every intake handed to the utility
/// functions together with this profile must use the same unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedProfile {
    pub id: String,
    pub unit: Unit,
    pub rda: f64,
    pub ul: Option<f64>,
}

impl ResolvedProfile {
    pub fn new(id: impl Into<String>, unit: Unit, rda: f64, ul: Option<f64>) -> Result<Self> {
        let profile = ResolvedProfile {
            id: id.into(),
            unit,
            rda,
            ul,
        };
        profile.check()?;
        Ok(profile)
    }

    /// Rejects non-positive thresholds and UL < RDA.
    pub fn check(&self) -> Result<()> {
        if !(self.rda.is_finite() && self.rda > 0.0) {
            return Err(Error::domain(format!("{}: RDA must be positive", self.id)));
        }
        if let Some(ul) = self.ul {
            if !(ul.is_finite() && ul > 0.0) {
                return Err(Error::domain(format!("{}: UL must be positive", self.id)));
            }
            if ul < self.rda {
                return Err(Error::InconsistentThresholds {
                    id: self.id.clone(),
                    rda: self.rda,
                    ul,
                });
            }
        }
        Ok(())
    }

    pub fn ul_type(&self) -> UlType {
        if self.ul.is_some() {
            UlType::TypeA
        } else {
            UlType::TypeB
        }
    }

    /// Width of segment II, `None` when it is unbounded.
    pub fn plateau_width(&self) -> Option<f64> {
        self.ul.map(|ul| ul - self.rda)
    }

    /// The same thresholds expressed in canonical mg.
    pub fn canonical(&self) -> ResolvedProfile {
        ResolvedProfile {
            id: self.id.clone(),
            unit: Unit::Mg,
            rda: to_canonical(self.rda, self.unit),
            ul: self.ul.map(|ul| to_canonical(ul, self.unit)),
        }
    }

    /// Converts a canonical mg quantity into this profile's unit.
    pub fn from_canonical(&self, mg: f64) -> f64 {
        self.unit.from_canonical(mg)
    }
}

/// How [`NutrientTable::profile_for_with`] treats a UL that lies below the RDA.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResolveOptions {
    /// Keep an inconsistent UL, which makes resolution fail with
    /// [`Error::InconsistentThresholds`]. By default the UL is dropped and the
    /// nutrient is handled as type B.
    pub keep_inconsistent_ul: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub path: String,
    /// Hex SHA-256 of the source bytes.
    pub checksum: String,
}

#[derive(Debug, Clone)]
pub struct NutrientTable {
    entries: Vec<NutrientProfile>,
    index: HashMap<String, usize>,
    provenance: Provenance,
}

impl PartialEq for NutrientTable {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl NutrientTable {
    /// The adult reference table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED_TABLE, "<bundled>").expect("bundled nutrient table is well formed")
    }

    /// Raw text of the bundled table.
    pub fn bundled_csv() -> &'static str {
        BUNDLED_TABLE
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    pub fn from_csv_str(text: &str, source: &str) -> Result<Self> {
        let provenance = Provenance {
            path: source.to_string(),
            checksum: sha256_hex(text.as_bytes()),
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());

        let mut entries = Vec::new();
        let mut seen_header = false;
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(|cell| cell.trim().is_empty()) {
                continue;
            }
            if !seen_header {
                let header: Vec<&str> = record.iter().map(str::trim).collect();
                if header != TABLE_HEADER {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected header `{}`", TABLE_HEADER.join(",")),
                    });
                }
                seen_header = true;
                continue;
            }
            entries.push(parse_row(&record, line)?);
        }
        Self::build(entries, provenance)
    }

    /// Builds an in-memory table, enforcing unique ids.
    pub fn from_profiles(entries: Vec<NutrientProfile>) -> Result<Self> {
        for profile in &entries {
            profile.check()?;
        }
        let provenance = Provenance {
            path: "<memory>".into(),
            checksum: String::new(),
        };
        let mut table = Self::build(entries, provenance)?;
        table.provenance.checksum = sha256_hex(table.to_csv().as_bytes());
        Ok(table)
    }

    fn build(entries: Vec<NutrientProfile>, provenance: Provenance) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, profile) in entries.iter().enumerate() {
            if index.insert(profile.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "nutrient",
                    id: profile.id.clone(),
                });
            }
        }
        Ok(NutrientTable {
            entries,
            index,
            provenance,
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &NutrientProfile> {
        self.entries.iter()
    }

    pub fn get(&self, id: &str) -> Option<&NutrientProfile> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Replaces the row with the same id, or appends a new one. This is how a
    /// caller supplies thresholds for rows the table leaves blank.
    pub fn upsert(&mut self, profile: NutrientProfile) -> Result<()> {
        profile.check()?;
        match self.index.get(&profile.id) {
            Some(&i) => self.entries[i] = profile,
            None => {
                self.index.insert(profile.id.clone(), self.entries.len());
                self.entries.push(profile);
            }
        }
        Ok(())
    }

    /// Table contents in the on-disk format.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(TABLE_HEADER).expect("in-memory write");
        for p in &self.entries {
            writer
                .write_record([
                    p.id.as_str(),
                    p.name.as_str(),
                    p.unit.as_str(),
                    &fmt_opt(p.rda_men),
                    &fmt_opt(p.rda_women),
                    &fmt_opt(p.ul),
                    p.notes.as_str(),
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn profile_for(&self, id: &str, sex: Sex) -> Result<ResolvedProfile> {
        self.profile_for_with(id, sex, ResolveOptions::default())
    }

    pub fn profile_for_with(&self, id: &str, sex: Sex, options: ResolveOptions) -> Result<ResolvedProfile> {
        let profile = self.get(id).ok_or_else(|| Error::UnknownNutrient(id.to_string()))?;
        let rda = profile.rda(sex).ok_or_else(|| Error::MissingThreshold {
            id: id.to_string(),
            sex: sex.as_str(),
        })?;
        let ul = match profile.ul {
            Some(_) if profile.ul_below_rda() && !options.keep_inconsistent_ul => None,
            other => other,
        };
        ResolvedProfile::new(id, profile.unit, rda, ul)
    }

    /// Ids whose thresholds resolve for `sex`, in table order.
    pub fn usable_ids(&self, sex: Sex) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|p| p.rda(sex).is_some())
            .map(|p| p.id.as_str())
            .collect()
    }

    /// Whether default resolution drops this row's UL.
    pub fn ul_dropped(&self, id: &str) -> bool {
        self.get(id).is_some_and(NutrientProfile::ul_below_rda)
    }
}

fn parse_row(record: &csv::StringRecord, line: u64) -> Result<NutrientProfile> {
    if record.len() != TABLE_HEADER.len() {
        return Err(Error::Parse {
            line,
            message: format!("expected {} fields, found {}", TABLE_HEADER.len(), record.len()),
        });
    }
    let cell = |i: usize| record.get(i).unwrap_or("").trim();
    let id = cell(0);
    if id.is_empty() {
        return Err(Error::Parse {
            line,
            message: "empty nutrient id".into(),
        });
    }
    let unit = cell(2).parse::<Unit>().map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let quantity = |i: usize| parse_quantity(cell(i), TABLE_HEADER[i], line);
    Ok(NutrientProfile {
        id: id.to_string(),
        name: cell(1).to_string(),
        unit,
        rda_men: quantity(3)?,
        rda_women: quantity(4)?,
        ul: quantity(5)?,
        notes: record.get(6).unwrap_or("").to_string(),
    })
}

pub(crate) fn parse_quantity(cell: &str, column: &str, line: u64) -> Result<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(Some(v)),
        Ok(v) => Err(Error::Parse {
            line,
            message: format!("{column}: quantity must be strictly positive, got {v}"),
        }),
        Err(_) => Err(Error::Parse {
            line,
            message: format!("{column}: `{cell}` is not a number"),
        }),
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_nutrient_table(path: impl AsRef<Path>) -> Result<NutrientTable> {
    NutrientTable::load(path)
}

pub fn profile_for(table: &NutrientTable, id: &str, sex: Sex) -> Result<ResolvedProfile> {
    table.profile_for(id, sex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
            Severity::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FindingCode {
    UlBelowRda,
    MissingRda,
    UnitSuspect,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::UlBelowRda => "UL_BELOW_RDA",
            FindingCode::MissingRda => "MISSING_RDA",
            FindingCode::UnitSuspect => "UNIT_SUSPECT",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub nutrient: String,
    pub severity: Severity,
    pub code: FindingCode,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.severity, self.code.as_str(), self.nutrient, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn for_nutrient<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.findings.iter().filter(move |f| f.nutrient == id)
    }

    /// One finding per line, `SEVERITY code nutrient: message`.
    pub fn render(&self) -> String {
        self.findings.iter().map(|f| format!("{f}\n")).collect()
    }
}

/// A UL below the RDA is plausible as a unit slip when shifting it by 1000x
/// lands it within this multiple of the RDA. The widest consistent UL/RDA
/// ratio in the reference table is about 67 (vitamin E).
const UNIT_SHIFT_MAX_RATIO: f64 = 100.0;

/// Checks every row for threshold anomalies. Findings follow table order.
pub fn validate(table: &NutrientTable) -> ValidationReport {
    let mut findings = Vec::new();
    for p in table.iter() {
        let mut push = |severity, code, message: String| {
            findings.push(Finding {
                nutrient: p.id.clone(),
                severity,
                code,
                message,
            })
        };
        match (p.rda_men, p.rda_women) {
            (None, None) => push(
                Severity::Info,
                FindingCode::MissingRda,
                "no numeric RDA for either sex; supply a profile before use".into(),
            ),
            (None, Some(_)) => push(Severity::Warning, FindingCode::MissingRda, "no RDA for men".into()),
            (Some(_), None) => push(Severity::Warning, FindingCode::MissingRda, "no RDA for women".into()),
            _ => {}
        }
        if let (Some(ul), Some(rda)) = (p.ul, p.max_rda()) {
            if ul < rda {
                let shifted = ul * 1000.0 / rda;
                if (1.0..=UNIT_SHIFT_MAX_RATIO).contains(&shifted) {
                    push(
                        Severity::Warning,
                        FindingCode::UnitSuspect,
                        format!(
                            "UL {ul} {} is below RDA {rda} {}; plausible if the UL is in {}",
                            p.unit,
                            p.unit,
                            larger_unit(p.unit)
                        ),
                    );
                } else {
                    push(
                        Severity::Error,
                        FindingCode::UlBelowRda,
                        format!("UL {ul} {} is below RDA {rda} {}", p.unit, p.unit),
                    );
                }
            }
        }
    }
    ValidationReport { findings }
}

fn larger_unit(unit: Unit) -> &'static str {
    match unit {
        Unit::Mcg => "mg",
        Unit::Mg => "g",
        Unit::G => "kg",
    }
}
