//! Foods, servings and per-nutrient diet reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::aggregation::{cobb_douglas_of, equal_weights, IntakeBundle, WeightVector};
use crate::error::{Error, Result};
use crate::nutrient_db::{NutrientTable, Sex, Unit};
use crate::utility::{segment_of, utility, Segment, UtilityParams};

/// Fixed leading columns of a food file; nutrient columns follow.
pub const FOOD_HEADER: [&str; 4] = ["id", "name", "serving_g", "price"];

#[derive(Debug, Clone, PartialEq)]
pub struct Food {
    pub id: String,
    pub name: String,
    pub serving_g: f64,
    /// Price per serving.
    pub price: Option<f64>,
    /// Nutrient content per serving in canonical mg.
    pub composition: BTreeMap<String, f64>,
}

impl Food {
    pub fn new(id: impl Into<String>, name: impl Into<String>, serving_g: f64, price: Option<f64>) -> Self {
        Food {
            id: id.into(),
            name: name.into(),
            serving_g,
            price,
            composition: BTreeMap::new(),
        }
    }

    pub fn with(mut self, nutrient: impl Into<String>, mg: f64) -> Self {
        self.composition.insert(nutrient.into(), mg);
        self
    }

    pub fn content(&self, nutrient: &str) -> f64 {
        self.composition.get(nutrient).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoodTable {
    foods: Vec<Food>,
    nutrients: Vec<String>,
}

impl FoodTable {
    /// Validates and builds a table. `nutrients` are the composition columns;
    /// every one must exist in `table`.
    pub fn new(foods: Vec<Food>, nutrients: Vec<String>, table: &NutrientTable) -> Result<Self> {
        for n in &nutrients {
            if !table.contains(n) {
                return Err(Error::UnknownNutrient(n.clone()));
            }
        }
        let mut ids: Vec<&str> = foods.iter().map(|f| f.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateId {
                kind: "food",
                id: w[0].to_string(),
            });
        }
        for f in &foods {
            if !(f.serving_g.is_finite() && f.serving_g > 0.0) {
                return Err(Error::InvalidParams(format!("{}: serving size must be > 0", f.id)));
            }
            if let Some(p) = f.price {
                if !(p.is_finite() && p >= 0.0) {
                    return Err(Error::InvalidParams(format!("{}: price must be non-negative", f.id)));
                }
            }
            for (n, &q) in &f.composition {
                if !nutrients.contains(n) {
                    return Err(Error::UnknownNutrient(n.clone()));
                }
                if !(q.is_finite() && q >= 0.0) {
                    return Err(Error::InvalidParams(format!("{}: {n} content must be non-negative", f.id)));
                }
            }
        }
        Ok(FoodTable { foods, nutrients })
    }

    pub fn load(path: impl AsRef<Path>, table: &NutrientTable) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_str(&text, table)
    }

    pub fn from_csv_str(text: &str, table: &NutrientTable) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut nutrients: Option<Vec<String>> = None;
        let mut foods: Vec<Food> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(|c| c.trim().is_empty()) {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line, message };
            let Some(columns) = &nutrients else {
                let header: Vec<&str> = record.iter().map(str::trim).collect();
                if header.len() < FOOD_HEADER.len() || header[..FOOD_HEADER.len()] != FOOD_HEADER {
                    return Err(parse_err(format!("header must start with `{}`", FOOD_HEADER.join(","))));
                }
                let cols: Vec<String> = header[FOOD_HEADER.len()..].iter().map(|s| s.to_string()).collect();
                for c in &cols {
                    if !table.contains(c) {
                        return Err(parse_err(format!("unknown nutrient column `{c}`")));
                    }
                }
                let mut sorted = cols.clone();
                sorted.sort();
                if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                    return Err(parse_err(format!("duplicate nutrient column `{}`", w[0])));
                }
                nutrients = Some(cols);
                continue;
            };
            if record.len() != FOOD_HEADER.len() + columns.len() {
                return Err(parse_err(format!(
                    "expected {} fields, found {}",
                    FOOD_HEADER.len() + columns.len(),
                    record.len()
                )));
            }
            let cell = |i: usize| record.get(i).unwrap_or("").trim();
            let number = |i: usize, what: &str| -> Result<Option<f64>> {
                let c = cell(i);
                if c.is_empty() {
                    return Ok(None);
                }
                match c.parse::<f64>() {
                    Ok(v) if v.is_finite() && v >= 0.0 => Ok(Some(v)),
                    Ok(v) => Err(parse_err(format!("{what}: must be non-negative, got {v}"))),
                    Err(_) => Err(parse_err(format!("{what}: `{c}` is not a number"))),
                }
            };
            let id = cell(0);
            if id.is_empty() {
                return Err(parse_err("empty food id".into()));
            }
            if foods.iter().any(|f| f.id == id) {
                return Err(Error::DuplicateId {
                    kind: "food",
                    id: id.to_string(),
                });
            }
            let serving_g = match number(2, "serving_g")? {
                Some(v) if v > 0.0 => v,
                _ => return Err(parse_err("serving_g must be > 0".into())),
            };
            let mut food = Food::new(id, cell(1), serving_g, number(3, "price")?);
            for (k, n) in columns.iter().enumerate() {
                if let Some(q) = number(FOOD_HEADER.len() + k, n)? {
                    food.composition.insert(n.clone(), q);
                }
            }
            foods.push(food);
        }
        Self::new(foods, nutrients.unwrap_or_default(), table)
    }

    pub fn foods(&self) -> &[Food] {
        &self.foods
    }

    /// Composition columns, in file order.
    pub fn nutrients(&self) -> &[String] {
        &self.nutrients
    }

    pub fn get(&self, id: &str) -> Option<&Food> {
        self.foods.iter().find(|f| f.id == id)
    }

    pub fn len(&self) -> usize {
        self.foods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.foods.is_empty()
    }

    /// Food ids in lexicographic order.
    pub fn sorted_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.foods.iter().map(|f| f.id.as_str()).collect();
        ids.sort_unstable();
        ids
    }
}

pub fn load_foods(path: impl AsRef<Path>, table: &NutrientTable) -> Result<FoodTable> {
    FoodTable::load(path, table)
}

/// Nutrient totals of a set of servings. Every composition column appears in
/// the bundle, zero when nothing supplies it.
pub fn intake_from_servings(foods: &FoodTable, servings: &BTreeMap<String, f64>) -> Result<IntakeBundle> {
    let mut totals: BTreeMap<&str, f64> = foods.nutrients().iter().map(|n| (n.as_str(), 0.0)).collect();
    for (id, &count) in servings {
        let food = foods.get(id).ok_or_else(|| Error::UnknownFood(id.clone()))?;
        if !(count.is_finite() && count >= 0.0) {
            return Err(Error::domain(format!("servings of {id} must be non-negative, got {count}")));
        }
        for (n, &q) in &food.composition {
            *totals.get_mut(n.as_str()).expect("composition columns are declared") += count * q;
        }
    }
    let mut bundle = IntakeBundle::new();
    for (n, mg) in totals {
        bundle.set(n, mg)?;
    }
    Ok(bundle)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub nutrient: String,
    pub unit: Unit,
    pub intake_mg: f64,
    pub segment: Segment,
    pub utility: f64,
    pub weight: f64,
    /// mg still missing to reach the RDA.
    pub deficit_mg: f64,
    /// mg above the UL, 0 without a UL.
    pub excess_mg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityReport {
    pub sex: Sex,
    pub rows: Vec<ReportRow>,
    pub additive: f64,
    /// `None` when some utility is negative (unbounded segment III).
    pub cobb_douglas: Option<f64>,
    pub leontief: f64,
    /// Nutrients in segment I or III.
    pub flags: Vec<String>,
    /// Nutrients without a usable RDA for this sex.
    pub excluded: Vec<String>,
    /// Nutrients whose UL was dropped as inconsistent.
    pub ul_dropped: Vec<String>,
}

/// Scores `bundle` nutrient by nutrient.
///
/// Without `weights`, every nutrient of the table is evaluated with equal
/// weights over those that have an RDA for `sex`; nutrients missing from the
/// bundle count as zero intake.
pub fn evaluate_diet(
    table: &NutrientTable,
    params: &UtilityParams,
    bundle: &IntakeBundle,
    sex: Sex,
    weights: Option<&WeightVector>,
) -> Result<UtilityReport> {
    let mut excluded = Vec::new();
    let default_weights;
    let weights = match weights {
        Some(w) => w,
        None => {
            excluded = table
                .iter()
                .filter(|p| p.rda(sex).is_none())
                .map(|p| p.id.clone())
                .collect();
            default_weights = equal_weights(&table.usable_ids(sex))?;
            &default_weights
        }
    };

    let mut rows = Vec::with_capacity(weights.len());
    let mut ul_dropped = Vec::new();
    for (id, beta) in weights.iter() {
        let profile = match table.profile_for(id, sex) {
            Ok(p) => p.canonical(),
            Err(Error::MissingThreshold { .. }) => {
                excluded.push(id.to_string());
                continue;
            }
            Err(Error::UnknownNutrient(id)) => {
                return Err(Error::WeightMismatch(format!("`{id}` is not in the nutrient table")))
            }
            Err(e) => return Err(e),
        };
        if table.ul_dropped(id) {
            ul_dropped.push(id.to_string());
        }
        let x = bundle.get(id);
        rows.push(ReportRow {
            nutrient: id.to_string(),
            unit: table.get(id).map_or(Unit::Mg, |p| p.unit),
            intake_mg: x,
            segment: segment_of(&profile, x)?,
            utility: utility(&profile, params, x)?.0,
            weight: beta,
            deficit_mg: (profile.rda - x).max(0.0),
            excess_mg: profile.ul.map_or(0.0, |ul| (x - ul).max(0.0)),
        });
    }

    let additive = rows.iter().map(|r| r.weight * r.utility).sum();
    let cobb_douglas = cobb_douglas_of(rows.iter().map(|r| (r.weight, r.utility))).ok().map(|u| u.0);
    let leontief = rows.iter().map(|r| r.utility).fold(f64::INFINITY, f64::min);
    let flags = rows
        .iter()
        .filter(|r| r.segment != Segment::Plateau)
        .map(|r| r.nutrient.clone())
        .collect();
    Ok(UtilityReport {
        sex,
        rows,
        additive,
        cobb_douglas,
        leontief: if leontief.is_finite() { leontief } else { 0.0 },
        flags,
        excluded,
        ul_dropped,
    })
}

impl UtilityReport {
    /// Σ β_i u_i recomputed from the rows.
    pub fn recomputed_additive(&self) -> f64 {
        self.rows.iter().map(|r| r.weight * r.utility).sum()
    }

    pub fn row(&self, nutrient: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.nutrient == nutrient)
    }

    /// Human-readable report; intakes in each nutrient's own unit.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sex: {}", self.sex);
        let _ = writeln!(
            out,
            "{:<14} {:>16} {:<4} {:<7} {:>9} {:>16} {:>16}",
            "nutrient", "intake", "unit", "segment", "utility", "deficit", "excess"
        );
        for r in &self.rows {
            let u = r.unit;
            let _ = writeln!(
                out,
                "{:<14} {:>16.6} {:<4} {:<7} {:>9.6} {:>16.6} {:>16.6}",
                r.nutrient,
                u.from_canonical(r.intake_mg),
                u.as_str(),
                r.segment.label(),
                r.utility,
                u.from_canonical(r.deficit_mg),
                u.from_canonical(r.excess_mg)
            );
        }
        let _ = writeln!(out, "utility {:.6}", self.additive);
        match self.cobb_douglas {
            Some(cd) => {
                let _ = writeln!(out, "cobb_douglas {cd:.6}");
            }
            None => out.push_str("cobb_douglas undefined\n"),
        }
        let _ = writeln!(out, "leontief {:.6}", self.leontief);
        let _ = writeln!(out, "flags: {}", list_or_none(&self.flags));
        let _ = writeln!(out, "excluded: {}", list_or_none(&self.excluded));
        if !self.ul_dropped.is_empty() {
            let _ = writeln!(out, "ul not enforced: {}", self.ul_dropped.join(", "));
        }
        out
    }

    /// `nutrient,intake_mg,segment,utility,deficit,excess` rows, all in mg,
    /// followed by `#`-prefixed aggregate lines.
    pub fn render_rows(&self) -> String {
        let mut out = String::from("nutrient,intake_mg,segment,utility,deficit,excess\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{},{:.6},{:.6},{:.6}",
                r.nutrient,
                r.intake_mg,
                r.segment.label(),
                r.utility,
                r.deficit_mg,
                r.excess_mg
            );
        }
        let _ = writeln!(out, "# additive,{:.6}", self.additive);
        match self.cobb_douglas {
            Some(cd) => {
                let _ = writeln!(out, "# cobb_douglas,{cd:.6}");
            }
            None => out.push_str("# cobb_douglas,undefined\n"),
        }
        let _ = writeln!(out, "# leontief,{:.6}", self.leontief);
        out
    }
}

fn list_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "none".into()
    } else {
        items.join(", ")
    }
}
