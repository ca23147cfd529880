//! Daily totals from per-nutrient utilities.
//!
//! The additive aggregator is the model's total utility. Cobb–Douglas and
//! Leontief are provided as contrast aggregators: both collapse to zero as soon
//! as a single nutrient is missing, which the additive form does not.
//! Concrete utilities score one physiological function that exactly one
//! nutrient serves; no other nutrient can stand in for it.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nutrient_db::{parse_quantity, to_canonical, NutrientTable, ResolvedProfile, Sex, Unit};
use crate::utility::{utility, UtilityParams, UtilityValue};

/// Header of an intake file.
pub const INTAKE_HEADER: [&str; 3] = ["nutrient_id", "amount", "unit"];

/// Daily intake per nutrient in canonical mg. Missing nutrients count as 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntakeBundle {
    quantities: BTreeMap<String, f64>,
    pub label: Option<String>,
}

impl IntakeBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Sets the intake of `id` in canonical mg.
    pub fn set(&mut self, id: impl Into<String>, mg: f64) -> Result<()> {
        if !(mg.is_finite() && mg >= 0.0) {
            return Err(Error::domain(format!("intake must be non-negative, got {mg}")));
        }
        self.quantities.insert(id.into(), mg);
        Ok(())
    }

    pub fn with(mut self, id: impl Into<String>, mg: f64) -> Result<Self> {
        self.set(id, mg)?;
        Ok(self)
    }

    /// Sets the intake of `id` from a quantity in `unit`.
    pub fn set_in(&mut self, id: impl Into<String>, amount: f64, unit: Unit) -> Result<()> {
        self.set(id, to_canonical(amount, unit))
    }

    pub fn get(&self, id: &str) -> f64 {
        self.quantities.get(id).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.quantities.contains_key(id)
    }

    pub fn remove(&mut self, id: &str) -> Option<f64> {
        self.quantities.remove(id)
    }

    /// Entries sorted by nutrient id.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.quantities.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.quantities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantities.is_empty()
    }

    /// Intakes of `profiles` in each profile's own unit.
    pub fn point_for(&self, profiles: &[ResolvedProfile]) -> Vec<f64> {
        profiles.iter().map(|p| p.from_canonical(self.get(&p.id))).collect()
    }

    pub fn load(path: impl AsRef<Path>, table: &NutrientTable) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_str(&text, table)
    }

    /// Parses `nutrient_id,amount,unit` rows. Amounts are converted to mg.
    pub fn from_csv_str(text: &str, table: &NutrientTable) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut bundle = IntakeBundle::new();
        let mut seen_header = false;
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(|c| c.trim().is_empty()) {
                continue;
            }
            if !seen_header {
                let header: Vec<&str> = record.iter().map(str::trim).collect();
                if header != INTAKE_HEADER {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected header `{}`", INTAKE_HEADER.join(",")),
                    });
                }
                seen_header = true;
                continue;
            }
            if record.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", record.len()),
                });
            }
            let id = record[0].trim();
            if !table.contains(id) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown nutrient `{id}`"),
                });
            }
            if bundle.contains(id) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate nutrient `{id}`"),
                });
            }
            let amount = parse_amount(record[1].trim(), line)?;
            let unit = record[2].parse::<Unit>().map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            bundle.set_in(id, amount, unit)?;
        }
        Ok(bundle)
    }
}

fn parse_amount(cell: &str, line: u64) -> Result<f64> {
    if cell.parse::<f64>() == Ok(0.0) {
        return Ok(0.0);
    }
    parse_quantity(cell, "amount", line)?.ok_or_else(|| Error::Parse {
        line,
        message: "amount is empty".into(),
    })
}

/// Aggregation weights β. Non-negative and summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<(String, f64)>,
}

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

impl WeightVector {
    pub fn new(weights: Vec<(String, f64)>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParams("empty weight vector".into()));
        }
        let mut ids: Vec<&str> = weights.iter().map(|(id, _)| id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateId {
                kind: "weight",
                id: w[0].to_string(),
            });
        }
        if let Some((id, b)) = weights.iter().find(|(_, b)| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidParams(format!("weight for {id} must be non-negative, got {b}")));
        }
        let sum: f64 = weights.iter().map(|(_, b)| b).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidParams(format!("weights sum to {sum}, expected 1")));
        }
        Ok(WeightVector { weights })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(id, b)| (id.as_str(), *b))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.weights.iter().map(|(id, _)| id.as_str())
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.weights.iter().find(|(k, _)| k == id).map(|(_, b)| *b)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// β_i = 1/k for each of the k ids.
pub fn equal_weights<S: AsRef<str>>(ids: &[S]) -> Result<WeightVector> {
    if ids.is_empty() {
        return Err(Error::InvalidParams("equal weights need at least one nutrient".into()));
    }
    let beta = 1.0 / ids.len() as f64;
    WeightVector::new(ids.iter().map(|id| (id.as_ref().to_string(), beta)).collect())
}

fn resolve(table: &NutrientTable, id: &str, sex: Sex) -> Result<ResolvedProfile> {
    match table.profile_for(id, sex) {
        Ok(p) => Ok(p.canonical()),
        Err(Error::UnknownNutrient(id)) => Err(Error::WeightMismatch(format!("`{id}` is not in the nutrient table"))),
        Err(e) => Err(e),
    }
}

/// Utility of each listed nutrient under `bundle`, in the listed order.
pub fn nutrient_utilities<'a>(
    table: &NutrientTable,
    params: &UtilityParams,
    bundle: &IntakeBundle,
    ids: impl IntoIterator<Item = &'a str>,
    sex: Sex,
) -> Result<Vec<(&'a str, UtilityValue)>> {
    ids.into_iter()
        .map(|id| {
            let profile = resolve(table, id, sex)?;
            Ok((id, utility(&profile, params, bundle.get(id))?))
        })
        .collect()
}

/// Σ β_i u(x_i) over the nutrients in `weights`.
pub fn total_utility(
    table: &NutrientTable,
    params: &UtilityParams,
    bundle: &IntakeBundle,
    weights: &WeightVector,
    sex: Sex,
) -> Result<UtilityValue> {
    let utilities = nutrient_utilities(table, params, bundle, weights.ids(), sex)?;
    Ok(UtilityValue(
        weights.iter().zip(&utilities).map(|((_, beta), (_, u))| beta * u.0).sum(),
    ))
}

/// Π u(x_i)^β_i, with 0^0 = 1. Undefined for negative utilities, which can
/// only arise with an unbounded segment III.
pub fn cobb_douglas_utility(
    table: &NutrientTable,
    params: &UtilityParams,
    bundle: &IntakeBundle,
    weights: &WeightVector,
    sex: Sex,
) -> Result<UtilityValue> {
    let utilities = nutrient_utilities(table, params, bundle, weights.ids(), sex)?;
    cobb_douglas_of(weights.iter().map(|(_, b)| b).zip(utilities.iter().map(|(_, u)| u.0)))
}

pub(crate) fn cobb_douglas_of(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<UtilityValue> {
    let mut product = 1.0;
    for (beta, u) in pairs {
        if u < 0.0 {
            return Err(Error::domain("Cobb-Douglas is undefined for negative utilities"));
        }
        product *= u.powf(beta);
    }
    Ok(UtilityValue(product))
}

/// min_i u(x_i) over `ids`.
pub fn leontief_utility<S: AsRef<str>>(
    table: &NutrientTable,
    params: &UtilityParams,
    bundle: &IntakeBundle,
    ids: &[S],
    sex: Sex,
) -> Result<UtilityValue> {
    if ids.is_empty() {
        return Err(Error::InvalidParams("Leontief needs at least one nutrient".into()));
    }
    let utilities = nutrient_utilities(table, params, bundle, ids.iter().map(AsRef::as_ref), sex)?;
    Ok(UtilityValue(
        utilities.iter().map(|(_, u)| u.0).fold(f64::INFINITY, f64::min),
    ))
}

/// A specific physiological function and the one nutrient that serves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteFunctionSpec {
    pub function_id: String,
    pub nutrient: String,
    pub description: String,
}

impl ConcreteFunctionSpec {
    pub fn new(function_id: impl Into<String>, nutrient: impl Into<String>, description: impl Into<String>) -> Self {
        ConcreteFunctionSpec {
            function_id: function_id.into(),
            nutrient: nutrient.into(),
            description: description.into(),
        }
    }

    /// Functions known by id: `fluid-balance` (sodium) and `low-light-vision`
    /// (vitamin A).
    pub fn builtin(function_id: &str) -> Result<Self> {
        match function_id.replace('_', "-").as_str() {
            "fluid-balance" => Ok(Self::new(
                "fluid-balance",
                "sodium",
                "keeping body fluids in balance",
            )),
            "low-light-vision" => Ok(Self::new(
                "low-light-vision",
                "vitamin_a",
                "rhodopsin synthesis for seeing under low light",
            )),
            _ => Err(Error::UnknownFunction(function_id.to_string())),
        }
    }
}

/// Utility of the function's contributing nutrient. Every other bundle entry
/// is ignored.
pub fn concrete_utility(
    spec: &ConcreteFunctionSpec,
    table: &NutrientTable,
    params: &UtilityParams,
    bundle: &IntakeBundle,
    sex: Sex,
) -> Result<UtilityValue> {
    let profile = table.profile_for(&spec.nutrient, sex)?.canonical();
    utility(&profile, params, bundle.get(&spec.nutrient))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at_rda(table: &NutrientTable, ids: &[&str], sex: Sex) -> IntakeBundle {
        let mut bundle = IntakeBundle::new();
        for id in ids {
            let p = table.profile_for(id, sex).unwrap();
            bundle.set_in(*id, p.rda, p.unit).unwrap();
        }
        bundle
    }

    #[test]
    fn equal_weight_vectors() {
        let w = equal_weights(&["a", "b", "c", "d"]).unwrap();
        assert!(w.iter().all(|(_, b)| b == 0.25));
        assert_eq!(equal_weights(&["a"]).unwrap().get("a"), Some(1.0));
        let w = equal_weights(&["a", "b", "c"]).unwrap();
        let sum: f64 = w.iter().map(|(_, b)| b).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        assert!(w.iter().all(|(_, b)| b == 1.0 / 3.0));
        assert!(equal_weights::<&str>(&[]).is_err());
        assert!(matches!(equal_weights(&["a", "a"]), Err(Error::DuplicateId { .. })));
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![("a".into(), 0.5), ("b".into(), 0.4)]).is_err());
        assert!(WeightVector::new(vec![("a".into(), 1.5), ("b".into(), -0.5)]).is_err());
        assert!(WeightVector::new(vec![("a".into(), 0.3), ("b".into(), 0.7)]).is_ok());
    }

    #[test]
    fn additive_examples() {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let ids = ["vitamin_d", "vitamin_c"];
        let w = equal_weights(&ids).unwrap();
        let bundle = at_rda(&table, &ids, Sex::Men);
        assert_eq!(total_utility(&table, &params, &bundle, &w, Sex::Men).unwrap().0, 1.0);

        let mut bundle = IntakeBundle::new();
        bundle.set_in("vitamin_d", 30.0, Unit::Mcg).unwrap();
        assert_eq!(total_utility(&table, &params, &bundle, &w, Sex::Men).unwrap().0, 0.5);
        assert_eq!(total_utility(&table, &params, &IntakeBundle::new(), &w, Sex::Men).unwrap().0, 0.0);

        let bad = equal_weights(&["vitamin_d", "kryptonite"]).unwrap();
        assert!(matches!(
            total_utility(&table, &params, &bundle, &bad, Sex::Men),
            Err(Error::WeightMismatch(_))
        ));
    }

    #[test]
    fn contrast_aggregators() {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let ids = ["vitamin_d", "vitamin_c", "iron", "zinc"];
        let w = equal_weights(&ids).unwrap();
        let mut bundle = at_rda(&table, &ids, Sex::Women);
        assert_eq!(cobb_douglas_utility(&table, &params, &bundle, &w, Sex::Women).unwrap().0, 1.0);
        assert_eq!(leontief_utility(&table, &params, &bundle, &ids, Sex::Women).unwrap().0, 1.0);

        bundle.set("zinc", 0.0).unwrap();
        assert_eq!(total_utility(&table, &params, &bundle, &w, Sex::Women).unwrap().0, 0.75);
        assert_eq!(cobb_douglas_utility(&table, &params, &bundle, &w, Sex::Women).unwrap().0, 0.0);
        assert_eq!(leontief_utility(&table, &params, &bundle, &ids, Sex::Women).unwrap().0, 0.0);
    }

    #[test]
    fn cobb_douglas_by_values() {
        assert_eq!(cobb_douglas_of([(0.5, 1.0), (0.5, 0.25)]).unwrap().0, 0.5);
        assert_eq!(cobb_douglas_of([(0.0, 0.0), (1.0, 0.8)]).unwrap().0, 0.8);
        assert!(cobb_douglas_of([(0.5, -0.1)]).is_err());
    }

    #[test]
    fn leontief_takes_min() {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let mut bundle = IntakeBundle::new();
        bundle.set_in("vitamin_d", 20.0, Unit::Mcg).unwrap();
        // u = 0.75 at half the RDA
        bundle.set_in("vitamin_c", 45.0, Unit::Mg).unwrap();
        let u = leontief_utility(&table, &params, &bundle, &["vitamin_d", "vitamin_c"], Sex::Men).unwrap();
        assert_eq!(u.0, 0.75);
    }

    #[test]
    fn concrete_ignores_other_nutrients() {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let fb = ConcreteFunctionSpec::builtin("fluid-balance").unwrap();
        assert_eq!(fb.nutrient, "sodium");

        let mut bundle = IntakeBundle::new();
        bundle.set_in("sodium", 1.5, Unit::G).unwrap();
        bundle.set_in("vitamin_a", 0.0, Unit::Mcg).unwrap();
        assert_eq!(concrete_utility(&fb, &table, &params, &bundle, Sex::Men).unwrap().0, 1.0);

        let mut bundle = IntakeBundle::new();
        bundle.set_in("vitamin_a", 3000.0, Unit::Mcg).unwrap();
        assert_eq!(concrete_utility(&fb, &table, &params, &bundle, Sex::Men).unwrap().0, 0.0);
        assert_eq!(concrete_utility(&fb, &table, &params, &IntakeBundle::new(), Sex::Men).unwrap().0, 0.0);

        assert!(matches!(ConcreteFunctionSpec::builtin("telepathy"), Err(Error::UnknownFunction(_))));
        let ghost = ConcreteFunctionSpec::new("x", "ectoplasm", "");
        assert!(matches!(
            concrete_utility(&ghost, &table, &params, &bundle, Sex::Men),
            Err(Error::UnknownNutrient(_))
        ));
    }

    #[test]
    fn intake_file() {
        let table = NutrientTable::bundled();
        let text = "nutrient_id,amount,unit\nvitamin_d,7.5,mcg\nsodium,1.5,g\niron,0,mg\n";
        let bundle = IntakeBundle::from_csv_str(text, &table).unwrap();
        assert_eq!(bundle.get("vitamin_d"), 0.0075);
        assert_eq!(bundle.get("sodium"), 1500.0);
        assert_eq!(bundle.get("iron"), 0.0);
        assert!(bundle.contains("iron"));
        assert!(IntakeBundle::from_csv_str("", &table).unwrap().is_empty());

        let bad = "nutrient_id,amount,unit\nvitamin_d,7.5,mcg\nmoonrock,1,g\n";
        assert!(matches!(IntakeBundle::from_csv_str(bad, &table), Err(Error::Parse { line: 3, .. })));
        let bad = "nutrient_id,amount,unit\nvitamin_d,-1,mcg\n";
        assert!(matches!(IntakeBundle::from_csv_str(bad, &table), Err(Error::Parse { line: 2, .. })));
        let bad = "nutrient_id,amount,unit\nvitamin_d,1,mcg\nvitamin_d,2,mcg\n";
        assert!(matches!(IntakeBundle::from_csv_str(bad, &table), Err(Error::Parse { line: 3, .. })));
    }
}
