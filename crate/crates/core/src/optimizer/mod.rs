//! Diet optimization: minimum-cost adequate diets and maximum utility under a
//! budget.

mod budget;
mod grid;
pub mod simplex;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::aggregation::{equal_weights, total_utility, IntakeBundle, WeightVector};
use crate::diet::{intake_from_servings, FoodTable};
use crate::error::{Error, Result};
use crate::nutrient_db::{NutrientTable, ResolvedProfile, Sex};
use crate::utility::{evaluate_unchecked, UtilityParams};

pub use budget::{max_utility_under_budget, BudgetOptions};
pub use grid::{brute_force_grid, GridOutcome, GRID_CANDIDATE_LIMIT, GRID_MAX_FOODS};
use simplex::{BoundedLp, LpStatus};

/// Relative feasibility tolerance for reported solutions.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    /// Servings per food, every food listed.
    pub servings: BTreeMap<String, f64>,
    /// Total price of the servings.
    pub cost: f64,
    pub bundle: IntakeBundle,
    /// Additive utility over the scored nutrients.
    pub utility: f64,
    /// Nutrients that entered the constraints or the objective.
    pub nutrients: Vec<String>,
    /// Nutrients whose bounds cannot be met (infeasible problems only).
    pub violated: Vec<String>,
    pub notices: Vec<String>,
    /// LP dual bound on the cost, when the solver produced one.
    pub dual_bound: Option<f64>,
}

impl Solution {
    /// `food_id,servings,cost` rows followed by the `status,cost,utility`
    /// summary.
    pub fn render(&self, foods: &FoodTable) -> String {
        let mut out = String::from("food_id,servings,cost\n");
        for (id, &y) in &self.servings {
            let price = foods.get(id).and_then(|f| f.price).unwrap_or(0.0);
            let _ = writeln!(out, "{id},{y:.6},{:.6}", y * price);
        }
        out.push_str("status,cost,utility\n");
        let _ = writeln!(out, "{},{:.6},{:.6}", self.status, self.cost, self.utility);
        out
    }
}

/// Minimum-cost problem `min p·y  s.t.  RDA ≤ A y ≤ UL,  0 ≤ y ≤ cap`.
///
/// Columns are foods sorted by id, rows nutrients sorted by id. Compositions
/// and thresholds are in canonical mg.
#[derive(Debug, Clone, PartialEq)]
pub struct DietLp {
    pub foods: Vec<String>,
    pub prices: Vec<f64>,
    pub nutrients: Vec<String>,
    /// `matrix[i][j]`: mg of nutrient `i` per serving of food `j`.
    pub matrix: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
    pub caps: Vec<Option<f64>>,
    pub notices: Vec<String>,
}

impl DietLp {
    /// Constrains every composition column of `foods`. Nutrients without an
    /// RDA for `sex` are left out; inconsistent ULs are not enforced.
    pub fn build(foods: &FoodTable, table: &NutrientTable, sex: Sex, caps: &BTreeMap<String, f64>) -> Result<Self> {
        let ids: Vec<String> = foods.sorted_ids().into_iter().map(String::from).collect();
        let mut prices = Vec::with_capacity(ids.len());
        for id in &ids {
            let food = foods.get(id).expect("id from table");
            prices.push(
                food.price
                    .ok_or_else(|| Error::InvalidParams(format!("food {id} has no price")))?,
            );
        }
        for (id, &cap) in caps {
            if foods.get(id).is_none() {
                return Err(Error::UnknownFood(id.clone()));
            }
            if cap.is_nan() || cap < 0.0 {
                return Err(Error::InvalidParams(format!("cap for {id} must be non-negative")));
            }
        }

        let mut columns: Vec<&str> = foods.nutrients().iter().map(String::as_str).collect();
        columns.sort_unstable();
        let mut lp = DietLp {
            caps: ids.iter().map(|id| caps.get(id).copied()).collect(),
            foods: ids,
            prices,
            nutrients: Vec::new(),
            matrix: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            notices: Vec::new(),
        };
        for n in columns {
            let profile = match table.profile_for(n, sex) {
                Ok(p) => p.canonical(),
                Err(Error::MissingThreshold { .. }) => {
                    lp.notices.push(format!("{n}: no RDA for {sex}, not constrained"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            if table.ul_dropped(n) {
                lp.notices.push(format!("{n}: UL below RDA in the table, upper bound not enforced"));
            }
            lp.matrix.push(lp.foods.iter().map(|f| foods.get(f).expect("id from table").content(n)).collect());
            lp.nutrients.push(n.to_string());
            lp.lower.push(profile.rda);
            lp.upper.push(profile.ul);
        }
        if lp.nutrients.is_empty() {
            return Err(Error::InvalidParams("no nutrient can be constrained".into()));
        }
        Ok(lp)
    }

    /// Rows scaled by 1/RDA; each row gets a slack ranged over [1, UL/RDA].
    fn standard_form(&self) -> BoundedLp {
        let (m, n) = (self.nutrients.len(), self.foods.len());
        let a = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = self.matrix[i].iter().map(|v| v / self.lower[i]).collect();
                row.extend((0..m).map(|k| if k == i { -1.0 } else { 0.0 }));
                row
            })
            .collect();
        let mut c = self.prices.clone();
        c.extend(std::iter::repeat_n(0.0, m));
        let mut lo = vec![0.0; n];
        lo.extend(std::iter::repeat_n(1.0, m));
        let mut hi: Vec<f64> = self.caps.iter().map(|c| c.unwrap_or(f64::INFINITY)).collect();
        hi.extend((0..m).map(|i| self.upper[i].map_or(f64::INFINITY, |ul| ul / self.lower[i])));
        BoundedLp {
            a,
            b: vec![0.0; m],
            c,
            lo,
            hi,
        }
    }

    pub fn cost(&self, servings: &[f64]) -> f64 {
        self.prices.iter().zip(servings).map(|(p, y)| p * y).sum()
    }

    /// Largest relative bound violation of `servings`.
    pub fn max_violation(&self, servings: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.matrix.iter().enumerate() {
            let x: f64 = row.iter().zip(servings).map(|(a, y)| a * y).sum();
            worst = worst.max((self.lower[i] - x) / self.lower[i]);
            if let Some(ul) = self.upper[i] {
                worst = worst.max((x - ul) / ul);
            }
        }
        worst
    }
}

/// Cheapest servings vector whose intake lies inside the indifference box of
/// the food file's nutrients.
pub fn min_cost_adequate_diet(
    foods: &FoodTable,
    table: &NutrientTable,
    sex: Sex,
    caps: &BTreeMap<String, f64>,
) -> Result<Solution> {
    let lp = DietLp::build(foods, table, sex, caps)?;
    let form = lp.standard_form();
    let outcome = form.solve()?;
    let n = lp.foods.len();
    let y: Vec<f64> = outcome.x[..n]
        .iter()
        .zip(&form.hi[..n])
        .map(|(&v, &hi)| v.clamp(0.0, hi))
        .collect();
    let status = match outcome.status {
        LpStatus::Optimal => Status::Optimal,
        LpStatus::Infeasible => Status::Infeasible,
        LpStatus::Unbounded => unreachable!("prices are non-negative and servings bounded below"),
    };
    let violated = if status == Status::Infeasible {
        lp.nutrients
            .iter()
            .zip(&outcome.residuals)
            .filter(|(_, r)| r.abs() > 1e-9)
            .map(|(id, _)| id.clone())
            .collect()
    } else {
        Vec::new()
    };

    let servings: BTreeMap<String, f64> = lp.foods.iter().cloned().zip(y.iter().copied()).collect();
    let bundle = intake_from_servings(foods, &servings)?;
    let weights = equal_weights(&lp.nutrients)?;
    let utility = total_utility(table, &UtilityParams::default(), &bundle, &weights, sex)?.0;
    Ok(Solution {
        status,
        cost: lp.cost(&y),
        servings,
        bundle,
        utility,
        nutrients: lp.nutrients,
        violated,
        notices: lp.notices,
        dual_bound: outcome.dual_bound,
    })
}

/// Additive utility as a function of a dense servings vector, for the search
/// based solvers. Arithmetic mirrors `intake_from_servings` and
/// `total_utility` so that both paths agree bit for bit.
pub(crate) struct Objective {
    pub foods: Vec<String>,
    pub prices: Vec<f64>,
    pub nutrients: Vec<String>,
    /// `columns[j]`: non-zero `(nutrient row, mg)` entries of food `j`.
    columns: Vec<Vec<(usize, f64)>>,
    profiles: Vec<ResolvedProfile>,
    lambdas: Vec<Option<f64>>,
    weights: Vec<f64>,
    params: UtilityParams,
    pub notices: Vec<String>,
}

impl Objective {
    pub fn new(
        foods: &FoodTable,
        table: &NutrientTable,
        params: &UtilityParams,
        sex: Sex,
        weights: Option<&WeightVector>,
    ) -> Result<Self> {
        params.validate()?;
        let ids: Vec<String> = foods.sorted_ids().into_iter().map(String::from).collect();
        let mut prices = Vec::with_capacity(ids.len());
        for id in &ids {
            match foods.get(id).and_then(|f| f.price) {
                Some(p) if p > 0.0 => prices.push(p),
                _ => return Err(Error::InvalidParams(format!("food {id} needs a positive price"))),
            }
        }
        let mut notices = Vec::new();
        let weights = match weights {
            Some(w) => w.clone(),
            None => {
                let mut scored = Vec::new();
                for n in foods.nutrients() {
                    match table.profile_for(n, sex) {
                        Ok(_) => scored.push(n.clone()),
                        Err(Error::MissingThreshold { .. }) => {
                            notices.push(format!("{n}: no RDA for {sex}, not scored"))
                        }
                        Err(e) => return Err(e),
                    }
                }
                equal_weights(&scored)?
            }
        };
        let mut nutrients = Vec::new();
        let mut profiles = Vec::new();
        let mut lambdas = Vec::new();
        let mut betas = Vec::new();
        for (id, beta) in weights.iter() {
            let profile = match table.profile_for(id, sex) {
                Ok(p) => p.canonical(),
                Err(Error::UnknownNutrient(id)) => {
                    return Err(Error::WeightMismatch(format!("`{id}` is not in the nutrient table")))
                }
                Err(e) => return Err(e),
            };
            lambdas.push(params.decay_scale(&profile)?);
            profiles.push(profile);
            nutrients.push(id.to_string());
            betas.push(beta);
        }
        let columns = ids
            .iter()
            .map(|id| {
                let food = foods.get(id).expect("id from table");
                food.composition
                    .iter()
                    .filter_map(|(n, &q)| nutrients.iter().position(|m| m == n).map(|i| (i, q)))
                    .collect()
            })
            .collect();
        Ok(Objective {
            foods: ids,
            prices,
            nutrients,
            columns,
            profiles,
            lambdas,
            weights: betas,
            params: *params,
            notices,
        })
    }

    pub fn cost(&self, y: &[f64]) -> f64 {
        self.prices.iter().zip(y).map(|(p, v)| p * v).sum()
    }

    pub fn utility(&self, y: &[f64]) -> f64 {
        self.utility_with(y, &mut vec![0.0; self.nutrients.len()])
    }

    /// As [`Objective::utility`], reusing `intake` as scratch space.
    pub fn utility_with(&self, y: &[f64], intake: &mut [f64]) -> f64 {
        intake.fill(0.0);
        for (col, &v) in self.columns.iter().zip(y) {
            for &(i, q) in col {
                intake[i] += v * q;
            }
        }
        self.weights
            .iter()
            .zip(&self.profiles)
            .zip(&self.lambdas)
            .zip(intake.iter())
            .map(|(((beta, p), lambda), &x)| beta * evaluate_unchecked(p, &self.params, *lambda, x).0 .0)
            .sum()
    }

    pub fn solution(&self, foods: &FoodTable, y: &[f64], notices: Vec<String>) -> Result<Solution> {
        let servings: BTreeMap<String, f64> = self.foods.iter().cloned().zip(y.iter().copied()).collect();
        Ok(Solution {
            status: Status::Optimal,
            cost: self.cost(y),
            bundle: intake_from_servings(foods, &servings)?,
            servings,
            utility: self.utility(y),
            nutrients: self.nutrients.clone(),
            violated: Vec::new(),
            notices,
            dual_bound: None,
        })
    }
}

/// Ranking shared by the search solvers: utility (within 1e-12), then cost,
/// then servings lexicographically.
pub(crate) fn better(a: (f64, f64, &[f64]), b: (f64, f64, &[f64])) -> bool {
    const UTILITY_TIE: f64 = 1e-12;
    if a.0 > b.0 + UTILITY_TIE {
        return true;
    }
    if a.0 < b.0 - UTILITY_TIE {
        return false;
    }
    if a.1 != b.1 {
        return a.1 < b.1;
    }
    a.2.iter().zip(b.2).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}
