use rayon::prelude::*;

use super::{better, Objective, Solution};
use crate::aggregation::WeightVector;
use crate::diet::FoodTable;
use crate::error::{Error, Result};
use crate::nutrient_db::{NutrientTable, Sex};
use crate::utility::UtilityParams;

pub const GRID_MAX_FOODS: usize = 3;
/// Upper bound on the serving box before budget pruning.
pub const GRID_CANDIDATE_LIMIT: f64 = 2e9;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub solution: Solution,
    /// Number of serving vectors evaluated.
    pub candidates: usize,
}

type Best = (f64, f64, Vec<f64>);

/// Exhaustive search over servings `k · step` with cost within `budget`.
/// Ranks by utility, then cost, then servings; a test oracle for the other
/// solvers, hence the guard on the number of foods.
pub fn brute_force_grid(
    foods: &FoodTable,
    table: &NutrientTable,
    params: &UtilityParams,
    sex: Sex,
    budget: f64,
    step: f64,
    weights: Option<&WeightVector>,
) -> Result<GridOutcome> {
    if foods.len() > GRID_MAX_FOODS {
        return Err(Error::Guard(format!(
            "grid search handles at most {GRID_MAX_FOODS} foods, got {}",
            foods.len()
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParams(format!("step must be > 0, got {step}")));
    }
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::InvalidParams(format!("budget must be non-negative, got {budget}")));
    }
    let obj = Objective::new(foods, table, params, sex, weights)?;
    let limit = budget + 1e-12 * budget.max(1.0);
    let counts: Vec<usize> = obj
        .prices
        .iter()
        .map(|p| (budget / (p * step) + 1e-9).floor() as usize + 1)
        .collect();
    let boxed: f64 = counts.iter().map(|&c| c as f64).product();
    if boxed > GRID_CANDIDATE_LIMIT {
        return Err(Error::Guard(format!("{boxed:.0} grid points exceed the limit")));
    }

    let n = counts.len();
    let (best, candidates) = if n == 0 {
        (evaluate(&obj, &[]), 1)
    } else {
        let slices: Vec<(Option<Best>, usize)> = (0..counts[0])
            .into_par_iter()
            .map(|k0| {
                let mut y = vec![0.0; n];
                y[0] = k0 as f64 * step;
                let mut best: Option<Best> = None;
                let mut count = 0;
                if obj.cost(&y[..1]) > limit {
                    return (best, count);
                }
                let mut scratch = vec![0.0; obj.nutrients.len()];
                let mut search = Search {
                    obj: &obj,
                    counts: &counts,
                    step,
                    limit,
                    scratch: &mut scratch,
                };
                search.enumerate(1, &mut y, &mut best, &mut count);
                (best, count)
            })
            .collect();
        let mut total = 0;
        let mut best: Option<Best> = None;
        for (b, c) in slices {
            total += c;
            let Some(b) = b else { continue };
            best = Some(match best {
                Some(cur) if !better((b.0, b.1, &b.2), (cur.0, cur.1, &cur.2)) => cur,
                _ => b,
            });
        }
        (best.expect("non-empty grid"), total)
    };
    Ok(GridOutcome {
        solution: obj.solution(foods, &best.2, obj.notices.clone())?,
        candidates,
    })
}

fn evaluate(obj: &Objective, y: &[f64]) -> Best {
    (obj.utility(y), obj.cost(y), y.to_vec())
}

struct Search<'a> {
    obj: &'a Objective,
    counts: &'a [usize],
    step: f64,
    limit: f64,
    scratch: &'a mut [f64],
}

impl Search<'_> {
    fn enumerate(&mut self, depth: usize, y: &mut [f64], best: &mut Option<Best>, count: &mut usize) {
        if depth == y.len() {
            *count += 1;
            let (u, c) = (self.obj.utility_with(y, self.scratch), self.obj.cost(y));
            let replace = match best {
                Some(b) => better((u, c, y), (b.0, b.1, &b.2)),
                None => true,
            };
            if replace {
                *best = Some((u, c, y.to_vec()));
            }
            return;
        }
        for k in 0..self.counts[depth] {
            y[depth] = k as f64 * self.step;
            if self.obj.cost(&y[..=depth]) > self.limit {
                break;
            }
            self.enumerate(depth + 1, y, best, count);
        }
        y[depth] = 0.0;
    }
}
