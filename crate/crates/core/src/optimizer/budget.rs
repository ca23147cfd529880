use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{better, min_cost_adequate_diet, Objective, Solution, Status};
use crate::aggregation::WeightVector;
use crate::diet::FoodTable;
use crate::error::{Error, Result};
use crate::nutrient_db::{NutrientTable, Sex};
use crate::utility::UtilityParams;

const IMPROVEMENT: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetOptions {
    /// Random starts in addition to the zero diet and the scaled LP diet.
    pub starts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Evenly spaced probes per line search before refinement.
    pub samples: usize,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        BudgetOptions {
            starts: 16,
            seed: 0x6e75_7472,
            max_sweeps: 200,
            samples: 32,
        }
    }
}

/// Best servings vector found with `Σ price·servings ≤ budget`.
///
/// Multi-start projected coordinate descent: single-food moves and pairwise
/// cost-neutral transfers, each solved by a sampled line search. The result
/// is a local optimum with respect to those moves; the plateau and segment
/// III make the objective non-concave, so no global guarantee is made.
pub fn max_utility_under_budget(
    foods: &FoodTable,
    table: &NutrientTable,
    params: &UtilityParams,
    sex: Sex,
    budget: f64,
    weights: Option<&WeightVector>,
    options: &BudgetOptions,
) -> Result<Solution> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::InvalidParams(format!("budget must be non-negative, got {budget}")));
    }
    let objective = Objective::new(foods, table, params, sex, weights)?;
    let n = objective.foods.len();
    let mut notices = objective.notices.clone();
    notices.push("local optimum from multi-start coordinate descent".into());
    if budget == 0.0 || n == 0 {
        return objective.solution(foods, &vec![0.0; n], notices);
    }

    let mut starts = vec![vec![0.0; n]];
    if let Ok(lp) = min_cost_adequate_diet(foods, table, sex, &BTreeMap::new()) {
        if lp.status == Status::Optimal {
            let scale = if lp.cost > budget { budget / lp.cost } else { 1.0 };
            starts.push(objective.foods.iter().map(|id| lp.servings[id] * scale).collect());
        }
    }
    for k in 0..options.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(k as u64));
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = w.iter().sum();
        let spend = budget * rng.random_range(0.2..=1.0);
        starts.push(
            w.iter()
                .zip(&objective.prices)
                .map(|(wj, p)| spend * wj / total / p)
                .collect(),
        );
    }

    let results: Vec<(f64, f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|y| {
            let y = descend(&objective, budget, y, options);
            (objective.utility(&y), objective.cost(&y), y)
        })
        .collect();
    let best = results
        .iter()
        .reduce(|a, b| if better((b.0, b.1, &b.2), (a.0, a.1, &a.2)) { b } else { a })
        .expect("at least one start");
    objective.solution(foods, &best.2, notices)
}

fn descend(obj: &Objective, budget: f64, mut y: Vec<f64>, options: &BudgetOptions) -> Vec<f64> {
    let n = y.len();
    let mut current = obj.utility(&y);
    for _ in 0..options.max_sweeps {
        let mut improved = false;
        for j in 0..n {
            let slack = (budget - obj.cost(&y)).max(0.0);
            let hi = y[j] + slack / obj.prices[j];
            let start = y[j];
            let mut trial = y.clone();
            let (v, u) = line_search(0.0, hi, start, current, options.samples, |v| {
                trial[j] = v;
                obj.utility(&trial)
            });
            if u > current + IMPROVEMENT {
                y[j] = v;
                current = u;
                improved = true;
            }
        }
        for j in 0..n {
            for k in j + 1..n {
                // Spend t more on j and t less on k.
                let (pj, pk) = (obj.prices[j], obj.prices[k]);
                let (lo, hi) = (-y[j] * pj, y[k] * pk);
                let mut trial = y.clone();
                let (yj, yk) = (y[j], y[k]);
                let (t, u) = line_search(lo, hi, 0.0, current, options.samples, |t| {
                    trial[j] = (yj + t / pj).max(0.0);
                    trial[k] = (yk - t / pk).max(0.0);
                    obj.utility(&trial)
                });
                if u > current + IMPROVEMENT {
                    y[j] = (yj + t / pj).max(0.0);
                    y[k] = (yk - t / pk).max(0.0);
                    current = u;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let cost = obj.cost(&y);
    if cost > budget {
        let s = budget / cost;
        y.iter_mut().for_each(|v| *v *= s);
    }
    y
}

/// Maximizes `f` over `[lo, hi]`: even probes, then golden-section refinement
/// around the best probe. Returns the incumbent when nothing beats it.
fn line_search(lo: f64, hi: f64, at: f64, f_at: f64, samples: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut best = (at, f_at);
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return best;
    }
    let samples = samples.max(2);
    let h = (hi - lo) / samples as f64;
    for i in 0..=samples {
        let v = if i == samples { hi } else { lo + h * i as f64 };
        let u = f(v);
        if u > best.1 + IMPROVEMENT {
            best = (v, u);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-12 * (1.0 + b.abs()) {
            break;
        }
    }
    for (v, u) in [(c, fc), (d, fd)] {
        if u > best.1 + IMPROVEMENT {
            best = (v, u);
        }
    }
    best
}
