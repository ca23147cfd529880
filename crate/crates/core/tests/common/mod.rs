#![allow(dead_code)]

use std::collections::BTreeMap;

use nutriutil::{intake_from_servings, Food, FoodTable, IntakeBundle, NutrientProfile, NutrientTable, Sex, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID_STEP: f64 = 0.01;

/// Every nutrient with an RDA for `sex`, at exactly that RDA.
pub fn all_at_rda(table: &NutrientTable, sex: Sex) -> IntakeBundle {
    let mut bundle = IntakeBundle::new();
    for id in table.usable_ids(sex) {
        let p = table.profile_for(id, sex).unwrap();
        bundle.set_in(id, p.rda, p.unit).unwrap();
    }
    bundle
}

/// A min-cost instance whose optimum is known by construction.
///
/// Thresholds are set to `A y*` for a grid-aligned `y*`, and prices to `Aᵀπ`
/// with `π > 0`. For any servings `y` meeting the RDAs,
/// `p·y = π·Ay ≥ π·RDA = p·y*`, so `y*` is optimal and lies on the grid.
pub struct Planted {
    pub table: NutrientTable,
    pub foods: FoodTable,
    pub optimum: BTreeMap<String, f64>,
    pub optimal_cost: f64,
}

pub fn planted(seed: u64, n_foods: usize, n_nutrients: usize) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nutrients: Vec<String> = (0..n_nutrients).map(|i| format!("n{i}")).collect();
    let food_ids: Vec<String> = (0..n_foods).map(|j| format!("f{j}")).collect();
    let composition: Vec<Vec<f64>> = (0..n_foods)
        .map(|j| {
            (0..n_nutrients)
                .map(|i| {
                    let base = rng.random_range(0.5..10.0);
                    if i == j % n_nutrients {
                        base + 10.0
                    } else {
                        base
                    }
                })
                .collect()
        })
        .collect();
    let pi: Vec<f64> = (0..n_nutrients).map(|_| rng.random_range(0.5..2.0)).collect();

    // Scratch table so the thresholds can be derived from the foods.
    let scratch_rows = nutrients
        .iter()
        .map(|n| NutrientProfile::new(n, n, Unit::Mg, Some(1.0), Some(1.0), None).unwrap())
        .collect();
    let scratch = NutrientTable::from_profiles(scratch_rows).unwrap();
    let build_foods = |table: &NutrientTable| {
        let foods = food_ids
            .iter()
            .zip(&composition)
            .map(|(id, col)| {
                let price: f64 = col.iter().zip(&pi).map(|(a, p)| a * p).sum();
                let mut food = Food::new(id, id, 100.0, Some(price));
                for (n, &a) in nutrients.iter().zip(col) {
                    food = food.with(n, a);
                }
                food
            })
            .collect();
        FoodTable::new(foods, nutrients.clone(), table).unwrap()
    };
    let optimum: BTreeMap<String, f64> = food_ids
        .iter()
        .map(|id| (id.clone(), rng.random_range(30..=150) as f64 * GRID_STEP))
        .collect();
    let rda = intake_from_servings(&build_foods(&scratch), &optimum).unwrap();

    let rows = nutrients
        .iter()
        .map(|n| {
            let r = rda.get(n);
            let ul = rng.random_bool(2.0 / 3.0).then(|| r * rng.random_range(2.0..4.0));
            NutrientProfile::new(n, n, Unit::Mg, Some(r), Some(r), ul).unwrap()
        })
        .collect();
    let table = NutrientTable::from_profiles(rows).unwrap();
    let foods = build_foods(&table);
    let optimal_cost = foods
        .foods()
        .iter()
        .map(|f| f.price.unwrap() * optimum[&f.id])
        .sum();
    Planted {
        table,
        foods,
        optimum,
        optimal_cost,
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
