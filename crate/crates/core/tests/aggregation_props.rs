mod common;

use proptest::prelude::*;

use nutriutil::{
    cobb_douglas_utility, concrete_utility, equal_weights, leontief_utility, nutrient_utilities, total_utility,
    ConcreteFunctionSpec, IntakeBundle, NutrientTable, Segment, Sex, UtilityParams, WeightVector,
};

const IDS: [&str; 8] = [
    "vitamin_a",
    "vitamin_d",
    "vitamin_c",
    "iron",
    "zinc",
    "calcium",
    "potassium",
    "protein",
];

fn sex() -> impl Strategy<Value = Sex> {
    prop_oneof![Just(Sex::Men), Just(Sex::Women)]
}

/// Intakes as multiples of each nutrient's RDA.
fn bundle_from(table: &NutrientTable, sex: Sex, multiples: &[f64]) -> IntakeBundle {
    let mut bundle = IntakeBundle::new();
    for (id, m) in IDS.iter().zip(multiples) {
        let p = table.profile_for(id, sex).unwrap();
        bundle.set_in(*id, m * p.rda, p.unit).unwrap();
    }
    bundle
}

fn weights() -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0.01f64..1.0, IDS.len()).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        let mut w: Vec<(String, f64)> = IDS.iter().zip(&raw).map(|(id, r)| (id.to_string(), r / sum)).collect();
        // Put the rounding residue on the last weight so the sum is exact.
        let head: f64 = w[..w.len() - 1].iter().map(|(_, b)| b).sum();
        w.last_mut().unwrap().1 = 1.0 - head;
        WeightVector::new(w).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn additive_bounded_by_one(
        sex in sex(),
        multiples in prop::collection::vec(0.0f64..40.0, IDS.len()),
        w in weights(),
    ) {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let bundle = bundle_from(&table, sex, &multiples);
        let total = total_utility(&table, &params, &bundle, &w, sex).unwrap().0;
        let all_plateau = IDS.iter().all(|id| {
            let p = table.profile_for(id, sex).unwrap().canonical();
            nutriutil::segment_of(&p, bundle.get(id)).unwrap() == Segment::Plateau
        });
        prop_assert!(total <= 1.0 + 1e-12);
        prop_assert_eq!((total - 1.0).abs() <= 1e-12, all_plateau, "total {}", total);
    }

    #[test]
    fn aggregators_ordered(
        sex in sex(),
        multiples in prop::collection::vec(0.0f64..3.0, IDS.len()),
        w in weights(),
    ) {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let bundle = bundle_from(&table, sex, &multiples);
        let additive = total_utility(&table, &params, &bundle, &w, sex).unwrap().0;
        let cd = cobb_douglas_utility(&table, &params, &bundle, &w, sex).unwrap().0;
        let leontief = leontief_utility(&table, &params, &bundle, &IDS, sex).unwrap().0;
        let us = nutrient_utilities(&table, &params, &bundle, IDS, sex).unwrap();
        let max = us.iter().map(|(_, u)| u.0).fold(0.0, f64::max);
        // Weighted geometric mean ≤ weighted arithmetic mean; both between min and max.
        prop_assert!(leontief <= cd + 1e-12);
        prop_assert!(cd <= additive + 1e-12);
        prop_assert!(additive <= max + 1e-12);
    }

    #[test]
    fn omission_costs_one_kth(sex in sex(), k in 2usize..=IDS.len(), drop in 0usize..8) {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let ids = &IDS[..k];
        let drop = drop % k;
        let mut multiples = vec![1.5; IDS.len()];
        multiples[drop] = 0.0;
        let bundle = bundle_from(&table, sex, &multiples);
        let w = equal_weights(ids).unwrap();
        let total = total_utility(&table, &params, &bundle, &w, sex).unwrap().0;
        prop_assert!((total - (k as f64 - 1.0) / k as f64).abs() <= 1e-12);
        prop_assert_eq!(cobb_douglas_utility(&table, &params, &bundle, &w, sex).unwrap().0, 0.0);
        prop_assert_eq!(leontief_utility(&table, &params, &bundle, ids, sex).unwrap().0, 0.0);
    }

    #[test]
    fn concrete_ignores_other_nutrients(
        sodium_mg in 0.0f64..5000.0,
        others in prop::collection::vec(0.0f64..1e5, IDS.len()),
        function in prop_oneof![Just("fluid-balance"), Just("low-light-vision")],
    ) {
        let table = NutrientTable::bundled();
        let params = UtilityParams::default();
        let spec = ConcreteFunctionSpec::builtin(function).unwrap();
        let base = IntakeBundle::new().with("sodium", sodium_mg).unwrap().with("vitamin_a", 0.7).unwrap();
        let mut perturbed = base.clone();
        for (id, v) in IDS.iter().zip(&others) {
            if *id != spec.nutrient {
                perturbed.set(*id, *v).unwrap();
            }
        }
        if spec.nutrient != "sodium" {
            perturbed.set("sodium", others[0]).unwrap();
        }
        let a = concrete_utility(&spec, &table, &params, &base, Sex::Men).unwrap().0;
        let b = concrete_utility(&spec, &table, &params, &perturbed, Sex::Men).unwrap().0;
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn entries_outside_weights_are_ignored() {
    let table = NutrientTable::bundled();
    let params = UtilityParams::default();
    let mut bundle = common::all_at_rda(&table, Sex::Men);
    let w = equal_weights(&["vitamin_c", "iron"]).unwrap();
    let before = total_utility(&table, &params, &bundle, &w, Sex::Men).unwrap();
    bundle.set("zinc", 0.0).unwrap();
    assert_eq!(total_utility(&table, &params, &bundle, &w, Sex::Men).unwrap(), before);
}
