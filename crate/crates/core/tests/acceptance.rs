//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nutriutil::aggregation::{cobb_douglas_utility, leontief_utility};
use nutriutil::indifference::{mrs, MrsResult, SurfaceModel, UtilitySurface};
use nutriutil::{
    brute_force_grid, concrete_utility, equal_weights, evaluate_diet, indifference_area, local_nonsatiation_violated,
    marginal_utility, min_cost_adequate_diet, total_utility, utility, ConcreteFunctionSpec, IntakeBundle, Marginal,
    Measure, NutrientTable, ResolvedProfile, Sex, Status, UtilityParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{all_at_rda, planted, relative_error, GRID_STEP};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

fn profile(table: &NutrientTable, id: &str, sex: Sex) -> ResolvedProfile {
    table.profile_for(id, sex).unwrap()
}

fn all_nutrients_at_rda() -> Outcome {
    let table = NutrientTable::bundled();
    let params = UtilityParams::default();
    let start = Instant::now();
    let mut details = Vec::new();
    for sex in [Sex::Men, Sex::Women] {
        let bundle = all_at_rda(&table, sex);
        let report = evaluate_diet(&table, &params, &bundle, sex, None).map_err(|e| e.to_string())?;
        ensure((report.additive - 1.0).abs() <= 1e-12, || {
            format!("{sex}: aggregate {:.17}", report.additive)
        })?;
        ensure(report.flags.is_empty(), || format!("{sex}: flagged {:?}", report.flags))?;
        details.push(format!("{sex}: {} nutrients", report.rows.len()));
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("{} -> 1.0", details.join(", ")))
}

fn segment_ratios() -> Outcome {
    let table = NutrientTable::bundled();
    let d = profile(&table, "vitamin_d", Sex::Men);
    let c = profile(&table, "vitamin_c", Sex::Men);
    let (dw, cw) = (d.plateau_width().unwrap(), c.plateau_width().unwrap());
    ensure(dw == 35.0 && d.rda == 15.0, || format!("vitamin D {dw}/{}", d.rda))?;
    ensure(cw == 1910.0 && c.rda == 90.0, || format!("vitamin C {cw}/{}", c.rda))?;
    let (rd, rc) = (dw / d.rda, cw / c.rda);
    ensure(rd >= 2.0, || format!("vitamin D ratio {rd}"))?;
    ensure((19.0..=23.0).contains(&rc), || format!("vitamin C ratio {rc}"))?;
    Ok(format!("vitamin D 35/15 = {rd:.3}, vitamin C 1910/90 = {rc:.3}"))
}

fn aggregator_divergence() -> Outcome {
    let table = NutrientTable::bundled();
    let params = UtilityParams::default();
    let ids = ["vitamin_d", "vitamin_c", "iron", "zinc"];
    let mut bundle = all_at_rda(&table, Sex::Men);
    bundle.set("vitamin_d", 0.0).unwrap();
    let w = equal_weights(&ids).unwrap();
    let err = |e: nutriutil::Error| e.to_string();
    let additive = total_utility(&table, &params, &bundle, &w, Sex::Men).map_err(err)?.0;
    let cd = cobb_douglas_utility(&table, &params, &bundle, &w, Sex::Men).map_err(err)?.0;
    let leontief = leontief_utility(&table, &params, &bundle, &ids, Sex::Men).map_err(err)?.0;
    ensure(additive == 0.75 && cd == 0.0 && leontief == 0.0, || {
        format!("additive {additive}, Cobb-Douglas {cd}, Leontief {leontief}")
    })?;
    Ok("additive 0.75, Cobb-Douglas 0, Leontief 0".into())
}

fn indifference_measure() -> Outcome {
    let table = NutrientTable::bundled();
    let pair = [profile(&table, "vitamin_d", Sex::Men), profile(&table, "vitamin_c", Sex::Men)];
    let start = Instant::now();
    let area = indifference_area(&pair).map_err(|e| e.to_string())?;
    let analytic = (50.0 - 15.0) * (2000.0 - 90.0);
    ensure(area.measure == Measure::Finite(analytic), || format!("measure {:?}", area.measure))?;

    let (ex, ey) = (2.0 * pair[0].ul.unwrap(), 2.0 * pair[1].ul.unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples = 100_000;
    let hits = (0..samples)
        .filter(|_| area.contains(&[rng.random_range(0.0..ex), rng.random_range(0.0..ey)]))
        .count();
    let estimate = hits as f64 / samples as f64 * ex * ey;
    let rel = relative_error(estimate, analytic);
    ensure(rel < 0.02, || format!("Monte Carlo {estimate:.0} vs {analytic}"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("measure {analytic}, Monte Carlo {estimate:.0} ({:.2}%)", rel * 100.0))
}

fn thick_indifference() -> Outcome {
    let table = NutrientTable::bundled();
    let params = UtilityParams::default();
    let ids = ["vitamin_d", "vitamin_c", "iron", "zinc", "calcium", "vitamin_b6"];
    let profiles: Vec<ResolvedProfile> = ids.iter().map(|id| profile(&table, id, Sex::Men)).collect();
    let eps = 0.01
        * profiles
            .iter()
            .map(|p| p.plateau_width().unwrap())
            .fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();

    let n = 1000;
    let mut inside_true = 0;
    for _ in 0..n {
        let point: Vec<f64> = profiles
            .iter()
            .map(|p| {
                let (lo, hi) = (p.rda, p.ul.unwrap());
                let x = rng.random_range(lo..hi);
                if x == lo {
                    0.5 * (lo + hi)
                } else {
                    x
                }
            })
            .collect();
        if local_nonsatiation_violated(&profiles, &params, &point, eps).map_err(|e| e.to_string())? {
            inside_true += 1;
        }
    }
    let mut deficit_true = 0;
    for _ in 0..n {
        let point: Vec<f64> = profiles.iter().map(|p| rng.random_range(0.0..p.rda)).collect();
        if local_nonsatiation_violated(&profiles, &params, &point, eps).map_err(|e| e.to_string())? {
            deficit_true += 1;
        }
    }
    ensure(inside_true * 100 >= n * 99, || format!("only {inside_true}/{n} interior points violate"))?;
    ensure(deficit_true == 0, || format!("{deficit_true} segment-I points violate"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("interior {inside_true}/{n} true, segment I {deficit_true}/{n} true"))
}

fn gradient_consistency() -> Outcome {
    let table = NutrientTable::bundled();
    let ids = [
        "vitamin_a",
        "vitamin_d",
        "vitamin_c",
        "vitamin_e",
        "iron",
        "zinc",
        "calcium",
        "selenium",
        "potassium",
        "protein",
    ];
    let profiles: Vec<ResolvedProfile> = ids.iter().map(|id| profile(&table, id, Sex::Women)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let p = &profiles[k % profiles.len()];
        let params = UtilityParams {
            p: rng.random_range(1.5..3.0),
            q: rng.random_range(1.5..3.0),
            ..UtilityParams::default()
        };
        let h = 1e-6 * p.rda;
        // Kinks with the scale of the segment they start; near a kink the
        // derivative is one-sided or vanishes into rounding noise.
        let mut kinks = vec![(p.rda, p.rda)];
        let top = match p.ul {
            Some(ul) => {
                let lambda = ul - p.rda;
                kinks.extend([(ul, lambda), (ul + lambda, lambda)]);
                ul + 1.5 * lambda
            }
            None => 3.0 * p.rda,
        };
        let x = loop {
            let x = rng.random_range(2.0 * h..top);
            if kinks.iter().all(|(b, scale)| (x - b).abs() > 1e-2 * scale) {
                break x;
            }
        };
        let analytic = match marginal_utility(p, &params, x).map_err(|e| e.to_string())? {
            Marginal::Rate(r) => r,
            m => return Err(format!("{}: two-sided marginal {m:?} at {x}", p.id)),
        };
        let u = |x: f64| utility(p, &params, x).unwrap().0;
        let fd = (u(x + h) - u(x - h)) / (2.0 * h);
        let scale = analytic.abs().max(fd.abs());
        let rel = if scale == 0.0 { 0.0 } else { (analytic - fd).abs() / scale };
        ensure(rel <= 1e-4, || format!("{} at {x}: analytic {analytic}, fd {fd}", p.id))?;
        worst = worst.max(rel);
    }
    Ok(format!("1000 points over {} nutrients, worst relative error {worst:.1e}", ids.len()))
}

fn optimizer_vs_oracle() -> Outcome {
    let start = Instant::now();
    let params = UtilityParams::default();
    let mut worst = 0.0f64;
    for seed in 0..25u64 {
        let inst = planted(700 + seed, 3, 3);
        let lp = min_cost_adequate_diet(&inst.foods, &inst.table, Sex::Men, &Default::default())
            .map_err(|e| e.to_string())?;
        ensure(lp.status == Status::Optimal, || format!("instance {seed}: {}", lp.status))?;
        // Nothing cheaper than the planted optimum is feasible, so the
        // search can stop a little above its cost.
        let budget = 1.05 * inst.optimal_cost;
        let grid = brute_force_grid(&inst.foods, &inst.table, &params, Sex::Men, budget, GRID_STEP, None)
            .map_err(|e| e.to_string())?;
        ensure(grid.solution.utility == 1.0, || {
            format!("instance {seed}: oracle utility {}", grid.solution.utility)
        })?;
        let rel = relative_error(lp.cost, grid.solution.cost);
        ensure(rel <= 1e-4, || {
            format!("instance {seed}: LP {} vs grid {}", lp.cost, grid.solution.cost)
        })?;
        worst = worst.max(rel);

        let w = equal_weights(&lp.nutrients).unwrap();
        let report = evaluate_diet(&inst.table, &params, &lp.bundle, Sex::Men, Some(&w)).map_err(|e| e.to_string())?;
        ensure((report.additive - 1.0).abs() <= 1e-9, || {
            format!("instance {seed}: utility {}", report.additive)
        })?;
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "25 instances, worst cost gap {worst:.1e}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn non_substitution() -> Outcome {
    let table = NutrientTable::bundled();
    let params = UtilityParams::default();
    let spec = ConcreteFunctionSpec::builtin("fluid-balance").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let others: Vec<&str> = table.iter().map(|p| p.id.as_str()).filter(|id| *id != "sodium").collect();

    for sodium_mg in [0.0, 700.0, 1500.0, 2000.0, 2600.0, 4000.0] {
        let base = IntakeBundle::new().with("sodium", sodium_mg).unwrap();
        let reference = concrete_utility(&spec, &table, &params, &base, Sex::Men).unwrap().0;
        for _ in 0..1000 {
            let mut bundle = base.clone();
            for id in &others {
                if rng.random_bool(0.5) {
                    bundle.set(*id, rng.random_range(0.0..10_000.0)).unwrap();
                }
            }
            let u = concrete_utility(&spec, &table, &params, &bundle, Sex::Men).unwrap().0;
            ensure(u.to_bits() == reference.to_bits(), || {
                format!("sodium {sodium_mg} mg: {u} vs {reference}")
            })?;
        }
    }

    let sodium = profile(&table, "sodium", Sex::Men);
    let (rda, ul) = (sodium.rda, sodium.ul.unwrap());
    let floor = ul + (ul - rda);
    let surface = UtilitySurface::new(
        [sodium, profile(&table, "vitamin_a", Sex::Men)],
        params,
        SurfaceModel::Concrete { contributor: 0 },
    )
    .unwrap();
    let mut tested = 0;
    for k in 0..1000 {
        let x = if k % 2 == 0 {
            rng.random_range(0.0..rda)
        } else {
            rng.random_range(ul..floor)
        };
        if x == ul {
            continue;
        }
        let point = [x, rng.random_range(0.0..6000.0)];
        let report = mrs(&surface, point).unwrap();
        ensure(report.result == MrsResult::NoTradeoff, || {
            format!("{point:?}: {:?}", report.result)
        })?;
        tested += 1;
    }
    Ok(format!("6000 perturbations bit-identical, NoTradeoff at {tested} off-plateau points"))
}

fn data_fidelity() -> Outcome {
    let table = NutrientTable::bundled();
    let reparsed = NutrientTable::from_csv_str(&table.to_csv(), "roundtrip").map_err(|e| e.to_string())?;
    ensure(reparsed == table, || "table changed on round trip".into())?;
    let golden = include_str!("golden/table1_validation.txt");
    let report = table.validate().render();
    ensure(report == golden, || format!("validator output differs from golden:\n{report}"))?;
    Ok(format!("{} rows round-trip, {} findings match golden", table.len(), table.validate().findings.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("every usable nutrient at its RDA scores 1.0", all_nutrients_at_rda),
        ("segment width ratios", segment_ratios),
        ("additive vs Cobb-Douglas vs Leontief", aggregator_divergence),
        ("indifference-area measure", indifference_measure),
        ("thick indifference violates local non-satiation", thick_indifference),
        ("analytic marginal vs finite differences", gradient_consistency),
        ("min-cost LP vs brute-force grid", optimizer_vs_oracle),
        ("concrete utility admits no substitution", non_substitution),
        ("bundled table round trip and golden validation", data_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
