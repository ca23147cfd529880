//! Threshold-based nutritional utility.
//!
//! Each nutrient contributes a utility in three segments: rising below the
//! RDA, flat at 1 between RDA and UL, and falling above the UL. On top of that
//! sit aggregation across nutrients, the geometry of the resulting
//! indifference areas, and diet optimization.
//!
//! Intakes inside an [`IntakeBundle`] and food compositions are always in
//! canonical milligrams; [`ResolvedProfile`]s carry their own unit.

pub mod aggregation;
pub mod contour;
pub mod diet;
pub mod error;
pub mod indifference;
pub mod nutrient_db;
pub mod optimizer;
pub mod utility;

pub use aggregation::{
    cobb_douglas_utility, concrete_utility, equal_weights, leontief_utility, nutrient_utilities, total_utility,
    ConcreteFunctionSpec, IntakeBundle, WeightVector,
};
pub use diet::{evaluate_diet, intake_from_servings, load_foods, Food, FoodTable, ReportRow, UtilityReport};
pub use error::{Error, Result};
pub use indifference::{
    in_indifference_area, indifference_area, level_set, local_nonsatiation_violated, mrs, IndifferenceBox, Interval,
    LevelSet, Measure, MrsReport, MrsResult, SurfaceModel, UtilitySurface,
};
pub use nutrient_db::{
    load_nutrient_table, profile_for, to_canonical, validate, Finding, FindingCode, NutrientProfile, NutrientTable,
    ResolveOptions, ResolvedProfile, Severity, Sex, UlType, Unit, ValidationReport,
};
pub use optimizer::{
    brute_force_grid, max_utility_under_budget, min_cost_adequate_diet, BudgetOptions, DietLp, GridOutcome, Solution,
    Status,
};
pub use utility::{
    breakpoints, curve_sample, evaluate, marginal_utility, segment_of, utility, ClampFloor, CurveSample, Marginal,
    Segment, UtilityParams, UtilityValue,
};
