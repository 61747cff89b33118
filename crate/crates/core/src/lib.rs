//! Sizing engine for small off-grid renewable systems.
//!
//! Given hourly irradiance, wind, and load series plus a hardware
//! catalog, the crate finds the cheapest mix of PV capacity, wind
//! turbines, and battery strings whose simulated operation keeps unmet
//! load and unmet spinning reserve within configured caps. Cost is net
//! present cost over the project horizon: capital, discounted
//! replacements, operation and maintenance, minus salvage.
//!
//! Layout:
//!
//! * [`catalog`]: component specs, discounting, per-unit and fleet
//!   economics, cost-of-energy metrics.
//! * [`resources`]: scenario series I/O, turbine power curves, PV and
//!   wind availability, load synthesis, and a bundled synthetic year.
//! * [`dispatch`]: the hour-by-hour greedy operating rule, reserve
//!   accounting, feasibility checks, and a dynamic-programming bound
//!   used to audit the greedy rule.
//! * [`planner`]: exact best-first search over integer sizings, plus a
//!   brute-force cross-check and autonomy-driven battery sizing.
//! * [`milp`]: the same problem as an explicit mixed-integer linear
//!   model, with LP-format export/import and solution validation.

pub mod catalog;
pub mod dispatch;
pub mod error;
pub mod milp;
pub mod planner;
pub mod resources;

pub use catalog::{Catalog, CatalogEconomics, ComponentKind, ComponentSpec, ProjectParams};
pub use dispatch::{DispatchResult, DispatchTotals, Feasibility, Ratings, Sizing};
pub use error::{Error, Result};
pub use planner::{PlanOutcome, PlanSolution, PlannerOptions, SearchSpace};
pub use resources::{AvailabilitySeries, LoadShape, PowerCurve, ScenarioSeries};
