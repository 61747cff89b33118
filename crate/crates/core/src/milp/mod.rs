//! Exact mixed-integer linear formulation of the sizing problem.
//!
//! The model carries integer unit counts, per-step continuous dispatch
//! variables, and per-step discharge binaries, with rows for renewable
//! caps, battery rating and mutual exclusion, stored-energy dynamics and
//! window, relaxed power balance, reserve, and the two relaxation caps.
//! It exists as an explicit intermediate representation so any external
//! solver can cross-check the built-in planner through the LP text format.
//!
//! Variable naming is fixed for interop: `n_pv`, `n_wt`, `n_bess`, then
//! `ppv_t`, `pwt_t`, `pch_t`, `pdch_t`, `soc_t`, `ul_t`, `ur_t`, `udch_t`
//! for each step `t`.

mod lp;
mod validate;

pub use lp::{export_lp, parse_lp};
pub use validate::{
    dispatch_to_assignment, parse_assignment, validate_solution, SolutionAssignment,
    ValidationReport, Violation,
};

use std::collections::HashMap;

use crate::catalog::{Catalog, ProjectParams};
use crate::error::{Error, Result};
use crate::planner::SearchSpace;
use crate::resources::{AvailabilitySeries, ScenarioSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// One linear row: `sum(coef * var) sense rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sparse row as (variable index, coefficient) pairs.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization model over named variables.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub name: String,
    variables: Vec<Variable>,
    objective: Vec<(usize, f64)>,
    objective_constant: f64,
    constraints: Vec<Constraint>,
    index: HashMap<String, usize>,
}

impl PartialEq for LinearModel {
    fn eq(&self, other: &Self) -> bool {
        // The name index is derived state.
        self.name == other.name
            && self.variables == other.variables
            && self.objective == other.objective
            && self.objective_constant == other.objective_constant
            && self.constraints == other.constraints
    }
}

impl LinearModel {
    pub fn new(name: impl Into<String>) -> Self {
        LinearModel {
            name: name.into(),
            variables: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            constraints: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Declare a variable; binaries are forced to bounds [0, 1].
    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<usize> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::invalid("variable", format!("duplicate name {name}")));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lower, upper),
        };
        if lower > upper {
            return Err(Error::invalid(
                "variable",
                format!("{name}: lower {lower} exceeds upper {upper}"),
            ));
        }
        let idx = self.variables.len();
        self.index.insert(name.clone(), idx);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(idx)
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, f64)>, constant: f64) -> Result<()> {
        for &(idx, _) in &terms {
            if idx >= self.variables.len() {
                return Err(Error::invalid("objective", format!("unknown variable index {idx}")));
            }
        }
        self.objective = terms;
        self.objective_constant = constant;
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<()> {
        let name = name.into();
        for &(idx, _) in &terms {
            if idx >= self.variables.len() {
                return Err(Error::Invalid {
                    field: "constraint",
                    reason: format!("{name}: unknown variable index {idx}"),
                });
            }
        }
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> (&[(usize, f64)], f64) {
        (&self.objective, self.objective_constant)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Variable counts as (continuous, integer, binary).
    pub fn kind_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for v in &self.variables {
            match v.kind {
                VarKind::Continuous => counts.0 += 1,
                VarKind::Integer => counts.1 += 1,
                VarKind::Binary => counts.2 += 1,
            }
        }
        counts
    }
}

/// Limits and switches for [`build_model`].
#[derive(Debug, Clone, Copy)]
pub struct MilpOptions {
    /// Refuse models with more constraint rows than this.
    pub max_rows: usize,
    /// Require the final stored energy to return to the initial level.
    pub enforce_terminal_soc: bool,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            max_rows: 1_000_000,
            enforce_terminal_soc: false,
        }
    }
}

fn push_term(terms: &mut Vec<(usize, f64)>, idx: usize, coef: f64) {
    if coef != 0.0 {
        terms.push((idx, coef));
    }
}

/// Build the sizing MILP for one scenario.
///
/// Battery mutual exclusion is linearized against the largest allowed
/// battery power (`bess upper bound * unit_energy / full_charge_hours`)
/// because the true power rating depends on the integer decision itself;
/// separate rating rows keep charge and discharge below the chosen
/// rating. This is the one deliberate rewrite of the formulation, and it
/// is exact: any point satisfying the rating rows satisfies the original
/// decision-dependent exclusion bound.
pub fn build_model(
    catalog: &Catalog,
    series: &ScenarioSeries,
    availability: &AvailabilitySeries,
    space: &SearchSpace,
    params: &ProjectParams,
    options: &MilpOptions,
) -> Result<LinearModel> {
    catalog.validate()?;
    params.validate()?;
    space.validate()?;
    if availability.len() != series.len() {
        return Err(Error::LengthMismatch {
            context: "availability vs series".into(),
            expected: series.len(),
            found: availability.len(),
        });
    }
    let t_len = series.len();
    let n_rows = 11 * t_len + 2 + usize::from(options.enforce_terminal_soc);
    if n_rows > options.max_rows {
        return Err(Error::ResourceLimit(format!(
            "model needs {n_rows} rows, limit is {}",
            options.max_rows
        )));
    }

    let econ = catalog.economics(params)?;
    let dt = params.step_hours;
    let pv_unit = catalog.pv.unit_power.unwrap_or(0.0);
    let e_unit = catalog.bess.unit_energy.unwrap_or(0.0);
    let h_full = catalog.bess.full_charge_hours.unwrap_or(1.0);
    let soc_lo = catalog.bess.soc_min.unwrap_or(0.0);
    let soc_hi = catalog.bess.soc_max.unwrap_or(1.0);
    let eta = catalog.bess.one_way_efficiency.unwrap_or(1.0);
    let p_unit_bess = e_unit / h_full;
    // Largest battery power any sizing in the space can have; the
    // mutual-exclusion big bound.
    let p_bound = space.bess.1 as f64 * p_unit_bess;

    let inf = f64::INFINITY;
    let mut m = LinearModel::new("microgrid_sizing");
    let v_npv = m.add_variable("n_pv", VarKind::Integer, space.pv.0 as f64, space.pv.1 as f64)?;
    let v_nwt = m.add_variable("n_wt", VarKind::Integer, space.wt.0 as f64, space.wt.1 as f64)?;
    let v_nbess = m.add_variable(
        "n_bess",
        VarKind::Integer,
        space.bess.0 as f64,
        space.bess.1 as f64,
    )?;

    let mut v_ppv = Vec::with_capacity(t_len);
    let mut v_pwt = Vec::with_capacity(t_len);
    let mut v_pch = Vec::with_capacity(t_len);
    let mut v_pdch = Vec::with_capacity(t_len);
    let mut v_soc = Vec::with_capacity(t_len);
    let mut v_ul = Vec::with_capacity(t_len);
    let mut v_ur = Vec::with_capacity(t_len);
    let mut v_udch = Vec::with_capacity(t_len);
    for t in 0..t_len {
        v_ppv.push(m.add_variable(format!("ppv_{t}"), VarKind::Continuous, 0.0, inf)?);
        v_pwt.push(m.add_variable(format!("pwt_{t}"), VarKind::Continuous, 0.0, inf)?);
        v_pch.push(m.add_variable(format!("pch_{t}"), VarKind::Continuous, 0.0, inf)?);
        v_pdch.push(m.add_variable(format!("pdch_{t}"), VarKind::Continuous, 0.0, inf)?);
        v_soc.push(m.add_variable(format!("soc_{t}"), VarKind::Continuous, 0.0, inf)?);
        v_ul.push(m.add_variable(format!("ul_{t}"), VarKind::Continuous, 0.0, inf)?);
        v_ur.push(m.add_variable(format!("ur_{t}"), VarKind::Continuous, 0.0, inf)?);
        v_udch.push(m.add_variable(format!("udch_{t}"), VarKind::Binary, 0.0, 1.0)?);
    }

    m.set_objective(
        vec![
            (v_npv, econ.pv.unit_npc),
            (v_nwt, econ.wt.unit_npc),
            (v_nbess, econ.bess.unit_npc),
        ],
        0.0,
    )?;

    let reserve_margin = 1.0 + params.reserve_factor;
    for t in 0..t_len {
        let a_pv = availability.pv_per_kw[t];
        let a_wt = availability.wt_per_unit[t];
        let load = series.load_kw[t];

        // Renewable production caps (used power <= count * prediction).
        let mut terms = vec![(v_ppv[t], 1.0)];
        push_term(&mut terms, v_npv, -pv_unit * a_pv);
        m.add_constraint(format!("pv_cap_{t}"), terms, Sense::Le, 0.0)?;

        let mut terms = vec![(v_pwt[t], 1.0)];
        push_term(&mut terms, v_nwt, -a_wt);
        m.add_constraint(format!("wt_cap_{t}"), terms, Sense::Le, 0.0)?;

        // Battery power rating in both directions.
        let mut terms = vec![(v_pch[t], 1.0)];
        push_term(&mut terms, v_nbess, -p_unit_bess);
        m.add_constraint(format!("ch_rate_{t}"), terms, Sense::Le, 0.0)?;

        let mut terms = vec![(v_pdch[t], 1.0)];
        push_term(&mut terms, v_nbess, -p_unit_bess);
        m.add_constraint(format!("dch_rate_{t}"), terms, Sense::Le, 0.0)?;

        // Mutual exclusion through the discharge binary.
        let mut terms = vec![(v_pch[t], 1.0)];
        push_term(&mut terms, v_udch[t], p_bound);
        m.add_constraint(format!("ch_excl_{t}"), terms, Sense::Le, p_bound)?;

        let mut terms = vec![(v_pdch[t], 1.0)];
        push_term(&mut terms, v_udch[t], -p_bound);
        m.add_constraint(format!("dch_excl_{t}"), terms, Sense::Le, 0.0)?;

        // Stored-energy dynamics; step 0 starts from a full battery.
        let mut terms = vec![(v_soc[t], 1.0)];
        if t == 0 {
            push_term(&mut terms, v_nbess, -soc_hi * e_unit);
        } else {
            terms.push((v_soc[t - 1], -1.0));
        }
        push_term(&mut terms, v_pch[t], -eta * dt);
        push_term(&mut terms, v_pdch[t], dt / eta);
        m.add_constraint(format!("soc_bal_{t}"), terms, Sense::Eq, 0.0)?;

        // Stored-energy window.
        let mut terms = vec![(v_soc[t], 1.0)];
        push_term(&mut terms, v_nbess, -soc_lo * e_unit);
        m.add_constraint(format!("soc_min_{t}"), terms, Sense::Ge, 0.0)?;

        let mut terms = vec![(v_soc[t], 1.0)];
        push_term(&mut terms, v_nbess, -soc_hi * e_unit);
        m.add_constraint(format!("soc_max_{t}"), terms, Sense::Le, 0.0)?;

        // Relaxed power balance.
        m.add_constraint(
            format!("balance_{t}"),
            vec![
                (v_ppv[t], 1.0),
                (v_pwt[t], 1.0),
                (v_pdch[t], 1.0),
                (v_pch[t], -1.0),
                (v_ul[t], 1.0),
            ],
            Sense::Ge,
            load,
        )?;

        // Relaxed reserve, crediting the full battery power rating.
        let mut terms = Vec::with_capacity(4);
        push_term(&mut terms, v_npv, pv_unit * a_pv);
        push_term(&mut terms, v_nwt, a_wt);
        push_term(&mut terms, v_nbess, p_unit_bess);
        terms.push((v_ur[t], 1.0));
        m.add_constraint(format!("reserve_{t}"), terms, Sense::Ge, reserve_margin * load)?;
    }

    // Horizon caps on the two relaxation channels.
    let load_energy = series.load_energy_kwh();
    let ul_terms: Vec<(usize, f64)> = v_ul.iter().map(|&v| (v, dt)).collect();
    m.add_constraint(
        "ul_cap",
        ul_terms,
        Sense::Le,
        params.max_unserved_fraction * load_energy,
    )?;
    let ur_terms: Vec<(usize, f64)> = v_ur.iter().map(|&v| (v, dt)).collect();
    m.add_constraint(
        "ur_cap",
        ur_terms,
        Sense::Le,
        params.max_unmet_reserve_fraction * load_energy,
    )?;

    if options.enforce_terminal_soc {
        let mut terms = vec![(v_soc[t_len - 1], 1.0)];
        push_term(&mut terms, v_nbess, -soc_hi * e_unit);
        m.add_constraint("terminal_soc", terms, Sense::Ge, 0.0)?;
    }

    Ok(m)
}
