//! Check candidate solutions against a [`LinearModel`].
//!
//! External solver output comes back as variable/value pairs; this
//! module replays every row, bound, and integrality requirement and
//! reports signed residuals so near-misses are visible, not just hard
//! failures.

use std::collections::HashMap;

use serde::Serialize;

use super::{LinearModel, Sense, VarKind};
use crate::dispatch::{DispatchResult, Sizing};
use crate::error::{Error, Result};

/// Named variable values, e.g. parsed from a solver's solution file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionAssignment {
    values: HashMap<String, f64>,
}

impl SolutionAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(String, f64)> for SolutionAssignment {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        SolutionAssignment {
            values: iter.into_iter().collect(),
        }
    }
}

/// One requirement broken by more than the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Constraint name, `bound:var`, or `integrality:var`.
    pub requirement: String,
    /// How far past the requirement the value sits (always positive).
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Objective value at the assignment.
    pub objective: f64,
    /// Signed activity minus right-hand side, one per constraint in model order.
    pub residuals: Vec<f64>,
    pub violations: Vec<Violation>,
    pub max_violation: f64,
    pub feasible: bool,
}

/// Evaluate an assignment against every row, bound, and integrality
/// requirement of the model. Every model variable must be assigned.
pub fn validate_solution(
    model: &LinearModel,
    assignment: &SolutionAssignment,
    tolerance: f64,
) -> Result<ValidationReport> {
    let mut values = Vec::with_capacity(model.n_variables());
    for v in model.variables() {
        let value = assignment
            .get(&v.name)
            .ok_or_else(|| Error::MissingVariable(v.name.clone()))?;
        values.push(value);
    }

    let mut violations = Vec::new();
    let mut max_violation = 0.0_f64;
    let mut note = |requirement: String, amount: f64| {
        max_violation = max_violation.max(amount);
        if amount > tolerance {
            violations.push(Violation { requirement, amount });
        }
    };

    for (v, &value) in model.variables().iter().zip(&values) {
        let below = v.lower - value;
        let above = value - v.upper;
        let out = below.max(above).max(0.0);
        if out > 0.0 {
            note(format!("bound:{}", v.name), out);
        }
        if matches!(v.kind, VarKind::Integer | VarKind::Binary) {
            let drift = (value - value.round()).abs();
            if drift > 0.0 {
                note(format!("integrality:{}", v.name), drift);
            }
        }
    }

    let mut residuals = Vec::with_capacity(model.n_constraints());
    for c in model.constraints() {
        let activity: f64 = c.terms.iter().map(|&(i, coef)| coef * values[i]).sum();
        let residual = activity - c.rhs;
        residuals.push(residual);
        let amount = match c.sense {
            Sense::Le => residual.max(0.0),
            Sense::Ge => (-residual).max(0.0),
            Sense::Eq => residual.abs(),
        };
        if amount > 0.0 {
            note(c.name.clone(), amount);
        }
    }

    let (obj_terms, constant) = model.objective();
    let objective: f64 =
        obj_terms.iter().map(|&(i, coef)| coef * values[i]).sum::<f64>() + constant;

    let feasible = max_violation <= tolerance;
    Ok(ValidationReport {
        objective,
        residuals,
        violations,
        max_violation,
        feasible,
    })
}

/// Express a simulated dispatch in the model's variable naming so it can
/// be validated as a candidate MILP solution.
pub fn dispatch_to_assignment(sizing: &Sizing, dispatch: &DispatchResult) -> SolutionAssignment {
    let mut a = SolutionAssignment::new();
    a.set("n_pv", sizing.n_pv as f64);
    a.set("n_wt", sizing.n_wt as f64);
    a.set("n_bess", sizing.n_bess as f64);
    for t in 0..dispatch.stored_energy.len() {
        a.set(format!("ppv_{t}"), dispatch.pv_used[t]);
        a.set(format!("pwt_{t}"), dispatch.wt_used[t]);
        a.set(format!("pch_{t}"), dispatch.charge[t]);
        a.set(format!("pdch_{t}"), dispatch.discharge[t]);
        a.set(format!("soc_{t}"), dispatch.stored_energy[t]);
        a.set(format!("ul_{t}"), dispatch.unserved[t]);
        a.set(format!("ur_{t}"), dispatch.unmet_reserve[t]);
        a.set(format!("udch_{t}"), if dispatch.discharging[t] { 1.0 } else { 0.0 });
    }
    a
}

/// Parse a solution file: either a JSON object of name/value pairs or
/// whitespace-separated `name value` lines (`#` and `\` start comments,
/// an optional `=` between name and value is accepted).
pub fn parse_assignment(text: &str) -> Result<SolutionAssignment> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let map: HashMap<String, serde_json::Value> =
            serde_json::from_str(trimmed).map_err(|e| Error::Parse {
                line: e.line(),
                reason: format!("bad JSON solution: {e}"),
            })?;
        let mut a = SolutionAssignment::new();
        for (name, value) in map {
            let number = value.as_f64().ok_or_else(|| Error::Parse {
                line: 0,
                reason: format!("variable {name}: value is not a number"),
            })?;
            a.set(name, number);
        }
        return Ok(a);
    }
    let mut a = SolutionAssignment::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let (name, value_token) = match tokens.as_slice() {
            [name, value] => (*name, *value),
            [name, "=", value] => (*name, *value),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected 'name value', found {line:?}"),
                })
            }
        };
        let value: f64 = value_token.parse().map_err(|_| Error::Parse {
            line: line_no,
            reason: format!("bad value for {name}: {value_token:?}"),
        })?;
        a.set(name, value);
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::VarKind;

    fn small_model() -> LinearModel {
        let mut m = LinearModel::new("small");
        let x = m.add_variable("x", VarKind::Integer, 0.0, 10.0).unwrap();
        let y = m.add_variable("y", VarKind::Continuous, 0.0, f64::INFINITY).unwrap();
        m.set_objective(vec![(x, 3.0), (y, 1.0)], 2.0).unwrap();
        m.add_constraint("lo", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 4.0).unwrap();
        m.add_constraint("hi", vec![(x, 2.0), (y, -1.0)], Sense::Le, 5.0).unwrap();
        m.add_constraint("tie", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0).unwrap();
        m
    }

    fn assign(pairs: &[(&str, f64)]) -> SolutionAssignment {
        pairs.iter().map(|&(n, v)| (n.to_string(), v)).collect()
    }

    #[test]
    fn feasible_point_reports_clean() {
        let m = small_model();
        let report = validate_solution(&m, &assign(&[("x", 3.0), ("y", 2.0)]), 1e-9).unwrap();
        assert!(report.feasible);
        assert!(report.violations.is_empty());
        assert_eq!(report.max_violation, 0.0);
        assert_eq!(report.objective, 3.0 * 3.0 + 2.0 + 2.0);
        assert_eq!(report.residuals, vec![1.0, -1.0, 0.0]);
    }

    #[test]
    fn violations_are_named_and_measured() {
        let m = small_model();
        // x fractional, below the cover row, equality off by 0.5.
        let report = validate_solution(&m, &assign(&[("x", 1.5), ("y", 1.0)]), 1e-6).unwrap();
        assert!(!report.feasible);
        let by_name: HashMap<&str, f64> = report
            .violations
            .iter()
            .map(|v| (v.requirement.as_str(), v.amount))
            .collect();
        assert!((by_name["integrality:x"] - 0.5).abs() < 1e-12);
        assert!((by_name["lo"] - 1.5).abs() < 1e-12);
        assert!((by_name["tie"] - 0.5).abs() < 1e-12);
        assert!((report.max_violation - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bound_violations_detected() {
        let m = small_model();
        let report = validate_solution(&m, &assign(&[("x", 12.0), ("y", -1.0)]), 1e-6).unwrap();
        let names: Vec<&str> = report.violations.iter().map(|v| v.requirement.as_str()).collect();
        assert!(names.contains(&"bound:x"));
        assert!(names.contains(&"bound:y"));
    }

    #[test]
    fn tolerance_separates_noise_from_violations() {
        let m = small_model();
        let report =
            validate_solution(&m, &assign(&[("x", 3.0), ("y", 2.0 + 5e-7)]), 1e-6).unwrap();
        assert!(report.feasible);
        assert!(report.violations.is_empty());
        assert!(report.max_violation > 0.0 && report.max_violation <= 1e-6);
    }

    #[test]
    fn missing_variable_is_an_error() {
        let m = small_model();
        let err = validate_solution(&m, &assign(&[("x", 3.0)]), 1e-6).unwrap_err();
        assert!(matches!(err, Error::MissingVariable(name) if name == "y"));
    }

    #[test]
    fn parses_pair_lines_and_json() {
        let pairs = parse_assignment("# solver output\n x 3\n y = 2.5\n\n").unwrap();
        assert_eq!(pairs.get("x"), Some(3.0));
        assert_eq!(pairs.get("y"), Some(2.5));
        let json = parse_assignment("{\"x\": 3, \"y\": 2.5}").unwrap();
        assert_eq!(json, pairs);
        assert!(parse_assignment(" x\n").is_err());
        assert!(parse_assignment(" x abc\n").is_err());
    }
}
