//! Plain-text LP read/write for [`LinearModel`].
//!
//! The writer emits a deterministic subset of the common LP file format:
//! `Minimize`, `Subject To`, `Bounds`, `Generals`, `Binaries`, `End`,
//! with every variable listed in the bounds section in declaration
//! order. Coefficients use shortest-round-trip decimal formatting, so a
//! write/parse cycle reproduces the model exactly. The reader accepts
//! that subset plus the usual small liberties (optional coefficients,
//! wrapped rows, `free` bounds).

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{LinearModel, Sense, VarKind};
use crate::error::{Error, Result};

const WRAP_COLUMN: usize = 200;

fn push_token(out: &mut String, line_len: &mut usize, token: &str) {
    if *line_len + token.len() + 1 > WRAP_COLUMN {
        out.push('\n');
        out.push(' ');
        *line_len = 1;
    }
    out.push(' ');
    out.push_str(token);
    *line_len += token.len() + 1;
}

fn push_terms(
    out: &mut String,
    line_len: &mut usize,
    terms: &[(usize, f64)],
    names: &[String],
) {
    for &(idx, coef) in terms {
        let sign = if coef < 0.0 { "-" } else { "+" };
        push_token(out, line_len, sign);
        push_token(out, line_len, &format!("{}", coef.abs()));
        push_token(out, line_len, &names[idx]);
    }
}

/// Render a model as LP text.
pub fn export_lp(model: &LinearModel) -> String {
    let names: Vec<String> = model.variables().iter().map(|v| v.name.clone()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str("Minimize\n");
    {
        let mut line_len = 5;
        out.push_str(" obj:");
        let (obj, constant) = model.objective();
        push_terms(&mut out, &mut line_len, obj, &names);
        if constant != 0.0 {
            let sign = if constant < 0.0 { "-" } else { "+" };
            push_token(&mut out, &mut line_len, sign);
            push_token(&mut out, &mut line_len, &format!("{}", constant.abs()));
        }
        out.push('\n');
    }
    out.push_str("Subject To\n");
    for c in model.constraints() {
        let label = format!(" {}:", c.name);
        let mut line_len = label.len();
        out.push_str(&label);
        push_terms(&mut out, &mut line_len, &c.terms, &names);
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        push_token(&mut out, &mut line_len, sense);
        push_token(&mut out, &mut line_len, &format!("{}", c.rhs));
        out.push('\n');
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, v.lower);
        } else if v.upper == f64::INFINITY {
            let _ = writeln!(out, " {} >= {}", v.name, v.lower);
        } else if v.lower == f64::NEG_INFINITY {
            let _ = writeln!(out, " {} <= {}", v.name, v.upper);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
        }
    }
    let generals: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| v.name.as_str())
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for name in generals {
            let _ = writeln!(out, " {name}");
        }
    }
    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    Done,
}

fn section_of(line: &str) -> Option<Section> {
    let lower = line.trim().to_ascii_lowercase();
    match lower.as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "generals" | "general" | "integers" | "integer" => Some(Section::Generals),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::Done),
        "maximize" | "maximise" | "max" => Some(Section::Preamble),
        _ => None,
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let lower = token.to_ascii_lowercase();
    let value = match lower.trim_start_matches(['+', '-']) {
        "inf" | "infinity" => {
            if lower.starts_with('-') {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        }
        _ => token.parse::<f64>().map_err(|_| Error::Parse {
            line,
            reason: format!("expected a number, found {token:?}"),
        })?,
    };
    Ok(value)
}

fn is_number_start(token: &str) -> bool {
    let t = token.trim_start_matches(['+', '-']);
    t.starts_with(|c: char| c.is_ascii_digit() || c == '.')
        || t.eq_ignore_ascii_case("inf")
        || t.eq_ignore_ascii_case("infinity")
}

/// Linear expression parsed to named terms plus a constant offset.
fn parse_expression(
    tokens: &[(String, usize)],
) -> Result<(Vec<(String, f64)>, f64)> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut pending: Option<f64> = None;
    for (token, line) in tokens {
        match token.as_str() {
            "+" => {
                if let Some(c) = pending.take() {
                    constant += c;
                }
                sign = 1.0;
            }
            "-" => {
                if let Some(c) = pending.take() {
                    constant += c;
                }
                sign = -1.0;
            }
            _ if is_number_start(token) => {
                if let Some(c) = pending.take() {
                    constant += c;
                }
                pending = Some(sign * parse_number(token, *line)?);
                sign = 1.0;
            }
            _ => {
                let coef = pending.take().unwrap_or(sign);
                terms.push((token.clone(), coef));
                sign = 1.0;
            }
        }
    }
    if let Some(c) = pending.take() {
        constant += c;
    }
    Ok((terms, constant))
}

struct RawConstraint {
    name: String,
    tokens: Vec<(String, usize)>,
    sense: Sense,
    rhs: f64,
    line: usize,
}

/// Parse LP text produced by [`export_lp`] (or a compatible writer).
pub fn parse_lp(text: &str) -> Result<LinearModel> {
    let mut name = String::from("lp_model");
    let mut section = Section::Preamble;
    let mut objective_tokens: Vec<(String, usize)> = Vec::new();
    let mut constraints: Vec<RawConstraint> = Vec::new();
    let mut row_tokens: Vec<(String, usize)> = Vec::new();
    let mut row_name: Option<(String, usize)> = None;
    let mut bounds: Vec<(String, f64, f64)> = Vec::new();
    let mut bound_index: HashMap<String, usize> = HashMap::new();
    let mut generals: Vec<String> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    let flush_row = |row_name: &mut Option<(String, usize)>,
                         row_tokens: &mut Vec<(String, usize)>,
                         constraints: &mut Vec<RawConstraint>|
     -> Result<()> {
        if row_name.is_none() && row_tokens.is_empty() {
            return Ok(());
        }
        let (label, line) = row_name.take().ok_or_else(|| Error::Parse {
            line: row_tokens.first().map(|t| t.1).unwrap_or(0),
            reason: "constraint row is missing a 'name:' label".into(),
        })?;
        let tokens = std::mem::take(row_tokens);
        // Split off "sense rhs" from the tail.
        let sense_pos = tokens
            .iter()
            .rposition(|(t, _)| matches!(t.as_str(), "<=" | ">=" | "=" | "<" | ">"))
            .ok_or(Error::Parse {
                line,
                reason: format!("constraint {label} has no comparison operator"),
            })?;
        if sense_pos + 2 != tokens.len() {
            return Err(Error::Parse {
                line: tokens[sense_pos].1,
                reason: format!("constraint {label}: expected a single value after the operator"),
            });
        }
        let sense = match tokens[sense_pos].0.as_str() {
            "<=" | "<" => Sense::Le,
            ">=" | ">" => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = parse_number(&tokens[sense_pos + 1].0, tokens[sense_pos + 1].1)?;
        constraints.push(RawConstraint {
            name: label,
            tokens: tokens[..sense_pos].to_vec(),
            sense,
            rhs,
            line,
        });
        Ok(())
    };

    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('\\') {
            if let Some(rest) = comment.trim().strip_prefix("Problem:") {
                name = rest.trim().to_string();
            }
            continue;
        }
        if let Some(next) = section_of(line) {
            if next == Section::Preamble {
                return Err(Error::Parse {
                    line: line_no,
                    reason: "only minimization problems are supported".into(),
                });
            }
            if section == Section::Constraints {
                flush_row(&mut row_name, &mut row_tokens, &mut constraints)?;
            }
            section = next;
            continue;
        }
        match section {
            Section::Preamble => {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("unexpected content before Minimize: {line:?}"),
                })
            }
            Section::Done => {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("unexpected content after End: {line:?}"),
                })
            }
            Section::Objective => {
                for token in line.split_whitespace() {
                    if let Some(label) = token.strip_suffix(':') {
                        let _ = label; // objective label is decorative
                        continue;
                    }
                    objective_tokens.push((token.to_string(), line_no));
                }
            }
            Section::Constraints => {
                for token in line.split_whitespace() {
                    if let Some(label) = token.strip_suffix(':') {
                        flush_row(&mut row_name, &mut row_tokens, &mut constraints)?;
                        row_name = Some((label.to_string(), line_no));
                        continue;
                    }
                    row_tokens.push((token.to_string(), line_no));
                }
            }
            Section::Bounds => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                let entry = match tokens.as_slice() {
                    [name, kw] if kw.eq_ignore_ascii_case("free") => {
                        (name.to_string(), f64::NEG_INFINITY, f64::INFINITY)
                    }
                    [name, "=", v] => {
                        let v = parse_number(v, line_no)?;
                        (name.to_string(), v, v)
                    }
                    [name, ">=", lo] => {
                        (name.to_string(), parse_number(lo, line_no)?, f64::INFINITY)
                    }
                    [name, "<=", hi] => {
                        (name.to_string(), f64::NEG_INFINITY, parse_number(hi, line_no)?)
                    }
                    [lo, "<=", name, "<=", hi] => (
                        name.to_string(),
                        parse_number(lo, line_no)?,
                        parse_number(hi, line_no)?,
                    ),
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: format!("unrecognized bound: {line:?}"),
                        })
                    }
                };
                match bound_index.get(&entry.0) {
                    Some(&i) => {
                        // Repeated lines for one variable intersect.
                        bounds[i].1 = bounds[i].1.max(entry.1);
                        bounds[i].2 = bounds[i].2.min(entry.2);
                    }
                    None => {
                        bound_index.insert(entry.0.clone(), bounds.len());
                        bounds.push(entry);
                    }
                }
            }
            Section::Generals => {
                generals.extend(line.split_whitespace().map(str::to_string));
            }
            Section::Binaries => {
                binaries.extend(line.split_whitespace().map(str::to_string));
            }
        }
    }
    if section == Section::Constraints {
        flush_row(&mut row_name, &mut row_tokens, &mut constraints)?;
    }
    if section != Section::Done {
        return Err(Error::Parse {
            line: text.lines().count(),
            reason: "missing End marker".into(),
        });
    }

    let mut model = LinearModel::new(name);
    let general_set: std::collections::HashSet<&str> =
        generals.iter().map(String::as_str).collect();
    let binary_set: std::collections::HashSet<&str> =
        binaries.iter().map(String::as_str).collect();
    for (vname, lo, hi) in &bounds {
        let kind = if binary_set.contains(vname.as_str()) {
            VarKind::Binary
        } else if general_set.contains(vname.as_str()) {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        model.add_variable(vname.clone(), kind, *lo, *hi)?;
    }
    // Integer or binary variables that never appeared in Bounds.
    for vname in generals.iter().chain(binaries.iter()) {
        if model.variable_index(vname).is_none() {
            let kind = if binary_set.contains(vname.as_str()) {
                VarKind::Binary
            } else {
                VarKind::Integer
            };
            model.add_variable(vname.clone(), kind, 0.0, f64::INFINITY)?;
        }
    }

    let resolve = |model: &LinearModel, terms: Vec<(String, f64)>, line: usize| -> Result<Vec<(usize, f64)>> {
        terms
            .into_iter()
            .map(|(n, c)| {
                model
                    .variable_index(&n)
                    .map(|i| (i, c))
                    .ok_or_else(|| Error::Parse {
                        line,
                        reason: format!("variable {n} is not declared in Bounds"),
                    })
            })
            .collect()
    };

    let obj_line = objective_tokens.first().map(|t| t.1).unwrap_or(0);
    let (obj_terms, obj_constant) = parse_expression(&objective_tokens)?;
    let obj_terms = resolve(&model, obj_terms, obj_line)?;
    model.set_objective(obj_terms, obj_constant)?;

    for raw in constraints {
        let (terms, constant) = parse_expression(&raw.tokens)?;
        let terms = resolve(&model, terms, raw.line)?;
        // A constant on the left moves to the right-hand side.
        model.add_constraint(raw.name, terms, raw.sense, raw.rhs - constant)?;
    }
    Ok(model)
}
