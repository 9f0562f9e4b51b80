use std::collections::BTreeMap;
use std::fmt::Write;

use super::{ConstraintFamily, MilpModel, VarId, VarKind};

const TERMS_PER_LINE: usize = 10;

/// Render `model` in LP text format.
///
/// Rows are named `{FAMILY}_{n}` with `n` counting from 1 within each family.
/// Output depends only on the model, so it is byte-stable.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model, &model.objective);
    out.push_str("\nSubject To\n");

    let mut ordinals: BTreeMap<ConstraintFamily, usize> = BTreeMap::new();
    for row in &model.constraints {
        let n = ordinals.entry(row.family).or_default();
        *n += 1;
        write!(out, " {}_{}:", row.family.tag(), n).unwrap();
        write_terms(&mut out, model, &row.terms);
        writeln!(out, " {} {}", row.relation.symbol(), row.rhs).unwrap();
    }

    out.push_str("Bounds\n");
    for var in model.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
        if var.upper.is_finite() {
            writeln!(out, " {} <= {} <= {}", var.lower, var.name, var.upper).unwrap();
        } else if var.lower != 0.0 {
            writeln!(out, " {} >= {}", var.name, var.lower).unwrap();
        }
    }

    out.push_str("Binary\n");
    for var in model.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        writeln!(out, " {}", var.name).unwrap();
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(f64, VarId)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, (coef, var)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variables[*var].name;
        let sign = if *coef < 0.0 {
            " - "
        } else if i == 0 {
            " "
        } else {
            " + "
        };
        out.push_str(sign);
        let magnitude = coef.abs();
        if magnitude != 1.0 {
            write!(out, "{magnitude} ").unwrap();
        }
        out.push_str(name);
    }
}
