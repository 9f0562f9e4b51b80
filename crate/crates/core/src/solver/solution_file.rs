use crate::milp::{VarKey, VariableIndex};
use crate::model::{PlacementSolution, SolveStatus};

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolutionFileError {
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariableName { line: usize, name: String },
    #[error("line {line}: binary `{name}` has non-integral value {value}")]
    NonIntegralBinary { line: usize, name: String, value: f64 },
    #[error("header objective {header} differs from decoded objective {decoded}")]
    ObjectiveMismatch { header: f64, decoded: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Decode an external solver's `name value` dump.
///
/// Lines starting with `#` are headers or comments; `# objective X` is
/// cross-checked against the decoded active-node count and `# status S`
/// sets the returned status (default OPTIMAL). Variables not listed are 0.
pub fn parse_solution_file(text: &str, index: &VariableIndex) -> Result<PlacementSolution, SolutionFileError> {
    let mut sol = PlacementSolution::empty(SolveStatus::Optimal);
    let mut header_objective = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("objective"), Some(v)) => {
                    header_objective = Some(v.parse::<f64>().map_err(|_| SolutionFileError::Malformed {
                        line,
                        message: format!("bad objective `{v}`"),
                    })?);
                }
                (Some("status"), Some(s)) => {
                    sol.status = s.parse().map_err(|_| SolutionFileError::Malformed {
                        line,
                        message: format!("bad status `{s}`"),
                    })?;
                }
                _ => {}
            }
            continue;
        }

        let mut parts = trimmed.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(SolutionFileError::Malformed {
                line,
                message: "expected `name value`".into(),
            });
        };
        let value: f64 = value.parse().map_err(|_| SolutionFileError::Malformed {
            line,
            message: format!("bad value `{value}`"),
        })?;
        let id = index.by_name(name).ok_or_else(|| SolutionFileError::UnknownVariableName {
            line,
            name: name.to_string(),
        })?;
        let key = index.key(id).expect("index maps names to keys");
        let is_binary = matches!(key, VarKey::Rho(_) | VarKey::Y(..) | VarKey::Z(..));
        if is_binary && (value - value.round()).abs() >= TOL {
            return Err(SolutionFileError::NonIntegralBinary {
                line,
                name: name.to_string(),
                value,
            });
        }
        let set = (value - 1.0).abs() < TOL;
        match key {
            VarKey::Rho(v) if set => {
                sol.active_nodes.insert(v.clone());
            }
            VarKey::Y(nf, v) if set => {
                sol.assignment.insert(nf.clone(), v.clone());
            }
            VarKey::Z(hop, u, v) if set => {
                sol.routing.insert(hop.clone(), (u.clone(), v.clone()));
            }
            VarKey::PhiL(hop) => {
                sol.hop_latency_budget.insert(hop.clone(), value);
            }
            _ => {}
        }
    }

    // Unlisted allotments are zero.
    for hop in sol.routing.keys() {
        sol.hop_latency_budget.entry(hop.clone()).or_insert(0.0);
    }
    sol.objective = sol.active_nodes.len();
    if let Some(header) = header_objective {
        if (header - sol.objective as f64).abs() > TOL {
            return Err(SolutionFileError::ObjectiveMismatch {
                header,
                decoded: sol.objective,
            });
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NfKey, NodeId};

    fn index() -> VariableIndex {
        let mut idx = VariableIndex::default();
        idx.push(VarKey::Rho(NodeId::new("v1")));
        idx.push(VarKey::Y(NfKey::new("s1", "f1", "j1"), NodeId::new("v1")));
        idx
    }

    #[test]
    fn decodes_assignment_and_objective() {
        let sol = parse_solution_file("# objective 1\nrho[v1] 1\nY[s1,f1,j1,v1] 1\n", &index()).unwrap();
        assert_eq!(sol.objective, 1);
        assert_eq!(sol.assignment[&NfKey::new("s1", "f1", "j1")], NodeId::new("v1"));
    }

    #[test]
    fn rejects_fractional_binaries() {
        let err = parse_solution_file("Y[s1,f1,j1,v1] 0.5\n", &index()).unwrap_err();
        assert!(matches!(err, SolutionFileError::NonIntegralBinary { .. }));
    }

    #[test]
    fn rejects_unknown_names_and_bad_headers() {
        let err = parse_solution_file("rho[v9] 1\n", &index()).unwrap_err();
        assert!(matches!(err, SolutionFileError::UnknownVariableName { .. }));
        let err = parse_solution_file("# objective 2\nrho[v1] 1\n", &index()).unwrap_err();
        assert!(matches!(err, SolutionFileError::ObjectiveMismatch { .. }));
    }

    #[test]
    fn status_header_is_read() {
        let sol = parse_solution_file("# status TIMEOUT\nrho[v1] 1\n", &index()).unwrap();
        assert_eq!(sol.status, SolveStatus::Timeout);
    }
}
