//! CSV output for path results.

use std::io::Write;

use crate::error::Result;
use crate::path::RegPathResult;

pub const CSV_HEADER: &str = "lambda,train_loss,test_loss,time_s,solver";

/// One row per `(λ, solver)`, sorted by `λ` then solver name. Floats carry 17
/// significant digits. `omit_timing` leaves `time_s` empty so repeated runs
/// produce identical bytes.
pub fn write_csv<W: Write>(mut w: W, results: &[&RegPathResult], omit_timing: bool) -> Result<()> {
    let mut rows: Vec<(f64, &'static str, f64, Option<f64>, f64)> = results
        .iter()
        .flat_map(|r| {
            r.points
                .iter()
                .map(|p| (p.lambda, r.solver.name(), p.train_loss, p.test_loss, p.time_s))
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    writeln!(w, "{CSV_HEADER}")?;
    for (lambda, solver, train, test, time) in rows {
        let test = test.map(|t| format!("{t:.16e}")).unwrap_or_default();
        let time = if omit_timing { String::new() } else { format!("{time:.16e}") };
        writeln!(w, "{lambda:.16e},{train:.16e},{test},{time},{solver}")?;
    }
    Ok(())
}

/// `solver,setup_s,eval_s,total_s` for each result.
pub fn write_summary<W: Write>(mut w: W, results: &[&RegPathResult]) -> Result<()> {
    writeln!(w, "solver,setup_s,eval_s,total_s")?;
    for r in results {
        let eval: f64 = r.points.iter().map(|p| p.time_s).sum();
        writeln!(
            w,
            "{},{:.6e},{:.6e},{:.6e}",
            r.solver.name(),
            r.setup_seconds,
            eval,
            r.total_seconds()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{PathPoint, SolverKind};

    fn result(solver: SolverKind, lambdas: &[f64]) -> RegPathResult {
        RegPathResult {
            solver,
            points: lambdas
                .iter()
                .map(|&lambda| PathPoint {
                    lambda,
                    x: vec![],
                    train_loss: 0.1,
                    test_loss: (solver == SolverKind::Svd).then_some(2.0),
                    time_s: 0.5,
                    iterations: None,
                })
                .collect(),
            setup_seconds: 0.0,
            intervals: vec![],
            rho: None,
        }
    }

    #[test]
    fn sorted_rows() {
        let a = result(SolverKind::Svd, &[1.0, 10.0]);
        let b = result(SolverKind::IhsBin, &[1.0, 10.0]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &[&a, &b], true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "1.0000000000000000e0,1.0000000000000001e-1,,,ihs-bin"
        );
        assert_eq!(
            lines[2],
            "1.0000000000000000e0,1.0000000000000001e-1,2.0000000000000000e0,,svd"
        );
        assert!(lines[3].ends_with("ihs-bin") && lines[4].ends_with("svd"));
        assert_eq!(lines.len(), 5);
    }
}
