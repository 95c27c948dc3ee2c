//! Human-readable run summaries and plottable column dumps.

use std::fmt::Write;

use anyhow::{bail, Result};

use crate::manifest::StoredRun;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.6e}"))
}

pub fn summary(run: &StoredRun) -> String {
    let m = &run.manifest;
    let mut s = String::new();
    let _ = writeln!(s, "run            {}", m.run_id);
    if let Some(note) = &m.note {
        let _ = writeln!(s, "note           {note}");
    }
    let _ = writeln!(s, "outcome        {} at t = {}", m.outcome.label, m.outcome.time);
    if let Some(r) = &m.outcome.reason {
        let _ = writeln!(s, "               {r}");
    }
    let _ = writeln!(s, "classification {}", m.classification);
    let _ = writeln!(s, "steps          {} ({} rejected)", m.steps, m.rejected_steps);
    if let Some(v) = &m.verdict {
        let case = v.case.map_or_else(|| "-".into(), |c| c.to_string());
        let _ = writeln!(
            s,
            "blowup verdict {} (case {case}), E = {:.6e}, y0 = {:.6e}, time bound {}",
            v.status,
            v.energy,
            v.y0,
            opt(v.time_bound)
        );
    }
    if let Some(mo) = &m.monitor {
        let _ = writeln!(s, "monitor        applicable {}, critical violations {}", mo.applicable, mo.critical_violations);
    }
    if let Some(k) = &m.kinetic {
        let _ = writeln!(s, "kinetic bound  {} ({}), bounded {}", k.bound, opt(k.gradient_sq_bound), k.bounded);
    }
    if let Some(v) = &m.virial {
        let _ = writeln!(s, "virial FD      V' {:.3e}, y' {:.3e}", v.first_mismatch, v.second_mismatch);
    }
    if let Some(mw) = &m.morawetz {
        let _ = writeln!(
            s,
            "morawetz       lhs {:.6e}, budget {:.6e}, ratio {:.4}, satisfied {}",
            mw.integrated_lhs, mw.budget, mw.ratio, mw.satisfied
        );
    }
    if let Some(sc) = &m.scattering {
        let last = sc.increments.last().map(|x| x.1);
        let _ = writeln!(s, "cauchy         {} increments, last {}, certified {}", sc.increments.len(), opt(last), sc.certified);
    }
    for d in &m.decay {
        match &d.error {
            Some(e) => {
                let _ = writeln!(s, "decay {:<8} {e}", d.column);
            }
            None => {
                let _ = writeln!(s, "decay {:<8} slope {} vs bound {}, pass {:?}", d.column, opt(d.slope), opt(d.bound_slope), d.pass.unwrap_or(false));
            }
        }
    }
    if let Some(p) = &m.pseudoconformal {
        let _ = writeln!(s, "pseudoconf.    FD mismatch {}, balance drift {}", opt(p.fd_mismatch), opt(p.balance_drift));
    }
    for f in &m.flags {
        let _ = writeln!(s, "flag           {f}");
    }
    let _ = writeln!(s, "\n{:<22} {:>14} {:>14} {:>14}", "column", "first", "min", "max");
    for (name, col) in run.series.names.iter().zip(&run.series.columns) {
        let first = col.first().copied().unwrap_or(f64::NAN);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(s, "{name:<22} {first:>14.6e} {lo:>14.6e} {hi:>14.6e}");
    }
    s
}

/// Whitespace-separated columns with a `#` header, as gnuplot reads them.
pub fn columns(run: &StoredRun, names: &[String]) -> Result<String> {
    let table = &run.series;
    let wanted: Vec<String> = if names.is_empty() { table.names.clone() } else { names.to_vec() };
    let mut cols = Vec::new();
    for n in &wanted {
        match table.column(n) {
            Some(c) => cols.push(c),
            None => bail!("series has no column {n:?}; available: {}", table.names.join(", ")),
        }
    }
    let mut s = format!("# {}\n", wanted.join(" "));
    for row in 0..table.len() {
        let line: Vec<String> = cols.iter().map(|c| format!("{:e}", c[row])).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    Ok(s)
}
