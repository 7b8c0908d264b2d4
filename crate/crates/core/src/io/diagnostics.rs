use std::path::Path;

use crate::error::IoError;
use crate::flow::Trajectory;

pub const CSV_HEADER: [&str; 9] =
    ["step", "t", "dt", "sup_v2", "sup_H2", "t_sup_II2", "max_displacement", "min_barrier_margin", "expander_residual"];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per step record; missing quantities are empty fields.
pub fn write_csv<W: std::io::Write>(traj: &Trajectory, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &traj.diagnostics {
        w.write_record([
            r.step.to_string(),
            num(r.t),
            num(r.dt),
            num(r.sup_v2),
            num(r.sup_h2),
            num(r.t_sup_ii2),
            num(r.max_displacement),
            opt(r.min_barrier_margin()),
            opt(r.expander_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(traj: &Trajectory, path: &Path) -> Result<(), IoError> {
    write_csv(traj, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowConfig, FlowMode};
    use crate::grid::{BoundaryKind, DomainSpec, GraphState};

    fn render(traj: &Trajectory) -> String {
        let mut buf = Vec::new();
        write_csv(traj, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let t = Trajectory {
            snapshots: vec![],
            diagnostics: vec![],
            initial_barrier_margins: vec![],
            snapshot_residuals: vec![],
            steady_state_at: None,
        };
        assert_eq!(render(&t), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn plane_rows() {
        let d = DomainSpec::interval(0.0, 1.0, 8, BoundaryKind::Neumann);
        let s = GraphState::zeros(d, 1).unwrap();
        let traj = run(&FlowConfig { fixed_dt: Some(1e-3), ..FlowConfig::new(FlowMode::Neumann, 3e-3) }, &s).unwrap();
        let text = render(&traj);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), traj.diagnostics.len());
        assert_eq!(rows.len(), 3);
        let mut prev = f64::NEG_INFINITY;
        for r in &rows {
            let t: f64 = r[1].parse().unwrap();
            assert!(t > prev);
            prev = t;
            assert!(r[4].parse::<f64>().unwrap() <= 1e-15);
            assert_eq!(&r[7], "");
            assert_eq!(&r[8], "");
            // 17 significant digits
            assert_eq!(r[2].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
        }
    }
}
