use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::grid::{BoundaryData, DomainSpec, GraphState, Provenance};

pub const SNAPSHOT_SCHEMA: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    schema: u32,
    n: usize,
    m: usize,
    t: f64,
    domain: DomainSpec,
    u: Vec<f64>,
    #[serde(default)]
    dirichlet_data: Option<BoundaryData>,
    #[serde(default)]
    provenance: Provenance,
}

fn snap_err(e: impl std::fmt::Display) -> IoError {
    IoError::Snapshot(e.to_string())
}

/// JSON form of a state. Doubles are written in shortest round-trip form,
/// so reading back is bit-exact; non-finite values are refused.
pub fn snapshot_to_json(state: &GraphState) -> Result<String, IoError> {
    if let Some(k) = state.u.iter().position(|v| !v.is_finite()) {
        return Err(snap_err(format!("value {} at index {k} is not finite", state.u[k])));
    }
    let doc = Doc {
        schema: SNAPSHOT_SCHEMA,
        n: state.n(),
        m: state.m,
        t: state.t,
        domain: state.domain.clone(),
        u: state.u.clone(),
        dirichlet_data: state.dirichlet_data.clone(),
        provenance: state.provenance.clone(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn snapshot_from_json(text: &str) -> Result<GraphState, IoError> {
    let doc: Doc = serde_json::from_str(text)?;
    if doc.schema != SNAPSHOT_SCHEMA {
        return Err(snap_err(format!("schema {} is not supported (expected {SNAPSHOT_SCHEMA})", doc.schema)));
    }
    if doc.n != doc.domain.n() {
        return Err(snap_err(format!("dimension mismatch: n = {} but the domain has {} axes", doc.n, doc.domain.n())));
    }
    let expected = doc.domain.node_count() * doc.m;
    if doc.u.len() != expected {
        return Err(snap_err(format!("dimension mismatch: u has {} values, expected {expected}", doc.u.len())));
    }
    let mut state = GraphState::new(doc.domain, doc.m, doc.t, doc.u).map_err(snap_err)?;
    if let Some(d) = doc.dirichlet_data {
        state = state.with_dirichlet(d).map_err(snap_err)?;
    }
    state.provenance = doc.provenance;
    Ok(state)
}

pub fn write_snapshot(path: &Path, state: &GraphState) -> Result<(), IoError> {
    std::fs::write(path, snapshot_to_json(state)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<GraphState, IoError> {
    snapshot_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryKind;

    #[test]
    fn flat_plane_round_trip() {
        let d = DomainSpec::cube(2, 0.0, 1.0, 4, BoundaryKind::Neumann);
        let s = GraphState::zeros(d, 2).unwrap();
        let back = snapshot_from_json(&snapshot_to_json(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(back.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn awkward_doubles_survive() {
        let d = DomainSpec::interval(-1.0, 1.0, 3, BoundaryKind::Dirichlet);
        let u = vec![0.1 + 0.2, -1e-300, 5e-324, 1.0 / 3.0];
        let s = GraphState::new(d, 1, 0.7, u).unwrap().with_current_boundary().unwrap();
        let back = snapshot_from_json(&snapshot_to_json(&s).unwrap()).unwrap();
        assert_eq!(back.u.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), s.u.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_documents() {
        let d = DomainSpec::interval(0.0, 1.0, 4, BoundaryKind::Neumann);
        let s = GraphState::zeros(d, 1).unwrap();
        let text = snapshot_to_json(&s).unwrap();
        let short = text.replace("\"u\":[0.0,0.0,0.0,0.0,0.0]", "\"u\":[0.0,0.0]");
        assert_ne!(short, text);
        let e = snapshot_from_json(&short).unwrap_err().to_string();
        assert!(e.contains("dimension"), "{e}");
        let v2 = text.replace("\"schema\":1", "\"schema\":2");
        assert!(snapshot_from_json(&v2).is_err());
        let mut bad = s.clone();
        bad.u[0] = f64::NAN;
        assert!(snapshot_to_json(&bad).is_err());
    }
}
