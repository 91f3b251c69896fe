//! On-disk artifacts of an identification run.
//!
//! Two files capture a run: a CSV with the time series (raw loop signals and
//! the dual-Youla pair) and a JSON report with everything the downstream
//! synthesis stage needs (identified parameter realization, depth, singular
//! values, radii). Numbers are written in a fixed scientific format so a
//! rerun with the same configuration reproduces the files byte for byte.

use crate::{IdentifiedModel, RecoveredFactors, Result, Trajectory};
use lti_core::ss::StateSpaceJson;
use lti_core::StateSpace;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

fn group(header: &mut Vec<String>, name: &str, dim: usize) {
    if dim == 1 {
        header.push(name.to_string());
    } else {
        for k in 0..dim {
            header.push(format!("{name}_{k}"));
        }
    }
}

fn push_row(record: &mut Vec<String>, values: &[f64]) {
    for v in values {
        record.push(format!("{v:.12e}"));
    }
}

/// Write one run as CSV with columns t, u, y, r, e1, e2 (vector channels are
/// split into suffixed columns).
pub fn write_trajectory_csv<P: AsRef<Path>>(
    path: P,
    traj: &Trajectory,
    e1: &[Vec<f64>],
    e2: &[Vec<f64>],
) -> Result<()> {
    let t_len = traj.len();
    if e1.len() != t_len || e2.len() != t_len {
        return Err(crate::SysidError::InvalidArg(format!(
            "trajectory has {t_len} samples but e1 has {} and e2 has {}",
            e1.len(),
            e2.len()
        )));
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    group(&mut header, "u", traj.u.first().map_or(1, Vec::len));
    group(&mut header, "y", traj.y.first().map_or(1, Vec::len));
    group(&mut header, "r", traj.r.first().map_or(1, Vec::len));
    group(&mut header, "e1", e1.first().map_or(1, Vec::len));
    group(&mut header, "e2", e2.first().map_or(1, Vec::len));
    writer.write_record(&header)?;
    for t in 0..t_len {
        let mut record = vec![t.to_string()];
        push_row(&mut record, &traj.u[t]);
        push_row(&mut record, &traj.y[t]);
        push_row(&mut record, &traj.r[t]);
        push_row(&mut record, &e1[t]);
        push_row(&mut record, &e2[t]);
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Summary of one identification run; the realization is embedded so later
/// stages can rebuild the identified factors without the raw data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub seed: u64,
    pub t_len: usize,
    pub d_hat: usize,
    pub order: usize,
    /// Singular values of the Hankel estimate, largest first.
    pub singular_values: Vec<f64>,
    /// RMS regression residual of the Hankel fit.
    pub residual: f64,
    /// Measured factor-error norm of the identified model.
    pub measured: f64,
    /// A-priori radius at this horizon and depth.
    pub theory: f64,
    /// Radius handed to synthesis: max(measured, floor).
    pub gamma_hat: f64,
    /// Identified dual-Youla parameter realization.
    pub model: StateSpaceJson,
}

impl IdentificationReport {
    /// Assemble a report from the stage outputs.
    pub fn new(
        traj: &Trajectory,
        id: &IdentifiedModel,
        rec: &RecoveredFactors,
        residual: f64,
    ) -> Self {
        Self {
            seed: traj.seed,
            t_len: traj.len(),
            d_hat: id.d_hat,
            order: id.order,
            singular_values: id.singular_values.clone(),
            residual,
            measured: rec.measured,
            theory: rec.theory,
            gamma_hat: rec.gamma_hat,
            model: StateSpaceJson::from(&id.model),
        }
    }

    /// Rebuild the identified parameter realization.
    pub fn model(&self) -> Result<StateSpace> {
        StateSpace::try_from(&self.model).map_err(crate::SysidError::from)
    }
}

/// Write the report as pretty-printed JSON.
pub fn write_identification_report<P: AsRef<Path>>(
    path: P,
    report: &IdentificationReport,
) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, report)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Read a report written by [`write_identification_report`].
pub fn read_identification_report<P: AsRef<Path>>(path: P) -> Result<IdentificationReport> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realize::IdentifiedModel;
    use crate::RecoveredFactors;
    use lti_core::FirSystem;

    fn tiny_traj() -> Trajectory {
        Trajectory {
            u: vec![vec![1.0], vec![2.0]],
            y: vec![vec![0.5], vec![0.25]],
            r: vec![vec![0.0], vec![1.0]],
            w: vec![vec![0.0], vec![0.0]],
            nu: vec![vec![0.0], vec![0.0]],
            delta: vec![vec![0.0], vec![0.0]],
            seed: 7,
        }
    }

    #[test]
    fn csv_bodies_are_byte_identical_across_reruns() {
        let dir = tempfile::tempdir().unwrap();
        let traj = tiny_traj();
        let e = vec![vec![0.125], vec![-3.0]];
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        write_trajectory_csv(&p1, &traj, &e, &e).unwrap();
        write_trajectory_csv(&p2, &traj, &e, &e).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert!(!b1.is_empty());
        assert_eq!(b1, b2);
        let text = String::from_utf8(b1).unwrap();
        assert!(text.starts_with("t,u,y,r,e1,e2\n"), "{text}");
        assert!(text.contains("1.250000000000e-1"), "{text}");
    }

    #[test]
    fn report_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let id = IdentifiedModel {
            model: StateSpace::scalar(0.5, 1.0, 1.0, 0.0),
            singular_values: vec![1.25, 0.0],
            d_hat: 9,
            order: 1,
        };
        let rec = RecoveredFactors {
            m_tilde: FirSystem::zeros(1, 1, 2),
            n_tilde: FirSystem::zeros(1, 1, 2),
            measured: 0.125,
            theory: 0.5,
            gamma_hat: 0.125,
        };
        let report = IdentificationReport::new(&tiny_traj(), &id, &rec, 1e-3);
        let path = dir.path().join("report.json");
        write_identification_report(&path, &report).unwrap();
        let back = read_identification_report(&path).unwrap();
        assert_eq!(back.d_hat, 9);
        assert_eq!(back.seed, 7);
        assert_eq!(back.gamma_hat, 0.125);
        assert_eq!(back.model().unwrap(), id.model);
    }
}
