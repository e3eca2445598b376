//! Report text and CSV emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sdstab::patchwork::PatchworkW;
use sdstab::{ClosedLoopRun, DecreaseCertificate};

use crate::CliError;

/// Human-readable report ending in a `RESULT` line.
#[derive(Debug, Default)]
pub struct Report {
    text: String,
    checks: usize,
    failures: usize,
}

impl Report {
    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    /// Records a check and prints it with a pass/FAIL tag.
    pub fn check(&mut self, ok: bool, s: impl AsRef<str>) -> bool {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
        self.line(format!("[{}] {}", if ok { "pass" } else { "FAIL" }, s.as_ref()));
        ok
    }

    /// Counts a check without a dedicated line.
    pub fn tally(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn finish(mut self) -> (String, bool) {
        let passed = self.failures == 0;
        let summary = format!(
            "RESULT {} {} {}",
            if passed { "pass" } else { "fail" },
            self.checks,
            self.failures
        );
        self.line(summary);
        (self.text, passed)
    }
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn vec_str(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("({})", parts.join(", "))
}

pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// `t,x1..xn,u1..um,V[,W]` at every grid point of the run. `v_of(k, x)`
/// evaluates the certificate function of interval `k`.
pub fn trajectory_csv(run: &ClosedLoopRun, v_of: &dyn Fn(usize, &[f64]) -> f64, w: Option<&PatchworkW>) -> String {
    let traj = &run.trajectory;
    let n = traj.states.first().map_or(0, Vec::len);
    let m = traj.controls.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=m {
        let _ = write!(out, ",u{i}");
    }
    out.push_str(",V");
    if w.is_some() {
        out.push_str(",W");
    }
    out.push('\n');

    // interval owning each row; a junction row belongs to the later interval
    let mut owner = vec![0usize; traj.len()];
    for (k, r) in run.records.iter().enumerate() {
        for o in &mut owner[r.first..=r.last] {
            *o = k;
        }
    }
    for (row, t) in traj.times.iter().enumerate() {
        let x = &traj.states[row];
        out.push_str(&num(*t));
        for v in x.iter().chain(&traj.controls[row]) {
            out.push(',');
            out.push_str(&num(*v));
        }
        out.push(',');
        out.push_str(&num(v_of(owner[row], x)));
        if let Some(w) = w {
            out.push(',');
            out.push_str(&num(w.value(x).unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

/// `k,T_k,V_start,V_end,L_k,Vmax,bound_ok,C_k`, with `k` counted from 1.
pub fn certificate_csv(cert: &DecreaseCertificate) -> String {
    let mut out = String::from("k,T_k,V_start,V_end,L_k,Vmax,bound_ok,C_k\n");
    for m in &cert.intervals {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            m.index + 1,
            num(m.start),
            num(m.v_start),
            num(m.v_end),
            num(m.margin),
            num(m.vmax),
            m.bound_ok,
            num(m.excursion_ratio)
        );
    }
    out
}
