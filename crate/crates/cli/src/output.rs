//! Artifact writers: CSV, JSON, gnuplot data and scripts, metadata sidecars.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nls_ist_core::zakharov_shabat::ScatteringData;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes into one directory and stamps every file with a sidecar.
pub struct Writer {
    dir: PathBuf,
    meta: serde_json::Value,
    written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path, command: &str, config_hash: &str, tolerances: serde_json::Value) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let meta = json!({
            "command": command,
            "config_sha256": config_hash,
            "version": VERSION,
            "tolerances": tolerances,
        });
        Ok(Self { dir: dir.to_path_buf(), meta, written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        let mut meta = self.meta.clone();
        meta["file"] = json!(name);
        fs::write(self.dir.join(format!("{name}.meta.json")), pretty(&meta))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<PathBuf> {
        self.write(name, &pretty(value))
    }

    /// CSV plus its whitespace-separated `.dat` twin for gnuplot.
    pub fn write_table(&mut self, stem: &str, csv: &str) -> io::Result<PathBuf> {
        self.write(&format!("{stem}.dat"), &csv_to_dat(csv))?;
        self.write(&format!("{stem}.csv"), csv)
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Shortest round-trip form of `t`, used in file names.
pub fn time_label(t: f64) -> String {
    format!("{t}")
}

fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.17e}");
}

fn row(out: &mut String, vals: &[f64]) {
    for (k, v) in vals.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        num(out, *v);
    }
    out.push('\n');
}

pub fn field_csv(xs: impl Iterator<Item = f64>, u: &[Complex64]) -> String {
    let mut out = String::from("x,re_u,im_u,abs_u\n");
    for (x, v) in xs.zip(u) {
        row(&mut out, &[x, v.re, v.im, v.norm()]);
    }
    out
}

pub fn scattering_csv(sd: &ScatteringData) -> String {
    let mut out = String::from("z,re_a,im_a,re_b,im_b,re_r,im_r\n");
    for s in &sd.continuous {
        let r = s.r();
        row(&mut out, &[s.z, s.a.re, s.a.im, s.b.re, s.b.im, r.re, r.im]);
    }
    out
}

#[derive(Serialize)]
struct DiscreteOut {
    time: f64,
    rho: f64,
    alpha_minus: f64,
    alpha_plus: f64,
    eigenvalues: Vec<DiscreteEntry>,
}

#[derive(Serialize)]
struct DiscreteEntry {
    xi: f64,
    z: [f64; 2],
    norming: [f64; 2],
    a_dot_xi: [f64; 2],
    a_dot_z: [f64; 2],
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn discrete_json(sd: &ScatteringData) -> impl Serialize {
    DiscreteOut {
        time: sd.time,
        rho: sd.boundary.rho(),
        alpha_minus: sd.boundary.alpha_minus(),
        alpha_plus: sd.boundary.alpha_plus(),
        eigenvalues: sd
            .discrete
            .iter()
            .map(|d| DiscreteEntry {
                xi: d.xi,
                z: pair(d.z),
                norming: pair(d.norming),
                a_dot_xi: pair(d.a_dot_xi),
                a_dot_z: pair(d.a_dot_z),
            })
            .collect(),
    }
}

pub fn csv_to_dat(csv: &str) -> String {
    let mut out = String::with_capacity(csv.len() + 2);
    for (k, line) in csv.lines().enumerate() {
        if k == 0 {
            out.push_str("# ");
        }
        out.push_str(&line.replace(',', " "));
        out.push('\n');
    }
    out
}

/// Script plotting column `col` against column 1 of every `.dat` file given.
pub fn gnuplot_script(title: &str, ylabel: &str, col: usize, files: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel 'x'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    let _ = writeln!(s, "set key outside");
    let parts: Vec<String> = files.iter().map(|f| format!("'{f}' using 1:{col} with lines title '{f}'")).collect();
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dat_comments_the_header() {
        assert_eq!(csv_to_dat("x,y\n1,2\n"), "# x y\n1 2\n");
    }

    #[test]
    fn field_rows_have_four_columns() {
        let s = field_csv([0.0, 0.5].into_iter(), &[Complex64::new(3.0, 4.0), Complex64::new(0.0, 1.0)]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 4);
        assert!(lines[1].ends_with("5.00000000000000000e0"));
    }

    #[test]
    fn labels() {
        assert_eq!(time_label(0.0), "0");
        assert_eq!(time_label(0.25), "0.25");
    }
}
