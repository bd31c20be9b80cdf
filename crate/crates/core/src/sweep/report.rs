//! CSV tables and the run manifest.
//!
//! Files written by [`emit_reports`]:
//!
//! * `records.csv`: `n,k,F,mu,nu,mu_border,predicted_convergent,max_u1,max_u2star,ratio,degenerate`
//! * `border_<nu>.csv`: `nu,F,mu_border`, one per viscosity
//! * `profiles_n<n>.csv`: `n,F,mu,nu,r,phi,amp_u1,amp_u2star`, one per mode
//! * `manifest.json`: provenance, the full config and the file list
//!
//! Floats are written in shortest round-trip form and absent values as empty
//! fields, so parsing a table and writing it back reproduces it byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BorderCurve, PointFailure, ProfileTable, Provenance, SweepConfig, SweepRecord, SweepReport};
use crate::convergence::BorderPoint;
use crate::error::{Error, Result};
use crate::picard::ProfileSample;

pub const RECORD_HEADER: [&str; 11] = [
    "n",
    "k",
    "F",
    "mu",
    "nu",
    "mu_border",
    "predicted_convergent",
    "max_u1",
    "max_u2star",
    "ratio",
    "degenerate",
];

pub const PROFILE_HEADER: [&str; 8] = ["n", "F", "mu", "nu", "r", "phi", "amp_u1", "amp_u2star"];

const BORDER_HEADER: [&str; 3] = ["nu", "F", "mu_border"];

#[derive(Serialize, Deserialize)]
struct ProfileRow {
    n: u32,
    #[serde(rename = "F")]
    amplitude: f64,
    mu: f64,
    nu: f64,
    r: f64,
    phi: f64,
    amp_u1: f64,
    amp_u2star: f64,
}

#[derive(Serialize, Deserialize)]
struct BorderRow {
    nu: f64,
    #[serde(rename = "F")]
    amplitude: f64,
    mu_border: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub provenance: Provenance,
    pub records: usize,
    pub degenerate: usize,
    pub failures: Vec<PointFailure>,
    pub files: Vec<String>,
    pub config: SweepConfig,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn write_rows<W: Write, R: Serialize>(
    out: W,
    header: Option<&[&str]>,
    rows: impl IntoIterator<Item = R>,
) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_table<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(BufWriter::new(file), Some(header), rows).map_err(|e| csv_err(path, e))
}

/// Records in the `records.csv` row format, optionally headed.
pub fn format_records(records: &[SweepRecord], header: bool) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, header.then_some(&RECORD_HEADER[..]), records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn read_table<R: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let found = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Config(format!(
            "{}: unexpected header {:?}",
            path.display(),
            found.iter().collect::<Vec<_>>()
        )));
    }
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

pub fn write_records_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    write_table(path, &RECORD_HEADER, records)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    read_table(path, &RECORD_HEADER)
}

fn write_profiles_csv(path: &Path, table: &ProfileTable) -> Result<()> {
    write_table(
        path,
        &PROFILE_HEADER,
        table.samples.iter().map(|s| ProfileRow {
            n: table.n,
            amplitude: table.amplitude,
            mu: table.mu,
            nu: table.nu,
            r: s.r,
            phi: s.phi,
            amp_u1: s.amp1,
            amp_u2star: s.amp2,
        }),
    )
}

pub fn read_profiles_csv(path: &Path) -> Result<ProfileTable> {
    let rows: Vec<ProfileRow> = read_table(path, &PROFILE_HEADER)?;
    let first = rows
        .first()
        .ok_or_else(|| Error::Config(format!("{}: empty profile table", path.display())))?;
    Ok(ProfileTable {
        n: first.n,
        amplitude: first.amplitude,
        mu: first.mu,
        nu: first.nu,
        samples: rows
            .iter()
            .map(|r| ProfileSample {
                r: r.r,
                phi: r.phi,
                amp1: r.amp_u1,
                amp2: r.amp_u2star,
            })
            .collect(),
    })
}

fn write_border_csv(path: &Path, curve: &BorderCurve) -> Result<()> {
    write_table(
        path,
        &BORDER_HEADER,
        curve.points.iter().map(|p| BorderRow {
            nu: p.nu,
            amplitude: p.amplitude,
            mu_border: p.mu_border,
        }),
    )
}

pub fn read_border_csv(path: &Path) -> Result<BorderCurve> {
    let rows: Vec<BorderRow> = read_table(path, &BORDER_HEADER)?;
    let nu = rows
        .first()
        .map(|r| r.nu)
        .ok_or_else(|| Error::Config(format!("{}: empty border table", path.display())))?;
    Ok(BorderCurve {
        nu,
        points: rows
            .iter()
            .map(|r| BorderPoint {
                amplitude: r.amplitude,
                nu: r.nu,
                mu_border: r.mu_border,
            })
            .collect(),
    })
}

pub(crate) fn border_file_name(nu: f64) -> String {
    format!("border_{nu}.csv")
}

pub(crate) fn profile_file_name(n: u32) -> String {
    format!("profiles_n{n}.csv")
}

/// Border tables only, one file per viscosity.
pub fn emit_borders(curves: &[BorderCurve], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    curves
        .iter()
        .map(|c| {
            let path = dir.join(border_file_name(c.nu));
            write_border_csv(&path, c)?;
            Ok(path)
        })
        .collect()
}

/// Write every table of `report` plus `manifest.json` into `dir`.
pub fn emit_reports(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();

    let records = dir.join("records.csv");
    write_records_csv(&records, &report.records)?;
    files.push(records);
    files.extend(emit_borders(&report.borders, dir)?);
    for table in &report.profiles {
        let path = dir.join(profile_file_name(table.n));
        write_profiles_csv(&path, table)?;
        files.push(path);
    }

    let manifest_path = dir.join("manifest.json");
    let mut names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    names.push("manifest.json".into());
    let manifest = Manifest {
        provenance: report.provenance.clone(),
        records: report.records.len(),
        degenerate: report.records.iter().filter(|r| r.degenerate).count(),
        failures: report.failures.clone(),
        files: names,
        // output location is not part of the run's identity
        config: SweepConfig {
            out_dir: None,
            ..report.config.clone()
        },
    };
    let file = File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &manifest)
        .map_err(|e| Error::io(&manifest_path, std::io::Error::other(e)))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&manifest_path, e))?;
    files.push(manifest_path);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::sweep::config_hash;

    fn empty_report() -> SweepReport {
        let config = SweepConfig {
            viscosities: vec![],
            ..Default::default()
        };
        SweepReport {
            provenance: Provenance {
                version: "0.0.0".into(),
                config_hash: config_hash(&config),
                timestamp_unix: 0,
            },
            config,
            records: vec![],
            profiles: vec![],
            borders: vec![],
            failures: vec![],
        }
    }

    #[test]
    fn empty_report_writes_header_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_reports(&empty_report(), dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
        assert_eq!(text, RECORD_HEADER.join(",") + "\n");
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.records, 0);
        assert_eq!(manifest.files, vec!["records.csv", "manifest.json"]);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let file = tempfile::NamedTempFile::new().unwrap();
        let bad = file.path().join("nested");
        match emit_reports(&empty_report(), &bad) {
            Err(Error::Io { path, .. }) => assert_eq!(path, bad),
            other => panic!("expected i/o error, got {other:?}"),
        }
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e12f64..1e12, 1e-300f64..1e-3, Just(0.0), Just(1000.0), Just(0.01)]
    }

    prop_compose! {
        fn record()(n in 1u32..10, k in proptest::option::of(0u32..5), f in finite(), mu in finite(),
                    nu in finite(), mb in finite(), pc in any::<bool>(),
                    m1 in proptest::option::of(finite()), m2 in proptest::option::of(finite()),
                    ratio in proptest::option::of(finite()), dg in any::<bool>()) -> SweepRecord {
            SweepRecord { n, k, amplitude: f, mu, nu, mu_border: mb, predicted_convergent: pc,
                          max_u1: m1, max_u2star: m2, ratio, degenerate: dg }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn records_round_trip_byte_identically(records in proptest::collection::vec(record(), 0..8)) {
            let dir = tempfile::tempdir().unwrap();
            let a = dir.path().join("a.csv");
            let b = dir.path().join("b.csv");
            write_records_csv(&a, &records).unwrap();
            let parsed = read_records_csv(&a).unwrap();
            prop_assert_eq!(&parsed, &records);
            write_records_csv(&b, &parsed).unwrap();
            prop_assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        }
    }

    #[test]
    fn profile_and_border_tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let table = ProfileTable {
            n: 3,
            amplitude: 10.0 / 3.0,
            mu: 4.27,
            nu: 0.01,
            samples: vec![
                ProfileSample { r: 0.0, phi: 0.0, amp1: 1.5e-3, amp2: 2.25e-9 },
                ProfileSample { r: 0.5, phi: std::f64::consts::PI, amp1: 0.1, amp2: 0.0 },
            ],
        };
        let path = dir.path().join(profile_file_name(3));
        write_profiles_csv(&path, &table).unwrap();
        assert_eq!(read_profiles_csv(&path).unwrap(), table);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,F,mu,nu,r,phi,amp_u1,amp_u2star\n"));

        let curve = crate::sweep::emit_border_curves(&[0.75], 0.2, 1000.0, 7).unwrap().remove(0);
        let path = dir.path().join(border_file_name(0.75));
        assert!(path.ends_with("border_0.75.csv"));
        write_border_csv(&path, &curve).unwrap();
        assert_eq!(read_border_csv(&path).unwrap(), curve);
    }

    #[test]
    fn formatted_rows_match_the_file_format() {
        let rec = SweepRecord {
            n: 1,
            k: None,
            amplitude: 1000.0,
            mu: 18.5,
            nu: 0.01,
            mu_border: 17.5,
            predicted_convergent: true,
            max_u1: Some(0.25),
            max_u2star: Some(1e-3),
            ratio: Some(4e-3),
            degenerate: false,
        };
        assert_eq!(format_records(std::slice::from_ref(&rec), false), "1,,1000.0,18.5,0.01,17.5,true,0.25,0.001,0.004,false\n");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_records_csv(&path, std::slice::from_ref(&rec)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format_records(&[rec], true));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        std::fs::write(&path, "n,k,F\n1,0,1\n").unwrap();
        assert!(read_records_csv(&path).is_err());
    }
}
