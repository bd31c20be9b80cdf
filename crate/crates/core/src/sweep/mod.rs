//! Batch execution of the reference parameter sweep.
//!
//! For every mode `n` and exponent `k` the amplitude is `F = 10^k / n` and
//! the width `mu` sits on (or, with `margin > 1`, above) the `nu = 0.01`
//! border curve. Each `(n, k)` pair is then run at every configured
//! viscosity with `mu` held fixed.

mod config;
mod report;

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::SweepConfig;
pub use report::{
    emit_borders, emit_reports, format_records, read_border_csv, read_profiles_csv, read_records_csv, write_records_csv, Manifest,
    PROFILE_HEADER, RECORD_HEADER,
};

use crate::convergence::{border_mu, border_value, dot_set_mu, sample_amplitude, BorderPoint};
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::force::ForceParams;
use crate::grid::{GridSpec, TimeGrid};
use crate::picard::{extract_profiles, run_iteration_with, ProfileSample};
use crate::stokes::HistoryOptions;

/// One parameter point of a sweep and its outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u32,
    /// Exponent in `F = 10^k / n`; absent for ad-hoc points.
    pub k: Option<u32>,
    #[serde(rename = "F")]
    pub amplitude: f64,
    pub mu: f64,
    pub nu: f64,
    pub mu_border: f64,
    pub predicted_convergent: bool,
    pub max_u1: Option<f64>,
    pub max_u2star: Option<f64>,
    pub ratio: Option<f64>,
    /// Degenerate first iterate or a failed solve.
    pub degenerate: bool,
}

/// A parameter point waiting to be run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub n: u32,
    pub k: Option<u32>,
    pub amplitude: f64,
    pub mu: f64,
    pub nu: f64,
    /// Extract angular/radial profiles for this point.
    pub profile: bool,
}

impl SweepPoint {
    pub fn params(&self) -> ForceParams {
        ForceParams {
            mode: self.n,
            amplitude: self.amplitude,
            mu: self.mu,
            nu: self.nu,
        }
    }
}

/// Final-time amplitude profiles for one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub n: u32,
    #[serde(rename = "F")]
    pub amplitude: f64,
    pub mu: f64,
    pub nu: f64,
    pub samples: Vec<ProfileSample>,
}

/// Border curve `mu = (F / nu)^(1/4)` over a logarithmic amplitude grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorderCurve {
    pub nu: f64,
    pub points: Vec<BorderPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    /// SHA-256 of the canonical config (output directory excluded).
    pub config_hash: String,
    /// `SOURCE_DATE_EPOCH` when set, otherwise the wall clock.
    pub timestamp_unix: u64,
}

/// A point whose solve aborted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub n: u32,
    pub k: Option<u32>,
    pub nu: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
    pub profiles: Vec<ProfileTable>,
    pub borders: Vec<BorderCurve>,
    pub failures: Vec<PointFailure>,
    pub provenance: Provenance,
}

impl SweepReport {
    pub fn has_degenerate(&self) -> bool {
        self.records.iter().any(|r| r.degenerate)
    }
}

pub fn config_hash(cfg: &SweepConfig) -> String {
    let canonical = SweepConfig {
        out_dir: None,
        ..cfg.clone()
    };
    let digest = Sha256::digest(canonical.to_toml_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

/// `samples` logarithmically spaced amplitudes over `[f_min, f_max]`, with
/// one border table per viscosity.
pub fn emit_border_curves(
    viscosities: &[f64],
    f_min: f64,
    f_max: f64,
    samples: usize,
) -> Result<Vec<BorderCurve>> {
    if !(f_min > 0.0 && f_max > f_min && f_max.is_finite()) {
        return Err(Error::param("amplitude range", format!("[{f_min}, {f_max}] is invalid")));
    }
    if samples < 2 {
        return Err(Error::param("samples", "need at least 2 samples"));
    }
    let ratio = f_max / f_min;
    let amps: Vec<f64> = (0..samples)
        .map(|i| match i {
            0 => f_min,
            _ if i == samples - 1 => f_max,
            _ => f_min * ratio.powf(i as f64 / (samples - 1) as f64),
        })
        .collect();
    viscosities
        .iter()
        .map(|&nu| {
            let points = amps
                .iter()
                .map(|&f| BorderPoint::new(f, nu))
                .collect::<Result<Vec<_>>>()?;
            Ok(BorderCurve { nu, points })
        })
        .collect()
}

/// Parameter points in `(n, k, nu)` order.
pub fn sweep_points(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    let profile_k = cfg.k_values.last().copied();
    let profile_nu = cfg.viscosities.first().copied();
    let mut points = Vec::new();
    for &n in &cfg.modes {
        for &k in &cfg.k_values {
            let amplitude = sample_amplitude(n, k);
            let mu = dot_set_mu(amplitude, cfg.margin)?;
            for &nu in &cfg.viscosities {
                points.push(SweepPoint {
                    n,
                    k: Some(k),
                    amplitude,
                    mu,
                    nu,
                    profile: Some(k) == profile_k && Some(nu) == profile_nu,
                });
            }
        }
    }
    Ok(points)
}

/// Solve one point. Solver failures are folded into the record.
pub fn evaluate_point(
    point: &SweepPoint,
    grid: &GridSpec,
    tg: &TimeGrid,
    opts: HistoryOptions,
    radii: &[f64],
    angles: &[f64],
) -> (SweepRecord, Option<ProfileTable>, Option<PointFailure>) {
    let p = point.params();
    let mut record = SweepRecord {
        n: point.n,
        k: point.k,
        amplitude: point.amplitude,
        mu: point.mu,
        nu: point.nu,
        mu_border: border_mu(point.amplitude, point.nu).unwrap_or(f64::NAN),
        predicted_convergent: border_value(point.amplitude, point.mu, point.nu) < 1.0,
        max_u1: None,
        max_u2star: None,
        ratio: None,
        degenerate: true,
    };
    let failure = |e: Error| PointFailure {
        n: point.n,
        k: point.k,
        nu: point.nu,
        error: e.to_string(),
    };
    let res = match run_iteration_with(&p, grid, tg, opts) {
        Ok(res) => res,
        Err(e) => return (record, None, Some(failure(e))),
    };
    record.max_u1 = Some(res.max_u1);
    record.max_u2star = Some(res.max_u2star);
    record.ratio = res.ratio;
    record.degenerate = res.degenerate;

    if !point.profile {
        return (record, None, None);
    }
    match extract_profiles(&res, radii, angles) {
        Ok(samples) => (
            record,
            Some(ProfileTable {
                n: point.n,
                amplitude: point.amplitude,
                mu: point.mu,
                nu: point.nu,
                samples,
            }),
            None,
        ),
        Err(e) => {
            record.degenerate = true;
            (record, None, Some(failure(e)))
        }
    }
}

fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    run_sweep_with(cfg, Execution::Parallel { workers: cfg.workers })
}

pub fn run_sweep_with(cfg: &SweepConfig, exec: Execution) -> Result<SweepReport> {
    cfg.validate()?;
    if let Some(dir) = &cfg.out_dir {
        ensure_writable(dir)?;
    }
    let grid = cfg.grid()?;
    let tg = cfg.time_grid()?;
    let opts = cfg.history_options();
    let angles = cfg.angles();
    let points = sweep_points(cfg)?;

    let outcomes = map_ordered(&points, exec, |pt| {
        evaluate_point(pt, &grid, &tg, opts, &cfg.profile_radii, &angles)
    });

    let mut records = Vec::with_capacity(outcomes.len());
    let mut profiles = Vec::new();
    let mut failures = Vec::new();
    for (record, profile, failure) in outcomes {
        records.push(record);
        profiles.extend(profile);
        failures.extend(failure);
    }
    Ok(SweepReport {
        borders: emit_border_curves(
            &cfg.viscosities,
            cfg.border_f_min,
            cfg.border_f_max,
            cfg.border_samples,
        )?,
        config: cfg.clone(),
        records,
        profiles,
        failures,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(cfg),
            timestamp_unix: timestamp(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepConfig {
        SweepConfig {
            half_width: 4.0,
            resolution: 32,
            t_final: 0.2,
            steps: 10,
            modes: vec![1, 2],
            k_values: vec![0, 1],
            viscosities: vec![0.1, 1.0],
            profile_radii: vec![0.0, 1.0],
            profile_angles: 3,
            ..Default::default()
        }
    }

    #[test]
    fn default_sweep_shape() {
        let pts = sweep_points(&SweepConfig::default()).unwrap();
        assert_eq!(pts.len(), 120);
        assert_eq!(pts.iter().filter(|p| p.profile).count(), 5);
        let mut keys: Vec<_> = pts.iter().map(|p| (p.n, p.k, p.nu.to_bits())).collect();
        let sorted = keys.clone();
        keys.dedup();
        assert_eq!(keys, sorted);
        // ordered by n, then k, then nu
        assert_eq!((pts[0].n, pts[0].k, pts[0].nu), (1, Some(0), 0.01));
        assert_eq!((pts[6].n, pts[6].k, pts[6].nu), (1, Some(1), 0.01));
        assert_eq!((pts[119].n, pts[119].k, pts[119].nu), (5, Some(3), 1.5));
        // mu on the nu = 0.01 border, shared across viscosities
        assert!((pts[23].mu - 10f64.powf(1.25)).abs() < 1e-12);
        assert_eq!(pts[18].mu, pts[23].mu);
    }

    #[test]
    fn tiny_sweep_records() {
        let report = run_sweep_with(&tiny(), Execution::Sequential).unwrap();
        assert_eq!(report.records.len(), 8);
        assert_eq!(report.profiles.len(), 2);
        assert_eq!(report.profiles[0].samples.len(), 6);
        assert!(report.failures.is_empty());
        for r in &report.records {
            assert_eq!(r.predicted_convergent, r.amplitude / (r.mu.powi(4) * r.nu) < 1.0);
            assert!(r.ratio.unwrap() < 1.0);
            assert!(!r.degenerate);
        }
        let par = run_sweep_with(&tiny(), Execution::Parallel { workers: 2 }).unwrap();
        assert_eq!(par.records, report.records);
        assert_eq!(par.profiles, report.profiles);
    }

    #[test]
    fn empty_viscosity_list_is_a_valid_empty_sweep() {
        let cfg = SweepConfig {
            viscosities: vec![],
            ..tiny()
        };
        let report = run_sweep_with(&cfg, Execution::Sequential).unwrap();
        assert!(report.records.is_empty());
        assert!(report.profiles.is_empty());
        assert!(report.borders.is_empty());
    }

    #[test]
    fn unwritable_output_aborts_before_solving() {
        let file = tempfile::NamedTempFile::new().unwrap();
        let cfg = SweepConfig {
            // a regular file cannot host a directory
            out_dir: Some(file.path().join("sub")),
            ..SweepConfig::default()
        };
        let t = std::time::Instant::now();
        assert!(matches!(run_sweep(&cfg), Err(Error::Io { .. })));
        assert!(t.elapsed().as_secs() < 5);
    }

    #[test]
    fn border_curves() {
        let curves = emit_border_curves(&[0.01, 1.5], 0.2, 1000.0, 50).unwrap();
        let low = &curves[0].points;
        assert_eq!(low.len(), 50);
        assert_eq!(low[0].amplitude, 0.2);
        assert_eq!(low[49].amplitude, 1000.0);
        assert!((low[0].mu_border - 2.114742526881128).abs() < 1e-12);
        assert!((low[49].mu_border - 17.782_794_100_389_23).abs() < 1e-12);
        assert!(low.windows(2).all(|w| w[1].mu_border > w[0].mu_border));
        for (a, b) in curves[0].points.iter().zip(&curves[1].points) {
            assert!(b.mu_border < a.mu_border);
        }
        let unit = emit_border_curves(&[1.0], 1.0, 10.0, 2).unwrap();
        assert_eq!(unit[0].points[0].mu_border, 1.0);
        assert!(emit_border_curves(&[1.0], 0.0, 10.0, 5).is_err());
        assert!(emit_border_curves(&[1.0], 1.0, 10.0, 1).is_err());
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = SweepConfig::default();
        let b = SweepConfig {
            out_dir: Some("elsewhere".into()),
            ..Default::default()
        };
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
        assert_ne!(config_hash(&a), config_hash(&tiny()));
    }
}
