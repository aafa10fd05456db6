use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nnlif::experiments::Verdict;
use nnlif::grid::DensityProfile;
use nnlif::pde::SimRecord;

use crate::svg::{self, Series};

/// Default output root, overridable through the environment.
pub fn output_root() -> PathBuf {
    std::env::var_os("NNLIF_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)
}

pub fn timeseries_csv(record: &SimRecord) -> String {
    let mut out = String::from("t,N,mass\n");
    for i in 0..record.times.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            num(record.times[i]),
            num(record.rates[i]),
            num(record.masses[i])
        );
    }
    out
}

pub fn profile_csv(profile: &DensityProfile) -> String {
    let mut out = String::from("v,p\n");
    for (i, p) in profile.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", num(profile.grid.v(i)), num(*p));
    }
    out
}

/// File-name token for a snapshot time: `profile_t120.5.csv` style, with
/// just enough digits to be unambiguous.
fn time_token(t: f64) -> String {
    let s = format!("{t:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn verdict_rows(verdict: &Verdict) -> Vec<(String, String)> {
    match verdict {
        Verdict::SteadyState(n) => vec![
            ("verdict".into(), "steady".into()),
            ("n_infinity".into(), num(*n)),
        ],
        Verdict::Plateau => vec![("verdict".into(), "plateau".into())],
        Verdict::Periodic {
            period,
            n_min,
            n_max,
        } => vec![
            ("verdict".into(), "periodic".into()),
            ("period".into(), num(*period)),
            ("n_min".into(), num(*n_min)),
            ("n_max".into(), num(*n_max)),
        ],
        Verdict::Undetermined => vec![("verdict".into(), "undetermined".into())],
    }
}

pub fn report_csv(rows: &[(String, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

/// Writes the full artifact set for one simulation into `dir`.
pub fn write_run_bundle(
    dir: &Path,
    record: &SimRecord,
    initial: &DensityProfile,
    verdict: &Verdict,
    extra_report_rows: &[(String, String)],
) -> std::io::Result<()> {
    write_file(&dir.join("timeseries.csv"), &timeseries_csv(record))?;
    write_file(&dir.join("profile_initial.csv"), &profile_csv(initial))?;
    for (t, prof) in &record.snapshots {
        write_file(
            &dir.join(format!("profile_t{}.csv", time_token(*t))),
            &profile_csv(prof),
        )?;
    }
    write_file(
        &dir.join("profile_final.csv"),
        &profile_csv(&record.final_profile),
    )?;

    let mut rows = verdict_rows(verdict);
    rows.push((
        "final_mass".into(),
        num(*record.masses.last().unwrap_or(&f64::NAN)),
    ));
    rows.push((
        "final_rate".into(),
        num(*record.rates.last().unwrap_or(&f64::NAN)),
    ));
    rows.push(("rate_capped".into(), record.capped.to_string()));
    rows.extend_from_slice(extra_report_rows);
    write_file(&dir.join("report.csv"), &report_csv(&rows))?;

    let rate_points: Vec<(f64, f64)> = record
        .times
        .iter()
        .copied()
        .zip(record.rates.iter().copied())
        .collect();
    write_file(
        &dir.join("rates.svg"),
        &svg::line_chart("firing rate", "t", "N(t)", &[Series::new("", rate_points)]),
    )?;

    let mut series = vec![Series::dashed("initial", profile_points(initial))];
    for (t, prof) in &record.snapshots {
        series.push(Series::new(
            &format!("t = {}", time_token(*t)),
            profile_points(prof),
        ));
    }
    series.push(Series::new("final", profile_points(&record.final_profile)));
    write_file(
        &dir.join("profiles.svg"),
        &svg::line_chart("membrane-potential density", "v", "p(v)", &series),
    )?;
    Ok(())
}

pub fn profile_points(profile: &DensityProfile) -> Vec<(f64, f64)> {
    profile
        .values
        .iter()
        .enumerate()
        .map(|(i, &p)| (profile.grid.v(i), p))
        .collect()
}
