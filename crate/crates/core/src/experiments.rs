//! Long-time behaviour detectors for simulation records, and orchestration
//! of discrete-vs-continuum comparison studies and delay sweeps.

use crate::discrete::{self, Classification, FiringRateTrajectory};
use crate::error::Result;
use crate::grid::{DensityProfile, Grid};
use crate::init;
use crate::params::ModelParams;
use crate::pde::{self, SimOptions, SimRecord};
use crate::specfun;

/// Long-time behaviour read off a finished simulation record.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    SteadyState(f64),
    Plateau,
    Periodic { period: f64, n_min: f64, n_max: f64 },
    Undetermined,
}

/// Default trailing analysis window: 20% of the run or four delay periods,
/// whichever is longer (transients scale with the delay).
pub fn default_window(t_final: f64, delay: f64) -> f64 {
    (0.2 * t_final).max(4.0 * delay)
}

fn trailing_range(record: &SimRecord, window: f64) -> std::ops::Range<usize> {
    let t_end = *record.times.last().unwrap();
    let start = record
        .times
        .partition_point(|&t| t < t_end - window);
    start..record.times.len()
}

/// Steady iff the firing rate has settled onto the target by the end of
/// the run and the final profile matches the stationary profile for the
/// target rate. Convergence may be oscillatory and its transient may only
/// die out late in the run, so the test is made on the second half of the
/// trailing window: its mean must sit within `tol` of the target, its
/// worst excursion must stay well inside the target scale, and excursions
/// must not grow from the first half to the second.
/// Returns the trailing mean residual alongside the flag.
pub fn detect_steady(
    params: &ModelParams,
    record: &SimRecord,
    n_target: f64,
    window: f64,
    tol: f64,
) -> Result<(bool, f64)> {
    let range = trailing_range(record, window);
    let rates = &record.rates[range.clone()];
    let times = &record.times[range];
    let t_end = *times.last().unwrap();
    let half_max = |late: bool| -> f64 {
        times
            .iter()
            .zip(rates)
            .filter(|(t, _)| ((t_end - **t) / window <= 0.5) == late)
            .map(|(_, &n)| (n - n_target).abs())
            .fold(0.0, f64::max)
    };
    let (early, late) = (half_max(false), half_max(true));
    let tail: Vec<f64> = times
        .iter()
        .zip(rates)
        .filter(|(t, _)| (t_end - **t) / window <= 0.5)
        .map(|(_, &n)| n)
        .collect();
    let residual = (tail.iter().sum::<f64>() / tail.len() as f64 - n_target).abs();
    let excursion_ok = late < 0.5 * n_target.abs().max(tol);
    let decaying = late <= 1.1 * early + 0.1 * tol;
    if residual >= tol || !excursion_ok || !decaying {
        return Ok((false, residual.max(late))); // report the larger scale
    }
    let target =
        specfun::pseudo_equilibrium_profile(params, n_target, &record.final_profile.grid)?;
    let profile_gap = record.final_profile.sup_distance(&target);
    let peak = target.values.iter().fold(0.0f64, |m, &x| m.max(x));
    Ok((profile_gap < 0.1 * peak.max(1.0), residual))
}

/// Period estimate from the spacing of successive maxima of N(t) over the
/// trailing window. Periodic iff at least `min_cycles` full cycles are
/// seen with amplitude stable within 10% and period within 5%.
pub fn detect_periodic(record: &SimRecord, window: f64, min_cycles: usize) -> Verdict {
    let range = trailing_range(record, window);
    let times = &record.times[range.clone()];
    let rates = &record.rates[range];
    if rates.len() < 8 {
        return Verdict::Undetermined;
    }
    let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let amp = hi - lo;
    if amp < 1e-6 * hi.abs().max(1e-12) {
        return Verdict::Undetermined; // flat trace: not periodic
    }
    // local maxima above the midline, separated by a dip below it
    let mid = 0.5 * (lo + hi);
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    let mut below = true;
    for (&t, &n) in times.iter().zip(rates) {
        if n > mid {
            if below {
                best = None;
                below = false;
            }
            if best.map_or(true, |(_, bn)| n > bn) {
                best = Some((t, n));
            }
        } else if !below {
            if let Some(p) = best.take() {
                peaks.push(p);
            }
            below = true;
        }
    }
    if peaks.len() < min_cycles + 1 {
        return Verdict::Undetermined;
    }
    let gaps: Vec<f64> = peaks.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let period = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let period_ok = gaps.iter().all(|&g| (g - period).abs() < 0.05 * period);
    let amp_ref = peaks.last().unwrap().1 - lo;
    let amp_ok = peaks
        .iter()
        .all(|&(_, pn)| ((pn - lo) - amp_ref).abs() < 0.10 * amp_ref);
    if period_ok && amp_ok {
        Verdict::Periodic { period, n_min: lo, n_max: hi }
    } else {
        Verdict::Undetermined
    }
}

/// Plateau iff N(t) keeps climbing over the trailing window while the
/// profile flattens out between V_R and V_F: relative sup-deviation from
/// its mean below `flat_tol` with over 90% of the mass there.
///
/// The rate climbs as a staircase with one transient (and a small dip) per
/// delay period, so monotonicity is judged on per-period bin means rather
/// than raw samples. Flatness is judged away from the reset kink and the
/// absorbing layer at the threshold, where the profile legitimately turns.
pub fn detect_plateau(params: &ModelParams, record: &SimRecord, window: f64, flat_tol: f64) -> bool {
    let range = trailing_range(record, window);
    let times = &record.times[range.clone()];
    let rates = &record.rates[range];
    let bin = params.delay.max(window / 8.0);
    let t_end = *times.last().unwrap();
    let mut means = Vec::new();
    let mut k = (window / bin).ceil() as i64;
    while k > 0 {
        let (lo, hi) = (t_end - k as f64 * bin, t_end - (k - 1) as f64 * bin);
        let vals: Vec<f64> = times
            .iter()
            .zip(rates)
            .filter(|(t, _)| **t > lo && **t <= hi)
            .map(|(_, &n)| n)
            .collect();
        if !vals.is_empty() {
            means.push(vals.iter().sum::<f64>() / vals.len() as f64);
        }
        k -= 1;
    }
    if means.len() < 2 || means.windows(2).any(|w| w[1] < w[0] * (1.0 - 1e-3)) {
        return false;
    }
    let prof = &record.final_profile;
    let g = &prof.grid;
    let margin = (5.0 * g.dv).max(0.1 * (g.v_thresh - g.v_reset));
    let inner: Vec<f64> = (g.i_vr..=g.n_v)
        .filter(|&i| g.v(i) > g.v_reset + margin && g.v(i) < g.v_thresh - margin)
        .map(|i| prof.values[i])
        .collect();
    if inner.is_empty() {
        return false;
    }
    let mean = inner.iter().sum::<f64>() / inner.len() as f64;
    let dev = inner.iter().map(|&x| (x - mean).abs()).fold(0.0, f64::max);
    if dev > flat_tol * mean.abs().max(1e-12) {
        return false;
    }
    let inner_mass = crate::grid::trapezoid_mass(&prof.values[g.i_vr..], g.dv);
    inner_mass > 0.9
}

/// Applies the detectors in precedence order Steady > Periodic > Plateau,
/// so exactly one verdict is reported.
pub fn classify_record(
    params: &ModelParams,
    record: &SimRecord,
    window: f64,
) -> Result<Verdict> {
    // steady is checked against the nearest stationary root, if any
    let set = specfun::solve_stationary(params)?;
    let n_end = *record.rates.last().unwrap();
    if let Some(root) = set.nearest(n_end) {
        let (ok, _) = detect_steady(params, record, root.n, window, (0.1 * root.n).max(5e-3))?;
        if ok {
            return Ok(Verdict::SteadyState(root.n));
        }
    }
    // oscillations run at roughly twice the delay per cycle, so the
    // periodicity window must hold about four of them
    let t_span = *record.times.last().unwrap() - record.times[0];
    let periodic_window = (8.0 * params.delay).max(window).min(0.9 * t_span);
    if let Verdict::Periodic { period, n_min, n_max } =
        detect_periodic(record, periodic_window, 3)
    {
        return Ok(Verdict::Periodic { period, n_min, n_max });
    }
    if detect_plateau(params, record, window, 0.15) {
        return Ok(Verdict::Plateau);
    }
    Ok(Verdict::Undetermined)
}

/// Outcome of one discrete-vs-continuum comparison or sweep member.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub params: ModelParams,
    pub discrete: Classification,
    pub verdict: Verdict,
    pub agreement: bool,
    /// per-k sup-norm distance between the profile just before t = k d and
    /// the k-th pseudo-equilibrium
    pub profile_gaps: Vec<(usize, f64)>,
    /// per-k |N(k d^-) - N_k|
    pub rate_gaps: Vec<(usize, f64)>,
    pub record: SimRecord,
    pub trajectory: FiringRateTrajectory,
}

fn verdicts_agree(discrete: &Classification, verdict: &Verdict) -> bool {
    matches!(
        (discrete, verdict),
        (Classification::ConvergedToFixedPoint(_), Verdict::SteadyState(_))
            | (Classification::Diverging, Verdict::Plateau)
            | (Classification::TwoCycle(_, _), Verdict::Periodic { .. })
    )
}

/// Runs the full equation from the profile frozen at `n_pre` and the
/// recurrence from that profile's own firing rate Nbar = 1/I(n_pre) (the
/// rate the history feeds back on [0, d), hence index 0 of the sequence),
/// then measures how closely the solution tracks the pseudo-equilibria at
/// the delay multiples.
pub fn compare_discrete_continuous(
    params: &ModelParams,
    n_pre: f64,
    t_end: f64,
    grid: &Grid,
) -> Result<ExperimentReport> {
    assert!(params.delay > 0.0);
    let (ic, n_bar) = init::ic_pseudo_equilibrium(params, grid, n_pre)?;
    let traj = discrete::iterate_firing_rate(params, n_bar, discrete::MAX_K, discrete::ITER_TOL)?;
    let k_max = (t_end / params.delay).floor() as usize;
    let mut opts = SimOptions::new(t_end);
    opts.record_every = 8;
    // sample just before each delay multiple
    opts.snapshot_times = (1..=k_max)
        .map(|k| k as f64 * params.delay - 1e-9)
        .collect();
    let record = pde::simulate(params, &ic, n_bar, &opts)?;

    let mut profile_gaps = Vec::new();
    let mut rate_gaps = Vec::new();
    for (j, (t_snap, prof)) in record.snapshots.iter().enumerate() {
        let k = j + 1;
        if k >= traj.values.len() {
            break;
        }
        let target = specfun::pseudo_equilibrium_profile(params, traj.values[k - 1], grid);
        if let Ok(target) = target {
            profile_gaps.push((k, prof.sup_distance(&target)));
        }
        let i = record.times.partition_point(|&t| t < *t_snap);
        let n_at = record.rates[i.min(record.rates.len() - 1)];
        rate_gaps.push((k, (n_at - traj.values[k]).abs()));
    }

    let verdict = classify_record(params, &record, default_window(t_end, params.delay))?;
    let agreement = verdicts_agree(&traj.classification, &verdict);
    Ok(ExperimentReport {
        params: *params,
        discrete: traj.classification.clone(),
        verdict,
        agreement,
        profile_gaps,
        rate_gaps,
        record,
        trajectory: traj,
    })
}

/// Initial-condition selector for sweeps and configured runs.
#[derive(Debug, Clone, PartialEq)]
pub enum IcSpec {
    PseudoEquilibrium { n: f64 },
    CycleLow,
    CycleHigh,
    DoubleMaxwellian { mu: f64, sigma: f64 },
}

impl IcSpec {
    pub fn build(&self, params: &ModelParams, grid: &Grid) -> Result<(DensityProfile, f64)> {
        match *self {
            IcSpec::PseudoEquilibrium { n } => init::ic_pseudo_equilibrium(params, grid, n),
            IcSpec::CycleLow => {
                let prof = init::ic_cycle_low(params, grid)?;
                let n0 = pde::firing_rate(params, &prof);
                Ok((prof, n0))
            }
            IcSpec::CycleHigh => {
                let prof = init::ic_cycle_high(params, grid)?;
                let n0 = pde::firing_rate(params, &prof);
                Ok((prof, n0))
            }
            IcSpec::DoubleMaxwellian { mu, sigma } => {
                let prof = init::ic_double_maxwellian(grid, mu, sigma)?;
                let n0 = pde::firing_rate(params, &prof);
                Ok((prof, n0))
            }
        }
    }
}

/// One full simulation per delay value, classified independently; runs in
/// parallel, results in input order.
pub fn delay_sweep(
    params: &ModelParams,
    delays: &[f64],
    ic: &IcSpec,
    t_end_factor: f64,
    grid: &Grid,
) -> Result<Vec<(f64, Verdict, SimRecord)>> {
    assert!(!delays.is_empty());
    let results: Vec<Result<(f64, Verdict, SimRecord)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = delays
            .iter()
            .map(|&d| {
                scope.spawn(move || {
                    let p = ModelParams { delay: d, ..*params };
                    let (prof, n0) = ic.build(&p, grid)?;
                    let t_end = t_end_factor * d.max(1.0);
                    let mut opts = SimOptions::new(t_end);
                    opts.record_every = 8;
                    let record = pde::simulate(&p, &prof, n0, &opts)?;
                    let verdict = classify_record(&p, &record, default_window(t_end, d))?;
                    Ok((d, verdict, record))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    results.into_iter().collect()
}
