//! The firing-rate recurrence N_{k+1} = 1/I(N_k): iteration, asymptotic
//! classification, 2-cycle extraction, and the associated sequence of
//! pseudo-equilibrium profiles.

use crate::error::{Error, Result};
use crate::grid::{DensityProfile, Grid};
use crate::params::ModelParams;
use crate::specfun::{self, eval_f, solve_stationary};

pub const ITER_TOL: f64 = 1e-9;
pub const MAX_K: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    ConvergedToFixedPoint(f64),
    TwoCycle(f64, f64),
    Diverging,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct FiringRateTrajectory {
    pub values: Vec<f64>,
    pub classification: Classification,
    pub iterations_used: usize,
}

/// A 2-cycle {N-, N+} of f, i.e. a pair of fixed points of F = f o f.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCycle {
    pub n_minus: f64,
    pub n_plus: f64,
    /// |F(N-) - N-|
    pub residual: f64,
}

/// Iterates the recurrence from N0 and classifies the tail.
///
/// Convergence means successive values within `tol` and the limit matching
/// a stationary root. A 2-cycle means both parity subsequences are Cauchy
/// while consecutive values stay well separated. Divergence (only possible
/// for b > 0) means exceeding a cap of 10x the largest root with f still
/// above the diagonal there. Anything else is reported as undetermined.
pub fn iterate_firing_rate(
    params: &ModelParams,
    n0: f64,
    max_k: usize,
    tol: f64,
) -> Result<FiringRateTrajectory> {
    assert!(n0 >= 0.0 && max_k >= 1 && tol > 0.0);
    let set = solve_stationary(params)?;
    let cap = 10.0 * set.roots.iter().map(|r| r.n).fold(1.0, f64::max);

    let mut values = vec![n0];
    let mut classification = Classification::Undetermined;
    for k in 0..max_k {
        let n_prev = values[k];
        let n_next = eval_f(params, n_prev)?;
        values.push(n_next);

        if params.b > 0.0 && n_next > cap && eval_f(params, n_next)? > n_next {
            classification = Classification::Diverging;
            break;
        }
        if (n_next - n_prev).abs() < tol {
            if let Some(root) = set.nearest(n_next) {
                if (root.n - n_next).abs() < 10.0 * tol {
                    classification = Classification::ConvergedToFixedPoint(root.n);
                    break;
                }
            }
            classification = Classification::ConvergedToFixedPoint(n_next);
            break;
        }
        if k >= 3 {
            let m = values.len();
            let even_gap = (values[m - 1] - values[m - 3]).abs();
            let odd_gap = (values[m - 2] - values[m - 4]).abs();
            if even_gap < tol && odd_gap < tol && (n_next - n_prev).abs() > 10.0 * tol {
                let (lo, hi) = if n_prev < n_next {
                    (n_prev, n_next)
                } else {
                    (n_next, n_prev)
                };
                classification = Classification::TwoCycle(lo, hi);
                break;
            }
        }
    }
    let iterations_used = values.len() - 1;
    Ok(FiringRateTrajectory { values, classification, iterations_used })
}

fn bisect_fixed_point(
    params: &ModelParams,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
) -> Result<f64> {
    let gap = |n: f64| -> Result<f64> {
        let f1 = eval_f(params, n)?;
        Ok(eval_f(params, f1)? - n)
    };
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = gap(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finds the nontrivial fixed points of F = f o f by a sign-change scan on
/// [0, f(0)], skipping a neighbourhood of the stationary root N* (itself
/// always a fixed point of F). Requires b below the period-doubling value.
pub fn find_two_cycle(params: &ModelParams) -> Result<TwoCycle> {
    assert!(params.b < 0.0, "2-cycles occur only for inhibitory coupling");
    let set = solve_stationary(params)?;
    let n_star = set.roots[0].n;
    let f0 = eval_f(params, 0.0)?;
    let guard = 1e-4 * f0;

    let gap = |n: f64| -> Result<f64> {
        let f1 = eval_f(params, n)?;
        Ok(eval_f(params, f1)? - n)
    };

    // uniform scan of [0, f(0)]; F(0) - 0 > 0 always, so the low cycle
    // branch is the first sign change below N* (possibly within the very
    // first cell for strongly inhibitory b, where N- is vanishingly small)
    let n_scan = 600usize;
    let mut roots = Vec::new();
    let mut prev_n = 0.0;
    let mut prev_g = gap(0.0)?;
    for j in 1..=n_scan {
        let n = f0 * j as f64 / n_scan as f64;
        let g = gap(n)?;
        if (prev_g < 0.0) != (g < 0.0) {
            let root = bisect_fixed_point(params, prev_n, n, prev_g)?;
            if (root - n_star).abs() > guard.max(1e-6) {
                roots.push(root);
            }
        }
        prev_n = n;
        prev_g = g;
    }
    roots.retain(|r| (r - n_star).abs() > 100.0 * 1e-12);

    let n_minus = roots.iter().copied().filter(|&r| r < n_star).fold(f64::NAN, f64::min);
    let n_plus = roots.iter().copied().filter(|&r| r > n_star).fold(f64::NAN, f64::max);
    if !n_minus.is_finite() || !n_plus.is_finite() {
        return Err(Error::NoCycleFound { n_star });
    }
    let residual = (gap(n_minus)?).abs();
    Ok(TwoCycle { n_minus, n_plus, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonotonicityReport {
    /// b > 0: the whole sequence moves one way.
    Monotone(Direction),
    /// b < 0: parity subsequences are each monotone, on opposite sides of
    /// the stationary root.
    AlternatingMonotone { even: Direction, odd: Direction },
}

fn direction_of(seq: impl Iterator<Item = f64> + Clone) -> Option<(Direction, usize)> {
    let pairs: Vec<(f64, f64)> = seq.clone().zip(seq.skip(1)).collect();
    if pairs.iter().all(|(x, y)| (y - x).abs() < 1e-12) {
        return Some((Direction::Constant, 0));
    }
    if pairs.iter().all(|(x, y)| *y >= x - 1e-12) {
        return Some((Direction::Increasing, 0));
    }
    if pairs.iter().all(|(x, y)| *y <= x + 1e-12) {
        return Some((Direction::Decreasing, 0));
    }
    let bad = pairs
        .iter()
        .position(|(x, y)| (y - x).abs() > 1e-12)
        .unwrap_or(0);
    Some((Direction::Constant, bad + 1))
}

/// Checks the structural properties of the recurrence: global monotonicity
/// for excitatory coupling, parity-wise monotonicity with interleaving
/// around the root for inhibitory coupling.
pub fn monotonicity_report(
    params: &ModelParams,
    traj: &FiringRateTrajectory,
) -> Result<MonotonicityReport> {
    assert!(traj.values.len() >= 3);
    if params.b >= 0.0 {
        let pairs = traj.values.windows(2);
        let mut dir = Direction::Constant;
        for (k, w) in pairs.enumerate() {
            let d = w[1] - w[0];
            if d.abs() < 1e-12 {
                continue;
            }
            let this = if d > 0.0 { Direction::Increasing } else { Direction::Decreasing };
            if dir == Direction::Constant {
                dir = this;
            } else if dir != this {
                return Err(Error::MonotonicityViolation { index: k + 1 });
            }
        }
        return Ok(MonotonicityReport::Monotone(dir));
    }

    let even: Vec<f64> = traj.values.iter().copied().step_by(2).collect();
    let odd: Vec<f64> = traj.values.iter().copied().skip(1).step_by(2).collect();
    let check = |sub: &[f64], offset: usize| -> Result<Direction> {
        match direction_of(sub.iter().copied()) {
            Some((d, 0)) => Ok(d),
            Some((_, bad)) => Err(Error::MonotonicityViolation { index: 2 * bad + offset }),
            None => Ok(Direction::Constant),
        }
    };
    let even_dir = check(&even, 0)?;
    let odd_dir = check(&odd, 1)?;

    // the two subsequences bracket the root from k >= 1 on
    let set = solve_stationary(params)?;
    let n_star = set.roots[0].n;
    for (k, w) in traj.values.windows(2).enumerate().skip(1) {
        if (w[0] - n_star).abs() < 1e-9 || (w[1] - n_star).abs() < 1e-9 {
            continue;
        }
        if (w[0] < n_star) == (w[1] < n_star) {
            return Err(Error::MonotonicityViolation { index: k + 1 });
        }
    }
    Ok(MonotonicityReport::AlternatingMonotone { even: even_dir, odd: odd_dir })
}

/// Profiles p_k associated to a trajectory: the pseudo-equilibrium frozen
/// at each N_{k-1}, for k = 1..K.
pub fn pseudo_equilibria_sequence(
    params: &ModelParams,
    traj: &FiringRateTrajectory,
    grid: &Grid,
) -> Result<Vec<DensityProfile>> {
    assert!(!traj.values.is_empty());
    traj.values[..traj.values.len() - 1]
        .iter()
        .map(|&n| specfun::pseudo_equilibrium_profile(params, n, grid))
        .collect()
}

/// Writes a trajectory as `k,N_k` rows.
pub fn trajectory_csv(traj: &FiringRateTrajectory) -> String {
    let mut out = String::from("k,N_k\n");
    for (k, n) in traj.values.iter().enumerate() {
        out.push_str(&format!("{k},{n:.16e}\n"));
    }
    out
}
