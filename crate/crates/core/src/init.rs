//! Initial-condition families used in the experiments.

use crate::discrete::find_two_cycle;
use crate::error::{Error, Result};
use crate::grid::{DensityProfile, Grid};
use crate::params::ModelParams;
use crate::specfun::{eval_f, pseudo_equilibrium_profile};

/// Pseudo-equilibrium frozen at firing rate `n`; also returns the discharge
/// rate the profile itself produces, `1/I(n)`, for logging.
pub fn ic_pseudo_equilibrium(
    params: &ModelParams,
    grid: &Grid,
    n: f64,
) -> Result<(DensityProfile, f64)> {
    let prof = pseudo_equilibrium_profile(params, n, grid)?;
    Ok((prof, eval_f(params, n)?))
}

/// Low branch of the 2-cycle: the profile frozen at N+, whose own discharge
/// rate is N- = 1/I(N+).
pub fn ic_cycle_low(params: &ModelParams, grid: &Grid) -> Result<DensityProfile> {
    let cycle = find_two_cycle(params)?;
    pseudo_equilibrium_profile(params, cycle.n_plus, grid)
}

/// High branch: profile frozen at N-, discharge rate N+ = 1/I(N-).
pub fn ic_cycle_high(params: &ModelParams, grid: &Grid) -> Result<DensityProfile> {
    let cycle = find_two_cycle(params)?;
    pseudo_equilibrium_profile(params, cycle.n_minus, grid)
}

/// Two Gaussian humps of common width, centered at mu and -mu - 2 (so they
/// sit symmetrically about -1), truncated to the grid and renormalized.
pub fn ic_double_maxwellian(grid: &Grid, mu: f64, sigma: f64) -> Result<DensityProfile> {
    assert!(sigma > 0.0);
    let norm = 1.0 / ((8.0 * std::f64::consts::PI).sqrt() * sigma);
    let hump = |v: f64, c: f64| {
        let z = (v - c) / sigma;
        (-0.5 * z * z).exp()
    };
    let c2 = -mu - 2.0;
    // analytic mass lost outside the grid; humps a few sigma inside the
    // threshold shed O(1e-4), which truncation + renormalization absorbs,
    // so only gross misplacement is rejected
    let q = |z: f64| 0.5 * crate::specfun::erfc(z / std::f64::consts::SQRT_2);
    let excess = 0.5
        * (q((grid.v_thresh - mu) / sigma)
            + q((grid.v_thresh - c2) / sigma)
            + q((mu - grid.v_min) / sigma)
            + q((c2 - grid.v_min) / sigma));
    if excess > 1e-3 {
        return Err(Error::TruncatedInitialCondition { excess });
    }
    let mut values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let v = grid.v(i);
            norm * (hump(v, mu) + hump(v, c2))
        })
        .collect();
    values[0] = 0.0;
    let nv = grid.n_v;
    values[nv] = 0.0;
    let mut prof = DensityProfile::new(*grid, values);
    prof.renormalize();
    Ok(prof)
}

/// Reads a profile from `v,p` CSV rows; the voltages must match the grid
/// nodes.
pub fn ic_from_csv(grid: &Grid, text: &str) -> Result<DensityProfile> {
    let mut values = Vec::with_capacity(grid.len());
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (ln == 0 && line.starts_with('v')) {
            continue;
        }
        let mut parts = line.split(',');
        let bad = || Error::InvalidParams(format!("bad csv row {}: {line}", ln + 1));
        let v: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let p: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let i = values.len();
        if i >= grid.len() || (v - grid.v(i)).abs() > 1e-9 {
            return Err(Error::Grid(format!(
                "csv node {v} does not match grid node {} at index {i}",
                grid.v(i.min(grid.n_v))
            )));
        }
        values.push(p);
    }
    if values.len() != grid.len() {
        return Err(Error::Grid(format!(
            "csv has {} rows, grid has {} nodes",
            values.len(),
            grid.len()
        )));
    }
    values[0] = 0.0;
    values[grid.n_v] = 0.0;
    let mut prof = DensityProfile::new(*grid, values);
    prof.renormalize();
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::pde::firing_rate;

    #[test]
    fn pseudo_equilibrium_reports_own_rate() {
        let params = ModelParams::with_b(1.5);
        let grid = make_grid(&params, -6.0, 0.02).unwrap();
        let (prof, n_bar) = ic_pseudo_equilibrium(&params, &grid, 2.25).unwrap();
        assert!((n_bar - 2.2371927253386493).abs() < 1e-8);
        assert!((prof.mass() - 1.0).abs() < 1e-13);
        let (_, n_bar_hi) = ic_pseudo_equilibrium(&params, &grid, 2.35).unwrap();
        assert!((n_bar_hi - 2.370343222076325).abs() < 1e-8);
        // published rounded values, from a coarser quadrature
        assert!((n_bar - 2.233348).abs() < 1e-2);
        assert!((n_bar_hi - 2.365824).abs() < 1e-2);
    }

    #[test]
    fn cycle_profiles_fire_at_the_opposite_branch() {
        let mut params = ModelParams::with_b(-14.0);
        params.delay = 1.0;
        let grid = make_grid(&params, -10.0, 0.02).unwrap();
        let lo = ic_cycle_low(&params, &grid).unwrap();
        let hi = ic_cycle_high(&params, &grid).unwrap();
        let n_lo = firing_rate(&params, &lo);
        let n_hi = firing_rate(&params, &hi);
        assert!((n_lo - 0.0022).abs() < 1e-3, "low IC fires at {n_lo}");
        assert!((n_hi - 0.1136).abs() < 2e-3, "high IC fires at {n_hi}");
        assert!((lo.mass() - 1.0).abs() < 1e-13);
        assert!((hi.mass() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn double_maxwellian_humps_are_symmetric_about_minus_one() {
        let params = ModelParams::with_b(-9.0);
        let grid = make_grid(&params, -6.0, 0.02).unwrap();
        let prof = ic_double_maxwellian(&grid, -1.0, 0.5).unwrap();
        assert!((prof.mass() - 1.0).abs() < 1e-13);
        // mu = -1 makes both humps coincide at -1
        let i_peak = (0..grid.len())
            .max_by(|&i, &j| prof.values[i].total_cmp(&prof.values[j]))
            .unwrap();
        assert!((grid.v(i_peak) + 1.0).abs() <= grid.dv);

        // centers 0.4 and -2.4 are equidistant from -1; away from the
        // V_F truncation the humps keep that symmetry
        let hi = ic_double_maxwellian(&grid, 0.4, 0.5).unwrap();
        let at = |v: f64| hi.values[((v - grid.v_min) / grid.dv).round() as usize];
        assert!((at(-0.2) - at(-1.8)).abs() < 2e-3 * at(-0.2).max(1.0));
        assert!((hi.mass() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn severe_truncation_is_an_error() {
        let params = ModelParams::with_b(0.0);
        let grid = make_grid(&params, -6.0, 0.02).unwrap();
        match ic_double_maxwellian(&grid, 1.9, 0.5) {
            Err(Error::TruncatedInitialCondition { excess }) => assert!(excess > 1e-3),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let params = ModelParams::with_b(0.0);
        let grid = make_grid(&params, -6.0, 0.1).unwrap();
        let prof = ic_double_maxwellian(&grid, -1.0, 0.4).unwrap();
        let mut csv = String::from("v,p\n");
        for i in 0..grid.len() {
            csv.push_str(&format!("{:.16e},{:.16e}\n", grid.v(i), prof.values[i]));
        }
        let back = ic_from_csv(&grid, &csv).unwrap();
        assert!(prof.sup_distance(&back) < 1e-12);
    }
}
