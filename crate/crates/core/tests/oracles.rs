//! Independent cross-checks of the special-function layer: a composite
//! Simpson evaluation of the defining double integral, finite-difference
//! derivative checks, and a dense-scan bracket of the bifurcation value.

use nnlif::specfun;
use nnlif::ModelParams;

/// Composite Simpson with `n` panels (n even).
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// I(N) straight from the double-integral definition,
/// `(1/a) int_-inf^VF e^{-(v-bN)^2/(2a)} int_max(v,VR)^VF e^{(w-bN)^2/(2a)} dw dv`,
/// with the exponentials combined to avoid overflow. Pure Simpson, no
/// shared code with the library quadrature.
fn i_simpson(p: &ModelParams, n: f64) -> f64 {
    let a = p.a;
    let alpha = p.b * n;
    let (vr, vf) = (p.v_reset, p.v_thresh);
    let inner = |v: f64| {
        let c = v.max(vr);
        if c >= vf {
            return 0.0;
        }
        let vq = (v - alpha) * (v - alpha);
        simpson(
            |w| (((w - alpha) * (w - alpha) - vq) / (2.0 * a)).exp(),
            c,
            vf,
            200,
        )
    };
    // split at V_R: the inner lower limit max(v, V_R) kinks there
    let v_lo = alpha.min(vr) - 14.0 * a.sqrt().max(1.0);
    (simpson(&inner, v_lo, vr, 4000) + simpson(&inner, vr, vf, 2000)) / a
}

#[test]
fn laplace_form_matches_simpson_double_integral() {
    for (b, n) in [
        (0.0, 0.0),
        (0.0, 0.7),
        (1.5, 0.194),
        (1.5, 2.289),
        (0.5, 0.135),
        (-5.0, 0.05),
        (-14.0, 0.1136),
    ] {
        let p = ModelParams::with_b(b);
        let lib = specfun::eval_i(&p, n).unwrap();
        let oracle = i_simpson(&p, n);
        assert!(
            ((lib - oracle) / oracle).abs() < 1e-8,
            "b={b}, N={n}: library {lib} vs Simpson {oracle}"
        );
    }
}

#[test]
fn roots_satisfy_the_defining_equation_under_the_oracle() {
    let p = ModelParams::with_b(1.5);
    let set = specfun::solve_stationary(&p).unwrap();
    for root in &set.roots {
        let residual = (root.n * i_simpson(&p, root.n) - 1.0).abs();
        assert!(residual < 1e-7, "N*={}: residual {residual}", root.n);
    }
}

#[test]
fn first_derivative_matches_finite_differences() {
    for (b, n) in [(-1.0, 0.1), (1.5, 0.5), (-14.0, 0.05)] {
        let p = ModelParams::with_b(b);
        let h = 1e-5 * f64::max(n, 0.1);
        let fd = (specfun::eval_i(&p, n + h).unwrap() - specfun::eval_i(&p, n - h).unwrap())
            / (2.0 * h);
        let an = specfun::eval_i_deriv(&p, n, 1).unwrap();
        assert!(
            ((fd - an) / an).abs() < 1e-6,
            "b={b}, N={n}: fd {fd} vs analytic {an}"
        );
    }
}

#[test]
fn second_derivative_matches_finite_differences_of_the_first() {
    let p = ModelParams::with_b(1.0);
    let n = 0.1;
    let h = 1e-5;
    let fd = (specfun::eval_i_deriv(&p, n + h, 1).unwrap()
        - specfun::eval_i_deriv(&p, n - h, 1).unwrap())
        / (2.0 * h);
    let an = specfun::eval_i_deriv(&p, n, 2).unwrap();
    assert!(((fd - an) / an).abs() < 1e-6, "fd {fd} vs analytic {an}");
}

#[test]
fn bifurcation_value_confirmed_by_dense_scan() {
    // bracket g = -1 by stepping b at 0.01 over the candidate interval,
    // independently of the bisection inside find_b_star
    let base = ModelParams::with_b(0.0);
    let g = |b: f64| specfun::eval_g(&ModelParams { b, ..base }).unwrap();
    let mut bracket = None;
    let mut prev = (-9.55, g(-9.55));
    for i in 1..=30 {
        let b = -9.55 + 0.01 * i as f64;
        let gb = g(b);
        if prev.1 < -1.0 && gb >= -1.0 {
            bracket = Some((prev.0, b));
        }
        prev = (b, gb);
    }
    let (lo, hi) = bracket.expect("no sign change of g + 1 in [-9.55, -9.25]");
    let b_star = specfun::find_b_star(&base).unwrap();
    assert!(
        (lo..=hi).contains(&b_star),
        "b* = {b_star} outside scan bracket [{lo}, {hi}]"
    );
}

#[test]
fn inhibitory_root_shrinks_with_coupling_strength() {
    // the unique root decreases as b grows more negative, approaching 0
    // slowly (still above 0.01 even at b = -100)
    let mut prev = f64::INFINITY;
    for b in [-1.0, -5.0, -14.0, -30.0, -100.0] {
        let p = ModelParams::with_b(b);
        let set = specfun::solve_stationary(&p).unwrap();
        assert_eq!(set.count(), 1, "b={b}");
        let n = set.roots[0].n;
        assert!(n < prev, "root not decreasing at b={b}");
        prev = n;
    }
    assert!(prev > 0.01 && prev < 0.02, "N*(-100) = {prev}");
}
