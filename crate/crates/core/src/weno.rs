//! Fifth-order WENO-JS reconstruction with global Lax-Friedrichs flux
//! splitting, for the advection term of the Fokker-Planck equation.

const EPS: f64 = 1e-6;

/// Smoothness indicators and nonlinear weights for the plus-biased stencil
/// (a, b, c, d, e) = (f_{i-2} .. f_{i+2}); returns the reconstructed value
/// at the right face i+1/2.
fn weno5_plus(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    let beta0 = 13.0 / 12.0 * (a - 2.0 * b + c).powi(2) + 0.25 * (a - 4.0 * b + 3.0 * c).powi(2);
    let beta1 = 13.0 / 12.0 * (b - 2.0 * c + d).powi(2) + 0.25 * (b - d).powi(2);
    let beta2 = 13.0 / 12.0 * (c - 2.0 * d + e).powi(2) + 0.25 * (3.0 * c - 4.0 * d + e).powi(2);

    let alpha0 = 0.1 / (EPS + beta0).powi(2);
    let alpha1 = 0.6 / (EPS + beta1).powi(2);
    let alpha2 = 0.3 / (EPS + beta2).powi(2);
    let sum = alpha0 + alpha1 + alpha2;

    let q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let q2 = (2.0 * c + 5.0 * d - e) / 6.0;

    (alpha0 * q0 + alpha1 * q1 + alpha2 * q2) / sum
}

/// Mirror of `weno5_plus` for the minus-biased stencil: reconstructs the
/// value at the left face i-1/2 from (f_{i-2} .. f_{i+2}).
fn weno5_minus(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    weno5_plus(e, d, c, b, a)
}

/// Reconstructs numerical fluxes at all interior faces from split fluxes.
///
/// `f_plus` and `f_minus` are cell-centered split fluxes on an array
/// extended by 3 ghost cells on each side (length n + 6). The output has
/// length n + 1: `faces[i]` is the total flux at face i-1/2 of interior
/// cell i.
pub fn weno5_faces(f_plus: &[f64], f_minus: &[f64]) -> Vec<f64> {
    assert_eq!(f_plus.len(), f_minus.len());
    assert!(f_plus.len() >= 7);
    let n = f_plus.len() - 6;
    let mut faces = Vec::with_capacity(n + 1);
    for face in 0..=n {
        // face index `face` sits between extended cells (face+2, face+3)
        let i = face + 2; // upwind cell for the plus flux
        let fp = weno5_plus(
            f_plus[i - 2],
            f_plus[i - 1],
            f_plus[i],
            f_plus[i + 1],
            f_plus[i + 2],
        );
        let j = face + 3; // downwind cell for the minus flux
        let fm = weno5_minus(
            f_minus[j - 2],
            f_minus[j - 1],
            f_minus[j],
            f_minus[j + 1],
            f_minus[j + 2],
        );
        faces.push(fp + fm);
    }
    faces
}

/// Conservative advection right-hand side -d(flux)/dv for flux(v, p) =
/// drift(v) * p, using global Lax-Friedrichs splitting with the supplied
/// wave-speed bound `alpha >= max |drift|`.
///
/// `p_ext` holds the density on the extended grid (n + 6 values, ghost
/// cells included); `drift_ext` the drift velocity at the same nodes.
/// The result has length n.
pub fn advection_rhs(p_ext: &[f64], drift_ext: &[f64], alpha: f64, dv: f64) -> Vec<f64> {
    assert_eq!(p_ext.len(), drift_ext.len());
    let n = p_ext.len() - 6;
    let f_plus: Vec<f64> = (0..p_ext.len())
        .map(|i| 0.5 * (drift_ext[i] * p_ext[i] + alpha * p_ext[i]))
        .collect();
    let f_minus: Vec<f64> = (0..p_ext.len())
        .map(|i| 0.5 * (drift_ext[i] * p_ext[i] - alpha * p_ext[i]))
        .collect();
    let faces = weno5_faces(&f_plus, &f_minus);
    (0..n).map(|i| -(faces[i + 1] - faces[i]) / dv).collect()
}
