//! Real-valued drift matrices of the linearized fluctuation dynamics and
//! their spectra.
//!
//! Complex equations of the form `z' = A z + B conj(z)` are written in
//! quadratures `z = u + i v`, giving the real block matrix
//! `[[Re(A+B), Im(B-A)], [Im(A+B), Re(A-B)]]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Fluctuation parameters of one cavity around a mean-field point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityLine {
    pub kappa: f64,
    /// Effective detuning `delta_eff`; zero in the red-sideband rotating frame.
    pub detuning: f64,
    pub coupling: Complex64,
}

/// Real form of `z' = A z + B conj(z)` for complex `A`, `B` of size `n`.
pub fn realify(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let (ar, ai) = (a[(r, c)].re, a[(r, c)].im);
            let (br, bi) = (b[(r, c)].re, b[(r, c)].im);
            m[(r, c)] = ar + br;
            m[(r, n + c)] = bi - ai;
            m[(n + r, c)] = ai + bi;
            m[(n + r, n + c)] = ar - br;
        }
    }
    m
}

/// Drift of the linearized fluctuations before the rotating-wave
/// approximation, in the frame of the control fields:
///
/// ```text
/// da_j/dt = -(i delta_j + kappa_j/2) da_j - i G_j (db + db*)
/// db/dt   = -(i omega_m + gamma_m/2) db - i sum_j (G_j da_j* + G_j* da_j)
/// ```
///
/// Ordering: `[Re a_1..a_N, Re b, Im a_1..a_N, Im b]`.
pub fn full_drift(lines: &[CavityLine], omega_m: f64, gamma_m: f64) -> DMatrix<f64> {
    let n = lines.len() + 1;
    let m = lines.len();
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DMatrix::<Complex64>::zeros(n, n);
    let i = Complex64::i();
    for (j, l) in lines.iter().enumerate() {
        a[(j, j)] = Complex64::new(-l.kappa / 2.0, -l.detuning);
        a[(j, m)] = -i * l.coupling;
        b[(j, m)] = -i * l.coupling;
        a[(m, j)] = -i * l.coupling.conj();
        b[(m, j)] = -i * l.coupling;
    }
    a[(m, m)] = Complex64::new(-gamma_m / 2.0, -omega_m);
    realify(&a, &b)
}

/// Drift of the rotating-wave (beam-splitter) dynamics
/// `da_j/dt = -kappa_j/2 da_j - i G_j db`, `db/dt = -gamma_m/2 db - i sum G_j* da_j`.
pub fn rwa_drift(lines: &[CavityLine], gamma_m: f64) -> DMatrix<f64> {
    let n = lines.len() + 1;
    let m = lines.len();
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let b = DMatrix::<Complex64>::zeros(n, n);
    let i = Complex64::i();
    for (j, l) in lines.iter().enumerate() {
        a[(j, j)] = Complex64::new(-l.kappa / 2.0, -l.detuning);
        a[(j, m)] = -i * l.coupling;
        a[(m, j)] = -i * l.coupling.conj();
    }
    a[(m, m)] = Complex64::new(-gamma_m / 2.0, 0.0);
    realify(&a, &b)
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Largest real part over the spectrum of `m`.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m)
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}
