//! Least-squares demodulation of multi-tone steady states.
//!
//! A signal `z(t) = sum_k c_k exp(i w_k t)` is fitted over a set of samples by
//! accumulating the normal equations. Exact for pure tones, independent of
//! the sampling pattern, and free of spectral leakage.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Normal equations for one complex component and a fixed set of tones.
#[derive(Debug, Clone)]
pub struct ToneFit {
    tones: Vec<f64>,
    gram: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
    samples: usize,
}

impl ToneFit {
    pub fn new(tones: Vec<f64>) -> Self {
        let k = tones.len();
        Self {
            tones,
            gram: DMatrix::zeros(k, k),
            rhs: DVector::zeros(k),
            samples: 0,
        }
    }

    pub fn add(&mut self, t: f64, z: Complex64) {
        let basis: Vec<Complex64> = self
            .tones
            .iter()
            .map(|w| Complex64::from_polar(1.0, w * t))
            .collect();
        for (r, br) in basis.iter().enumerate() {
            let cr = br.conj();
            for (c, bc) in basis.iter().enumerate() {
                self.gram[(r, c)] += cr * bc;
            }
            self.rhs[r] += cr * z;
        }
        self.samples += 1;
    }

    /// Fitted amplitudes, one per tone; `None` when underdetermined.
    pub fn solve(&self) -> Option<Vec<Complex64>> {
        if self.samples < self.tones.len() {
            return None;
        }
        let sol = self.gram.clone().lu().solve(&self.rhs)?;
        Some(sol.iter().copied().collect())
    }
}

/// Merge tones that a window of length `span` cannot resolve. Returns the
/// distinct tones and, for each input tone, the index of the distinct tone
/// it maps to, or `None` if it was folded into an earlier one.
pub fn resolvable_tones(tones: &[f64], span: f64) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut distinct: Vec<f64> = Vec::new();
    let mut map = Vec::with_capacity(tones.len());
    for &w in tones {
        if distinct
            .iter()
            .any(|d| (d - w).abs() * span < std::f64::consts::PI)
        {
            map.push(None);
        } else {
            map.push(Some(distinct.len()));
            distinct.push(w);
        }
    }
    (distinct, map)
}

/// Tone fits over a trailing window, plus separate fits on its two halves for
/// the convergence check.
#[derive(Debug, Clone)]
pub struct WindowFit {
    start: f64,
    mid: f64,
    map: Vec<Vec<Option<usize>>>,
    full: Vec<ToneFit>,
    halves: [Vec<ToneFit>; 2],
}

/// Result of a [`WindowFit`]: per component, per requested tone.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub amplitudes: Vec<Vec<Complex64>>,
    /// Largest change of any amplitude between the two half windows.
    pub drift: f64,
}

impl WindowFit {
    /// `tones[c]` lists the angular frequencies of component `c`.
    pub fn new(tones: &[Vec<f64>], start: f64, end: f64) -> Self {
        let mid = 0.5 * (start + end);
        let half = mid - start;
        let mut map = Vec::new();
        let mut full = Vec::new();
        let mut first = Vec::new();
        let mut second = Vec::new();
        for t in tones {
            let (distinct, m) = resolvable_tones(t, half);
            map.push(m);
            full.push(ToneFit::new(distinct.clone()));
            first.push(ToneFit::new(distinct.clone()));
            second.push(ToneFit::new(distinct));
        }
        Self {
            start,
            mid,
            map,
            full,
            halves: [first, second],
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn add(&mut self, t: f64, y: &[Complex64]) {
        if t < self.start {
            return;
        }
        let half = usize::from(t >= self.mid);
        for (c, z) in y.iter().enumerate().take(self.full.len()) {
            self.full[c].add(t, *z);
            self.halves[half][c].add(t, *z);
        }
    }

    pub fn finish(&self) -> Option<FitResult> {
        let expand = |fits: &[ToneFit]| -> Option<Vec<Vec<Complex64>>> {
            fits.iter()
                .zip(&self.map)
                .map(|(f, m)| {
                    let sol = f.solve()?;
                    Some(
                        m.iter()
                            .map(|idx| idx.map_or(Complex64::new(0.0, 0.0), |i| sol[i]))
                            .collect(),
                    )
                })
                .collect()
        };
        let amplitudes = expand(&self.full)?;
        let a = expand(&self.halves[0])?;
        let b = expand(&self.halves[1])?;
        let drift = a
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        Some(FitResult { amplitudes, drift })
    }
}
