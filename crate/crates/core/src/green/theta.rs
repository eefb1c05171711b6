//! First Jacobi theta function for a purely imaginary period ratio.

use num_complex::Complex64;

/// Series terms stop once the nome factor drops below this.
const TERM_CUTOFF: f64 = 1e-22;

/// `theta_1(v | tau)` and its derivative in `v`, for `tau = i * ratio`.
///
/// Uses the Fourier series
/// `theta_1(v) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) v)`
/// with nome `q = exp(-pi * ratio)`. Callers should reduce `v` so that
/// `|Im v| <= pi * ratio / 2`; the series converges everywhere but loses
/// relative accuracy far from the real axis.
#[derive(Debug, Clone, Copy)]
pub struct Theta1 {
    log_q: f64,
    terms: usize,
}

impl Theta1 {
    pub fn new(ratio: f64) -> Self {
        assert!(ratio > 0.0, "period ratio must be positive");
        let log_q = -std::f64::consts::PI * ratio;
        // |sin((2n+1) v)| <= exp((2n+1) |Im v|) with |Im v| <= -log_q / 2
        let mut terms = 1;
        loop {
            let n = terms as f64;
            let growth = (2.0 * n + 1.0) * (-log_q) / 2.0;
            if log_q * (n + 0.5) * (n + 0.5) + growth < TERM_CUTOFF.ln() || terms > 64 {
                break;
            }
            terms += 1;
        }
        Self { log_q, terms }
    }

    pub fn nome(&self) -> f64 {
        self.log_q.exp()
    }

    /// Returns `(theta_1(v), theta_1'(v))`.
    pub fn eval(&self, v: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        for n in 0..=self.terms {
            let k = (2 * n + 1) as f64;
            let half = n as f64 + 0.5;
            let coef = (self.log_q * half * half).exp();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let arg = v * k;
            value += arg.sin() * (sign * coef);
            deriv += arg.cos() * (sign * coef * k);
        }
        (value * 2.0, deriv * 2.0)
    }
}
