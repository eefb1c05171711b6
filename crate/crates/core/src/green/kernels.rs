//! Closed-form potentials behind [`super::GreenModel`].

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use super::theta::Theta1;
use crate::surfaces::wrap_centered;

const INV_2PI: f64 = 0.5 / PI;
const INV_4PI: f64 = 0.25 / PI;

/// `-(1/2pi) [log|z - y| - sum c_i log|z - p_i|]` on the Riemann sphere,
/// with the leftover flux `1 - sum c_i` sitting at infinity.
#[derive(Debug, Clone)]
pub(crate) struct Rational {
    pub pole: Complex64,
    /// Finite non-removable punctures.
    pub punctures: Vec<(Complex64, f64)>,
    pub weight_inf: f64,
}

impl Rational {
    pub fn value_z(&self, z: Complex64) -> f64 {
        let mut acc = (z - self.pole).norm().ln();
        for &(p, c) in &self.punctures {
            acc -= c * (z - p).norm().ln();
        }
        -INV_2PI * acc
    }

    pub fn fz_z(&self, z: Complex64) -> Complex64 {
        let mut acc = (z - self.pole).inv();
        for &(p, c) in &self.punctures {
            acc -= (z - p).inv() * c;
        }
        acc * -INV_2PI
    }

    /// Same function in the chart `w = 1/z`.
    pub fn value_w(&self, w: Complex64) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = (one - self.pole * w).norm().ln();
        for &(p, c) in &self.punctures {
            acc -= c * (one - p * w).norm().ln();
        }
        if self.weight_inf > 0.0 {
            acc -= self.weight_inf * w.norm().ln();
        }
        -INV_2PI * acc
    }

    pub fn fz_w(&self, w: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = -self.pole / (one - self.pole * w);
        for &(p, c) in &self.punctures {
            acc += p * c / (one - p * w);
        }
        if self.weight_inf > 0.0 {
            acc -= w.inv() * self.weight_inf;
        }
        acc * -INV_2PI
    }
}

/// `log(cosh a - cos b)` without cancellation near the origin.
pub(crate) fn log_cosh_minus_cos(a: f64, b: f64) -> f64 {
    if a.abs() > 60.0 {
        // cosh a - cos b = e^|a| / 2 * (1 + e^{-2|a|} - 2 e^{-|a|} cos b)
        let e = (-a.abs()).exp();
        return a.abs() - LN_2 + (1.0 + e * e - 2.0 * e * b.cos()).ln();
    }
    let sh = (0.5 * a).sinh();
    let sn = (0.5 * b).sin();
    LN_2 + (sh * sh + sn * sn).ln()
}

/// Flat cylinder in coordinates `s = z + i theta` with pole `s0`, plus the
/// linear flux correction `-(c_plus - c_minus) (z + z0) / 4pi`.
#[derive(Debug, Clone)]
pub(crate) struct Cylinder {
    pub pole: Complex64,
    pub diff: f64,
    /// The same potential in the variable `w = exp(s)`.
    pub ends: Rational,
    pub offset: f64,
}

impl Cylinder {
    pub fn new(pole: Complex64, weight_minus: f64, weight_plus: f64) -> Self {
        let mut punctures = Vec::new();
        if weight_minus > 0.0 {
            punctures.push((Complex64::new(0.0, 0.0), weight_minus));
        }
        let ends = Rational {
            pole: pole.exp(),
            punctures,
            weight_inf: weight_plus,
        };
        let mut cyl = Self {
            pole,
            diff: weight_plus - weight_minus,
            ends,
            offset: 0.0,
        };
        let probe = pole + Complex64::new(0.75, 1.1);
        cyl.offset = cyl.value_primary(probe) - cyl.ends.value_z(probe.exp());
        cyl
    }

    pub fn value_primary(&self, s: Complex64) -> f64 {
        let u = s - self.pole;
        -INV_4PI * log_cosh_minus_cos(u.re, u.im) - self.diff * (s.re + self.pole.re) * INV_4PI
    }

    pub fn fz_primary(&self, s: Complex64) -> Complex64 {
        let u = s - self.pole;
        // coth(u/2) = (sinh a - i sin b) / (cosh a - cos b)
        let coth = if u.re.abs() > 40.0 {
            Complex64::new(u.re.signum(), 0.0)
        } else {
            let sh = (0.5 * u.re).sinh();
            let sn = (0.5 * u.im).sin();
            Complex64::new(u.re.sinh(), -u.im.sin()) / (2.0 * (sh * sh + sn * sn))
        };
        (coth + self.diff) * -INV_4PI
    }
}

/// Mean-corrected Green's function of the flat torus `C / (a Z + i b Z)`:
/// `Delta G_T = -delta_0 + 1/(a b)`.
#[derive(Debug, Clone)]
pub struct TorusKernel {
    a: f64,
    b: f64,
    theta: Theta1,
}

impl TorusKernel {
    pub fn new(lattice: [f64; 2]) -> Self {
        let [a, b] = lattice;
        Self {
            a,
            b,
            theta: Theta1::new(b / a),
        }
    }

    pub fn lattice(&self) -> [f64; 2] {
        [self.a, self.b]
    }

    /// Returns the kernel value and its Wirtinger derivative `2 dG/dz`.
    pub fn eval(&self, z: Complex64) -> (f64, Complex64) {
        let x = wrap_centered(z.re, 0.0, self.a);
        let y = wrap_centered(z.im, 0.0, self.b);
        let scale = PI / self.a;
        let (th, dth) = self.theta.eval(Complex64::new(x, y) * scale);
        let area = self.a * self.b;
        let value = -INV_2PI * th.norm().ln() + y * y / (2.0 * area);
        let fz = dth / th * (-INV_2PI * scale) - Complex64::new(0.0, y / area);
        (value, fz)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Torus {
    pub kernel: TorusKernel,
    pub pole: Complex64,
    pub punctures: Vec<(Complex64, f64)>,
}

impl Torus {
    pub fn eval(&self, z: Complex64) -> (f64, Complex64) {
        let (vy, fy) = self.kernel.eval(z - self.pole);
        let mut value = 0.0;
        let mut fz = Complex64::new(0.0, 0.0);
        for &(p, c) in &self.punctures {
            let (vp, fp) = self.kernel.eval(z - p);
            value += c * (vy - vp);
            fz += (fy - fp) * c;
        }
        (value, fz)
    }
}

/// Minimal Green's function of the unit disk.
#[derive(Debug, Clone)]
pub(crate) struct Disk {
    pub pole: Complex64,
}

impl Disk {
    pub fn value(&self, z: Complex64) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        -INV_2PI * ((z - self.pole).norm().ln() - (one - self.pole.conj() * z).norm().ln())
    }

    pub fn fz(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let yb = self.pole.conj();
        ((z - self.pole).inv() + yb / (one - yb * z)) * -INV_2PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_cosh_branches_agree() {
        for &(a, b) in &[(59.0_f64, 0.3_f64), (61.0, 2.0), (-70.0, 1.0), (1e-7, 2e-7)] {
            let direct = if a.abs() < 1.0 {
                LN_2 + ((0.5 * a).sinh().powi(2) + (0.5 * b).sin().powi(2)).ln()
            } else {
                (f64::cosh(a) - f64::cos(b)).ln()
            };
            assert!((log_cosh_minus_cos(a, b) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn torus_kernel_symmetric_and_periodic() {
        let k = TorusKernel::new([2.0 * PI, 2.0 * PI]);
        let z = Complex64::new(0.9, -2.1);
        let (v, _) = k.eval(z);
        assert!((v - k.eval(-z).0).abs() < 1e-13);
        assert!((v - k.eval(z + Complex64::new(2.0 * PI, 0.0)).0).abs() < 1e-13);
        assert!((v - k.eval(z + Complex64::new(0.0, 2.0 * PI)).0).abs() < 1e-13);
        // square lattice: invariant under rotation by a quarter turn
        assert!((v - k.eval(z * Complex64::i()).0).abs() < 1e-13);
    }

    #[test]
    fn cylinder_end_chart_agrees_with_primary() {
        let cyl = Cylinder::new(Complex64::new(0.3, 0.2), 0.25, 0.75);
        for &s in &[Complex64::new(-2.0, 0.4), Complex64::new(3.0, -1.0), Complex64::new(0.1, 2.5)] {
            let primary = cyl.value_primary(s);
            let end = cyl.ends.value_z(s.exp()) + cyl.offset;
            assert!((primary - end).abs() < 1e-12, "{s}: {primary} vs {end}");
            // chain rule: f_s = f_w * dw/ds = f_w * w
            let fw = cyl.ends.fz_z(s.exp()) * s.exp();
            assert!((fw - cyl.fz_primary(s)).norm() < 1e-12);
        }
    }

    #[test]
    fn rational_charts_agree() {
        let r = Rational {
            pole: Complex64::new(0.2, 0.1),
            punctures: vec![(Complex64::new(1.0, 0.0), 0.5), (Complex64::new(-1.0, 0.5), 0.25)],
            weight_inf: 0.25,
        };
        let z = Complex64::new(1.7, -0.8);
        assert!((r.value_z(z) - r.value_w(z.inv())).abs() < 1e-13);
        // f_w = f_z * dz/dw = -f_z / w^2
        let w = z.inv();
        assert!((r.fz_w(w) + r.fz_z(z) / (w * w)).norm() < 1e-12);
    }
}
