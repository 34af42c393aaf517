//! Riccati equation `dx/dt = b1(t) + b2(t) x + b12(t) x²` and its nonlinear
//! superposition rule in terms of three particular solutions.

use alloc::vec::Vec;

use crate::algebra::Coefficient;
use crate::error::{Error, Result};
use crate::integrators::rk4_direct_step;
use crate::lie_system::ManifoldPoint;

#[derive(Clone, Debug)]
pub struct RiccatiCoefficients {
    pub b1: Coefficient,
    pub b2: Coefficient,
    pub b12: Coefficient,
}

impl RiccatiCoefficients {
    pub fn new(b1: Coefficient, b2: Coefficient, b12: Coefficient) -> Self {
        Self { b1, b2, b12 }
    }

    /// `b1 = 1`, `b2 = t`, `b12 = sin t`.
    pub fn reference() -> Self {
        Self::new(Coefficient::constant(1.0), Coefficient::new(|t| t), Coefficient::new(libm::sin))
    }

    pub fn rhs(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.b1.eval(t)? + self.b2.eval(t)? * x + self.b12.eval(t)? * x * x)
    }

    /// Classical RK4 with `steps` equal steps; returns `x_0..x_N`.
    pub fn integrate(&self, x0: f64, t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
        if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidInterval("t1 must not precede t0"));
        }
        if steps == 0 {
            return Err(Error::InvalidInterval("at least one step required"));
        }
        let h = (t1 - t0) / steps as f64;
        let mut out = Vec::with_capacity(steps + 1);
        let mut x = ManifoldPoint::new(alloc::vec![x0])?;
        out.push(x0);
        for k in 0..steps {
            let t = t0 + k as f64 * h;
            x = rk4_direct_step(|s, p: &ManifoldPoint| ManifoldPoint::new(alloc::vec![self.rhs(s, p[0])?]), t, h, &x)
                .map_err(|e| e.at_step(k + 1))?;
            out.push(x[0]);
        }
        Ok(out)
    }
}

/// Superposition constant; `Infinite` selects the third solution exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rho {
    Finite(f64),
    Infinite,
}

fn check_distinct(x1: f64, x2: f64, x3: f64) -> Result<()> {
    if !(x1.is_finite() && x2.is_finite() && x3.is_finite()) {
        return Err(Error::NonFinite("particular solutions"));
    }
    if x1 == x2 || x2 == x3 || x1 == x3 {
        return Err(Error::Degenerate("particular solutions must be pairwise distinct"));
    }
    Ok(())
}

/// `[x2(x3 − x1) + ρ x3(x1 − x2)] / [(x3 − x1) + ρ(x1 − x2)]`.
pub fn riccati_superposition(x1: f64, x2: f64, x3: f64, rho: Rho) -> Result<f64> {
    check_distinct(x1, x2, x3)?;
    let rho = match rho {
        Rho::Infinite => return Ok(x3),
        Rho::Finite(r) if r.is_finite() => r,
        Rho::Finite(_) => return Err(Error::NonFinite("rho")),
    };
    let (d1, d2) = (x3 - x1, x1 - x2);
    let den = d1 + rho * d2;
    if den == 0.0 {
        return Err(Error::Singular);
    }
    Ok((x2 * d1 + rho * x3 * d2) / den)
}

/// The `ρ` for which [`riccati_superposition`] reproduces `x`.
pub fn riccati_rho_from_solution(x1: f64, x2: f64, x3: f64, x: f64) -> Result<Rho> {
    check_distinct(x1, x2, x3)?;
    if !x.is_finite() {
        return Err(Error::NonFinite("solution value"));
    }
    if x == x3 {
        return Ok(Rho::Infinite);
    }
    if x == x1 {
        return Err(Error::Degenerate("solution coincides with the first particular solution"));
    }
    Ok(Rho::Finite((x3 - x1) * (x2 - x) / ((x1 - x2) * (x - x3))))
}

/// A fourth solution integrated directly alongside its reconstruction from
/// three others.
#[derive(Clone, Debug)]
pub struct SuperpositionCheck {
    pub times: Vec<f64>,
    pub direct: Vec<f64>,
    pub superposed: Vec<f64>,
    pub rho: Rho,
}

impl SuperpositionCheck {
    pub fn max_error(&self) -> f64 {
        self.direct.iter().zip(&self.superposed).map(|(d, s)| (d - s).abs()).fold(0.0, f64::max)
    }
}

/// Integrates the particular solutions from `initial` and the fourth from
/// `x4`, fixes `ρ` at `t0` and reconstructs the fourth at every grid point.
pub fn verify_superposition(
    coeffs: &RiccatiCoefficients,
    initial: [f64; 3],
    x4: f64,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<SuperpositionCheck> {
    let [a, b, c] = initial;
    check_distinct(a, b, c)?;
    let rho = riccati_rho_from_solution(a, b, c, x4)?;
    let particular: Vec<Vec<f64>> =
        initial.iter().map(|&x0| coeffs.integrate(x0, t0, t1, steps)).collect::<Result<_>>()?;
    let direct = coeffs.integrate(x4, t0, t1, steps)?;
    let h = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
    let times: Vec<f64> = (0..direct.len()).map(|k| t0 + k as f64 * h).collect();
    let superposed = (0..direct.len())
        .map(|k| {
            riccati_superposition(particular[0][k], particular[1][k], particular[2][k], rho).map_err(|e| e.at_step(k))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SuperpositionCheck { times, direct, superposed, rho })
}
