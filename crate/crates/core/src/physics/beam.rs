//! Simply supported Euler-Bernoulli beams: the closed-form point-load
//! solution and an independent finite-difference solver used to check it.

use serde::{Deserialize, Serialize};

use super::material::MaterialSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    /// Distance between the supports, m.
    pub span: f64,
    pub width: f64,
    pub thickness: f64,
    pub material: MaterialSpec,
}

impl BeamSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("span", self.span),
            ("width", self.width),
            ("thickness", self.thickness),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("beam {name} must be positive")));
            }
        }
        self.material.validate()
    }

    /// Second moment of area of the rectangular section, m⁴.
    pub fn second_moment(&self) -> f64 {
        self.width * self.thickness.powi(3) / 12.0
    }

    /// E·I, N·m².
    pub fn flexural_rigidity(&self) -> f64 {
        self.material.young_modulus * self.second_moment()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    /// Total downward force, N.
    pub force: f64,
    /// Load center as a fraction of the span, in (0, 1).
    pub application_point: f64,
    /// Width of a uniformly loaded patch, m; 0 for a point load.
    pub patch_width: f64,
}

impl LoadCase {
    pub fn point(force: f64, application_point: f64) -> Self {
        LoadCase {
            force,
            application_point,
            patch_width: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.force >= 0.0 && self.force.is_finite()) {
            return Err(Error::InvalidParameter("force must be finite and >= 0".into()));
        }
        if !(self.application_point > 0.0 && self.application_point < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "application point {} must lie strictly inside (0, 1)",
                self.application_point
            )));
        }
        if !(self.patch_width >= 0.0 && self.patch_width.is_finite()) {
            return Err(Error::InvalidParameter("patch width must be >= 0".into()));
        }
        Ok(())
    }
}

/// Closed-form deflection (downward positive) at `x` meters from the left
/// support under a point load.
pub fn beam_deflection(beam: &BeamSpec, load: &LoadCase, x: f64) -> Result<f64> {
    beam.validate()?;
    load.validate()?;
    if load.patch_width > 0.0 {
        return Err(Error::InvalidParameter(
            "closed form covers point loads only; use the finite-difference solver".into(),
        ));
    }
    let l = beam.span;
    if !(0.0..=l).contains(&x) {
        return Err(Error::OutsideSpan { x, span: l });
    }
    let ei = beam.flexural_rigidity();
    let f = load.force;
    let a = load.application_point * l;
    let b = l - a;
    let d = if x <= a {
        f * b * x * (l * l - b * b - x * x) / (6.0 * l * ei)
    } else {
        f * a * (l - x) * (2.0 * l * x - x * x - a * a) / (6.0 * l * ei)
    };
    Ok(d)
}

/// Deflection sampled at `n` evenly spaced nodes from support to support.
#[derive(Clone, Debug, PartialEq)]
pub struct DeflectionProfile {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl DeflectionProfile {
    pub fn max(&self) -> f64 {
        self.w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Linear interpolation between nodes.
    pub fn at(&self, x: f64) -> f64 {
        let n = self.x.len();
        let l = self.x[n - 1];
        let h = l / (n - 1) as f64;
        let s = (x / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        self.w[i] * (1.0 - t) + self.w[i + 1] * t
    }
}

/// Solve E·I·w'''' = q for a simply supported beam by two chained
/// second-order central-difference systems (moment, then deflection).
/// Point loads are shared between the two neighbouring nodes in
/// proportion to proximity; patch loads are integrated the same way.
pub fn beam_deflection_fd(beam: &BeamSpec, load: &LoadCase, n_nodes: usize) -> Result<DeflectionProfile> {
    load.validate()?;
    if n_nodes < 16 {
        return Err(Error::InvalidParameter(format!(
            "finite-difference solver needs at least 16 nodes, got {n_nodes}"
        )));
    }
    let l = beam.span;
    let ei = beam.flexural_rigidity();
    if !(l > 0.0 && l.is_finite() && ei > 0.0 && ei.is_finite()) {
        return Err(Error::Singular(format!("span {l} m with E·I {ei} N·m²")));
    }
    beam.validate()?;

    let n = n_nodes;
    let h = l / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();

    let mut nodal = vec![0.0; n];
    let center = load.application_point * l;
    if load.patch_width > 0.0 {
        const PIECES: usize = 256;
        let lo = (center - load.patch_width / 2.0).max(0.0);
        let hi = (center + load.patch_width / 2.0).min(l);
        let dx = (hi - lo) / PIECES as f64;
        for k in 0..PIECES {
            let xc = lo + (k as f64 + 0.5) * dx;
            share_point_load(&mut nodal, h, xc, load.force / PIECES as f64);
        }
    } else {
        share_point_load(&mut nodal, h, center, load.force);
    }

    // M'' = -q, M(0) = M(L) = 0, with q_i = P_i / h
    let rhs_m: Vec<f64> = nodal[1..n - 1].iter().map(|p| -p * h).collect();
    let m_inner = solve_second_difference(&rhs_m)?;
    // w'' = -M / EI, w(0) = w(L) = 0
    let rhs_w: Vec<f64> = m_inner.iter().map(|m| -m / ei * h * h).collect();
    let w_inner = solve_second_difference(&rhs_w)?;

    let mut w = Vec::with_capacity(n);
    w.push(0.0);
    w.extend(w_inner);
    w.push(0.0);
    Ok(DeflectionProfile { x, w })
}

fn share_point_load(nodal: &mut [f64], h: f64, x: f64, force: f64) {
    let n = nodal.len();
    let s = (x / h).clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n - 2);
    let t = s - i as f64;
    nodal[i] += force * (1.0 - t);
    nodal[i + 1] += force * t;
}

/// Solve u[i-1] - 2 u[i] + u[i+1] = rhs[i] with zero Dirichlet ends
/// (Thomas algorithm).
fn solve_second_difference(rhs: &[f64]) -> Result<Vec<f64>> {
    let m = rhs.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = -2.0;
    c[0] = 1.0 / denom;
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = -2.0 - c[i - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::Singular(format!("zero pivot at row {i}")));
        }
        c[i] = 1.0 / denom;
        d[i] = (rhs[i] - d[i - 1]) / denom;
    }
    let mut u = vec![0.0; m];
    u[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::material::MaterialKind;

    /// E·I = 100 N·m² on a 1 m span.
    fn benchmark_beam() -> BeamSpec {
        BeamSpec {
            span: 1.0,
            width: 1.0,
            thickness: 1.0,
            material: MaterialSpec {
                kind: MaterialKind::Aluminium,
                young_modulus: 1200.0,
                foundation_modulus: None,
            },
        }
    }

    #[test]
    fn benchmark_rigidity() {
        assert!((benchmark_beam().flexural_rigidity() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn zero_force_means_zero_deflection() {
        let b = benchmark_beam();
        let load = LoadCase::point(0.0, 0.3);
        for i in 0..=10 {
            assert_eq!(beam_deflection(&b, &load, i as f64 / 10.0).unwrap(), 0.0);
        }
        let fd = beam_deflection_fd(&b, &load, 64).unwrap();
        assert!(fd.w.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn midspan_value() {
        let d = beam_deflection(&benchmark_beam(), &LoadCase::point(100.0, 0.5), 0.5).unwrap();
        assert!((d - 0.020_833_333_333_333_33).abs() < 1e-15);
    }

    #[test]
    fn supports_do_not_move() {
        let b = benchmark_beam();
        for a in [0.1, 0.5, 0.77] {
            let load = LoadCase::point(80.0, a);
            assert_eq!(beam_deflection(&b, &load, 0.0).unwrap(), 0.0);
            assert_eq!(beam_deflection(&b, &load, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_in_force() {
        let b = benchmark_beam();
        for x in [0.1, 0.4, 0.9] {
            let d1 = beam_deflection(&b, &LoadCase::point(50.0, 0.3), x).unwrap();
            let d2 = beam_deflection(&b, &LoadCase::point(100.0, 0.3), x).unwrap();
            assert!((d2 - 2.0 * d1).abs() <= 1e-14 * d2.abs());
        }
    }

    #[test]
    fn rejects_positions_off_the_span() {
        let b = benchmark_beam();
        let load = LoadCase::point(10.0, 0.5);
        assert!(matches!(
            beam_deflection(&b, &load, 1.2),
            Err(Error::OutsideSpan { .. })
        ));
        assert!(beam_deflection(&b, &load, -0.01).is_err());
    }

    #[test]
    fn rejects_bad_loads() {
        let b = benchmark_beam();
        assert!(beam_deflection(&b, &LoadCase::point(-1.0, 0.5), 0.5).is_err());
        assert!(beam_deflection(&b, &LoadCase::point(1.0, 0.0), 0.5).is_err());
        assert!(beam_deflection(&b, &LoadCase::point(1.0, 1.0), 0.5).is_err());
    }

    #[test]
    fn fd_matches_midspan_benchmark() {
        let fd = beam_deflection_fd(&benchmark_beam(), &LoadCase::point(100.0, 0.5), 201).unwrap();
        let exact = 100.0 / (48.0 * 100.0);
        assert!((fd.max() - exact).abs() / exact < 1e-3);
        // symmetric about midspan
        for i in 0..101 {
            assert!((fd.w[i] - fd.w[200 - i]).abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn fd_rejects_degenerate_input() {
        let mut b = benchmark_beam();
        assert!(beam_deflection_fd(&b, &LoadCase::point(1.0, 0.5), 8).is_err());
        b.material.young_modulus = 0.0;
        assert!(matches!(
            beam_deflection_fd(&b, &LoadCase::point(1.0, 0.5), 32),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn fd_patch_load_is_milder_than_point_load() {
        let b = benchmark_beam();
        let point = beam_deflection_fd(&b, &LoadCase::point(100.0, 0.5), 201).unwrap();
        let patch = beam_deflection_fd(
            &b,
            &LoadCase {
                force: 100.0,
                application_point: 0.5,
                patch_width: 0.2,
            },
            201,
        )
        .unwrap();
        assert!(patch.max() < point.max());
        assert!(patch.max() > 0.9 * point.max());
    }
}
