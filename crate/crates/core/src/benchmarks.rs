//! Obstacle problems with closed-form solutions.
//!
//! * Benchmark I: square `(-1,1)^2`, zero obstacle, prescribed contact radius
//!   and nonzero Dirichlet data.
//! * Benchmark II: unit disk, constant loading, constant obstacle.
//! * Benchmark III: unit disk, constant loading, spherical obstacle.
//!
//! The disk benchmarks are radially symmetric. Outside the contact disk of
//! radius `R` the solution is `f/4 (1 - r^2) + A ln r`; `R` solves a scalar
//! equation expressing `C^1` continuity at the contact interface. Outside the
//! unit disk the solution is extended by zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameters of one benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchmarkSpec {
    /// Benchmark I with contact radius `R` in `[0, 1)`.
    Square { contact_radius: f64 },
    /// Benchmark II with loading `f < 0` and obstacle level `phi < 0`.
    RingConstant { f: f64, phi: f64 },
    /// Benchmark III with loading `f < 0`, obstacle top `phi_max < 0` and sphere radius `rho >= 1`.
    RingSpherical { f: f64, phi_max: f64, rho: f64 },
}

/// Computational domain of a benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Square,
    UnitDisk,
}

impl BenchmarkSpec {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Square { .. } => "I",
            Self::RingConstant { .. } => "II",
            Self::RingSpherical { .. } => "III",
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Self::Square { .. } => Domain::Square,
            _ => Domain::UnitDisk,
        }
    }

    pub fn exact(&self) -> Result<ExactSolution> {
        match *self {
            Self::Square { contact_radius } => benchmark1(contact_radius),
            Self::RingConstant { f, phi } => benchmark2(f, phi),
            Self::RingSpherical { f, phi_max, rho } => benchmark3(f, phi_max, rho),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Square { r: f64 },
    /// Inactive obstacle on the disk: `u = f/4 (1 - r^2)`.
    RingLinear { f: f64 },
    RingConstant { f: f64, phi: f64, r: f64, a: f64 },
    RingSpherical { f: f64, phi_max: f64, rho: f64, psi: f64, r: f64, a: f64 },
}

/// Exact solution, gradient, multiplier and energy of a benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    spec: BenchmarkSpec,
    kind: Kind,
    energy: f64,
}

fn check_negative(name: &str, v: f64) -> Result<()> {
    if !(v < 0.0) || !v.is_finite() {
        return Err(Error::Parameter(format!("{name} must be negative, got {v}")));
    }
    Ok(())
}

/// Benchmark I on `(-1,1)^2` with contact radius `r_contact`.
pub fn benchmark1(r_contact: f64) -> Result<ExactSolution> {
    if !(0.0..1.0).contains(&r_contact) {
        return Err(Error::Parameter(format!(
            "contact radius must lie in [0, 1), got {r_contact}"
        )));
    }
    let r2 = r_contact * r_contact;
    let r4 = r2 * r2;
    let energy = 192.0 * (12.0 / 35.0 - 28.0 * r2 / 45.0 + r4 / 3.0)
        - 32.0 * r2 * (28.0 / 45.0 - 4.0 * r2 / 3.0 + r4)
        + 2.0 / 3.0 * PI * r4 * r4;
    Ok(ExactSolution {
        spec: BenchmarkSpec::Square {
            contact_radius: r_contact,
        },
        kind: Kind::Square { r: r_contact },
        energy,
    })
}

/// Bisection on `[lo, hi]` down to floating-point resolution.
fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() || glo.is_nan() || ghi.is_nan() {
        return Err(Error::NoBracket { lo, hi });
    }
    let lo_sign = glo.signum();
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

const BRACKET_EPS: f64 = 1e-9;

/// Contact radius for a constant obstacle: root of `R^2 (1 - 2 ln R) = 1 - 4 phi / f` in `(0, 1)`.
pub fn contact_radius_constant(f: f64, phi: f64) -> Result<f64> {
    check_negative("f", f)?;
    check_negative("phi", phi)?;
    if f.abs() < 4.0 * phi.abs() {
        return Err(Error::ObstacleInactive { f, phi });
    }
    let rhs = 1.0 - 4.0 * phi / f;
    let g = |r: f64| r * r * (1.0 - 2.0 * r.ln()) - rhs;
    let (lo, hi) = (BRACKET_EPS, 1.0 - BRACKET_EPS);
    if g(lo) >= 0.0 {
        // threshold loading: the contact set shrinks to the origin
        return Ok(lo);
    }
    bisect(g, lo, hi)
}

/// Residual of the spherical-obstacle contact condition at angle `psi`.
pub fn spherical_contact_residual(f: f64, phi_max: f64, rho: f64, psi: f64) -> f64 {
    let s = psi.sin();
    let r = rho * s;
    (4.0 * (phi_max - rho + rho * psi.cos()) + f * r * r - f) / (4.0 * r * r.ln()) - f * r / 2.0
        + psi.tan()
}

/// Contact angle `psi` and radius `R = rho sin psi` for a spherical obstacle.
pub fn contact_radius_spherical(f: f64, phi_max: f64, rho: f64) -> Result<(f64, f64)> {
    check_negative("f", f)?;
    check_negative("phi_max", phi_max)?;
    if !(rho >= 1.0) || !rho.is_finite() {
        return Err(Error::Parameter(format!("sphere radius must be >= 1, got {rho}")));
    }
    if f.abs() < 4.0 * phi_max.abs() {
        return Err(Error::ObstacleInactive { f, phi: phi_max });
    }
    let lo = BRACKET_EPS;
    let hi = (1.0 / rho).asin() - BRACKET_EPS;
    let psi = bisect(|p| spherical_contact_residual(f, phi_max, rho, p), lo, hi)?;
    Ok((psi, rho * psi.sin()))
}

/// Energy of `f/4 (1 - r^2) + a ln r` over the annulus `R < r < 1`.
fn annulus_energy(f: f64, a: f64, r: f64) -> f64 {
    let l = r.ln();
    let r2 = r * r;
    -PI * a * a * l + PI * f * a * r2 * l + 3.0 * PI * f * f * (1.0 - r2 * r2) / 16.0
        - PI * f * f * (1.0 - r2) / 4.0
}

fn linear_ring(spec: BenchmarkSpec, f: f64) -> ExactSolution {
    ExactSolution {
        spec,
        kind: Kind::RingLinear { f },
        energy: -PI * f * f / 16.0,
    }
}

/// Benchmark II: unit disk, constant loading `f`, constant obstacle `phi`.
pub fn benchmark2(f: f64, phi: f64) -> Result<ExactSolution> {
    let spec = BenchmarkSpec::RingConstant { f, phi };
    match contact_radius_constant(f, phi) {
        Ok(r) => {
            let a = (4.0 * phi + f * r * r - f) / (4.0 * r.ln());
            let energy = annulus_energy(f, a, r) - f * phi * PI * r * r;
            Ok(ExactSolution {
                spec,
                kind: Kind::RingConstant { f, phi, r, a },
                energy,
            })
        }
        Err(Error::ObstacleInactive { .. }) => Ok(linear_ring(spec, f)),
        Err(e) => Err(e),
    }
}

/// Benchmark III: unit disk, constant loading `f`, spherical obstacle of
/// radius `rho` whose top sits at `phi_max`.
pub fn benchmark3(f: f64, phi_max: f64, rho: f64) -> Result<ExactSolution> {
    let spec = BenchmarkSpec::RingSpherical { f, phi_max, rho };
    match contact_radius_spherical(f, phi_max, rho) {
        Ok((psi, r)) => {
            let a = (4.0 * (phi_max - rho + rho * psi.cos()) + f * r * r - f) / (4.0 * r.ln());
            let s2 = psi.sin().powi(2);
            let rho2 = rho * rho;
            let contact = -PI * rho2 / 2.0 * (s2 + (psi.cos().powi(2)).ln())
                - PI * f * rho2 * (phi_max - rho) * s2
                - 2.0 * PI * f * rho2 * rho / 3.0 * (1.0 - (1.0 - s2).powf(1.5));
            Ok(ExactSolution {
                spec,
                kind: Kind::RingSpherical {
                    f,
                    phi_max,
                    rho,
                    psi,
                    r,
                    a,
                },
                energy: contact + annulus_energy(f, a, r),
            })
        }
        Err(Error::ObstacleInactive { .. }) => Ok(linear_ring(spec, f)),
        Err(e) => Err(e),
    }
}

impl ExactSolution {
    pub fn spec(&self) -> BenchmarkSpec {
        self.spec
    }

    /// Exact energy `J(u)`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Radius of the contact disk; `None` when the obstacle is inactive.
    pub fn contact_radius(&self) -> Option<f64> {
        match self.kind {
            Kind::Square { r } => Some(r),
            Kind::RingLinear { .. } => None,
            Kind::RingConstant { r, .. } | Kind::RingSpherical { r, .. } => Some(r),
        }
    }

    /// Contact angle of the spherical benchmark.
    pub fn contact_angle(&self) -> Option<f64> {
        match self.kind {
            Kind::RingSpherical { psi, .. } => Some(psi),
            _ => None,
        }
    }

    /// Coefficient of the `ln r` term outside the contact disk.
    pub fn log_coefficient(&self) -> Option<f64> {
        match self.kind {
            Kind::RingConstant { a, .. } | Kind::RingSpherical { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn is_obstacle_active(&self) -> bool {
        !matches!(self.kind, Kind::RingLinear { .. })
    }

    pub fn load(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            Kind::Square { r } => {
                let s = x * x + y * y;
                if s > r * r {
                    -16.0 * s + 8.0 * r * r
                } else {
                    -8.0 * (r.powi(4) + r * r) + 8.0 * r * r * s
                }
            }
            Kind::RingLinear { f } | Kind::RingConstant { f, .. } | Kind::RingSpherical { f, .. } => f,
        }
    }

    /// Obstacle. The spherical obstacle is continued by its rim value
    /// `phi_max - rho` where the sphere does not reach.
    pub fn obstacle(&self, x: f64, y: f64) -> f64 {
        match self.spec {
            BenchmarkSpec::Square { .. } => 0.0,
            BenchmarkSpec::RingConstant { phi, .. } => phi,
            BenchmarkSpec::RingSpherical { phi_max, rho, .. } => {
                phi_max - rho + (rho * rho - x * x - y * y).max(0.0).sqrt()
            }
        }
    }

    /// Exact solution; zero outside the unit disk for the disk benchmarks.
    pub fn u(&self, x: f64, y: f64) -> f64 {
        let s = x * x + y * y;
        match self.kind {
            Kind::Square { r } => (s - r * r).max(0.0).powi(2),
            _ if s >= 1.0 => 0.0,
            Kind::RingLinear { f } => f / 4.0 * (1.0 - s),
            Kind::RingConstant { f, phi, r, a } => {
                if s > r * r {
                    f / 4.0 * (1.0 - s) + a * s.sqrt().ln()
                } else {
                    phi
                }
            }
            Kind::RingSpherical {
                f,
                phi_max,
                rho,
                r,
                a,
                ..
            } => {
                if s > r * r {
                    f / 4.0 * (1.0 - s) + a * s.sqrt().ln()
                } else {
                    phi_max - rho + (rho * rho - s).sqrt()
                }
            }
        }
    }

    pub fn grad_u(&self, x: f64, y: f64) -> [f64; 2] {
        let s = x * x + y * y;
        let radial = |a: f64, f: f64| [a * x / s - f * x / 2.0, a * y / s - f * y / 2.0];
        match self.kind {
            Kind::Square { r } => {
                let g = 4.0 * (s - r * r).max(0.0);
                [g * x, g * y]
            }
            _ if s >= 1.0 => [0.0, 0.0],
            Kind::RingLinear { f } => [-f * x / 2.0, -f * y / 2.0],
            Kind::RingConstant { f, r, a, .. } => {
                if s > r * r {
                    radial(a, f)
                } else {
                    [0.0, 0.0]
                }
            }
            Kind::RingSpherical { f, rho, r, a, .. } => {
                if s > r * r {
                    radial(a, f)
                } else {
                    let q = (rho * rho - s).sqrt();
                    [-x / q, -y / q]
                }
            }
        }
    }

    /// Optimal multiplier `lambda = -(Laplace u + f)`.
    pub fn lambda(&self, x: f64, y: f64) -> f64 {
        let s = x * x + y * y;
        match self.kind {
            Kind::Square { r } => {
                if s > r * r {
                    0.0
                } else {
                    8.0 * (r.powi(4) + r * r) - 8.0 * r * r * s
                }
            }
            Kind::RingLinear { .. } => 0.0,
            Kind::RingConstant { f, r, .. } => {
                if s <= r * r {
                    -f
                } else {
                    0.0
                }
            }
            Kind::RingSpherical { f, rho, r, .. } => {
                if s <= r * r {
                    let q = rho * rho - s;
                    (2.0 * rho * rho - s) / q.powf(1.5) - f
                } else {
                    0.0
                }
            }
        }
    }
}
