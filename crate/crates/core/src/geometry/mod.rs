//! Domains and their boundary-dependent kernels.
//!
//! Sign convention: `G` is the Green's function of the Laplacian `Δ` with
//! Dirichlet boundary conditions, so `G ≤ 0` in domains with a boundary. The
//! Robin function is the regular part of `G` on the diagonal and tends to `+∞`
//! at the boundary.

mod conformal;
mod point;
pub mod sampling;

use std::f64::consts::PI;
use std::sync::Arc;

pub use num_complex::Complex64;

pub use conformal::{BoundaryFoot, ConformalMap};
pub use point::Point2;

use conformal::{to_complex, to_point};

const INV_2PI: f64 = 0.5 / PI;

/// Default projection band for the half-plane and the unit disk.
pub const DEFAULT_BAND: f64 = 0.2;

/// Step used by the finite-difference curvature of conformal domains.
const LAMBDA_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("coincident points ({}, {}) and ({}, {})", .x.x1, .x.x2, .y.x1, .y.x2)]
    CoincidentPoints { x: Point2, y: Point2 },
    #[error("point ({}, {}) is not interior to the domain", .0.x1, .0.x2)]
    OutsideDomain(Point2),
    #[error("point ({}, {}) has non-finite coordinates", .0.x1, .0.x2)]
    NonFinite(Point2),
    #[error("{op} is not defined for the {variant} domain")]
    UnsupportedVariant {
        op: &'static str,
        variant: &'static str,
    },
    #[error("boundary distance {distance} exceeds the projection band width {band}")]
    OutsideBand { distance: f64, band: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

/// Green/Robin values and gradients at a pair of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub green: f64,
    /// Gradient of `G(x, y)` in its first argument.
    pub grad_green_x: Point2,
    /// Robin function at `x`; zero for the whole plane.
    pub robin: f64,
    pub grad_robin: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Plane,
    /// `{x : x2 > 0}`
    HalfPlane,
    /// `{x : |x| < 1}`
    UnitDisk,
    ConformalDisk(Arc<ConformalMap>),
}

impl DomainKind {
    pub fn name(&self) -> &'static str {
        match self {
            DomainKind::Plane => "plane",
            DomainKind::HalfPlane => "half-plane",
            DomainKind::UnitDisk => "unit-disk",
            DomainKind::ConformalDisk(_) => "conformal-disk",
        }
    }
}

/// A planar domain together with the width of its boundary projection band.
///
/// Values are immutable after construction and can be shared across threads.
/// The conformal variant keeps a per-thread warm-start cache for its inverse map.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainModel {
    kind: DomainKind,
    band: f64,
}

/// Threshold under which two points are treated as coincident.
pub fn coincidence_threshold(x: Point2, y: Point2) -> f64 {
    1e-13 * (1.0 + x.norm() + y.norm())
}

fn disk_green(x: Point2, y: Point2) -> f64 {
    let diff = (x - y).norm_sq();
    // |x − y*|²|y|² = |x − y|² + (1 − |x|²)(1 − |y|²)
    let image = diff + (1.0 - x.norm_sq()) * (1.0 - y.norm_sq());
    INV_2PI * 0.5 * (diff / image).ln()
}

fn disk_grad_green(x: Point2, y: Point2) -> Point2 {
    let d = x - y;
    let diff = d.norm_sq();
    let image = diff + (1.0 - x.norm_sq()) * (1.0 - y.norm_sq());
    // (x − y*)/|x − y*|² = (x|y|² − y)/(|x − y*|²|y|²)
    let reflected = (x * y.norm_sq() - y) / image;
    (d / diff - reflected) * INV_2PI
}

fn disk_robin(x: Point2) -> f64 {
    -INV_2PI * (-x.norm_sq()).ln_1p()
}

fn disk_grad_robin(x: Point2) -> Point2 {
    x / (PI * (1.0 - x.norm_sq()))
}

fn complex_grad(z: Complex64) -> Point2 {
    to_point(z)
}

impl DomainModel {
    pub fn plane() -> Self {
        Self {
            kind: DomainKind::Plane,
            band: f64::INFINITY,
        }
    }

    pub fn half_plane() -> Self {
        Self {
            kind: DomainKind::HalfPlane,
            band: DEFAULT_BAND,
        }
    }

    pub fn unit_disk() -> Self {
        Self {
            kind: DomainKind::UnitDisk,
            band: DEFAULT_BAND,
        }
    }

    /// Conformal image of the unit disk; the band defaults to half the smallest
    /// radius of curvature of the boundary and is validated by sampling.
    pub fn conformal(map: ConformalMap) -> Result<Self, GeometryError> {
        let band = map.default_band();
        map.validate_band(band)?;
        Ok(Self {
            kind: DomainKind::ConformalDisk(Arc::new(map)),
            band,
        })
    }

    /// Replaces the projection band width, validating it for curved boundaries.
    pub fn with_band(mut self, band: f64) -> Result<Self, GeometryError> {
        if !(band > 0.0) || !band.is_finite() {
            return Err(GeometryError::InvalidDomain(format!(
                "band width must be positive and finite, got {band}"
            )));
        }
        match &self.kind {
            DomainKind::Plane => {
                return Err(GeometryError::UnsupportedVariant {
                    op: "band width",
                    variant: "plane",
                })
            }
            DomainKind::HalfPlane => {}
            DomainKind::UnitDisk => {
                if band >= 1.0 {
                    return Err(GeometryError::InvalidDomain(format!(
                        "unit-disk band width must be below the curvature radius 1, got {band}"
                    )));
                }
            }
            DomainKind::ConformalDisk(map) => map.validate_band(band)?,
        }
        self.band = band;
        Ok(self)
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self.kind, DomainKind::Plane)
    }

    /// Clears warm-start state so that subsequent evaluations are reproducible.
    pub fn reset_caches(&self) {
        if let DomainKind::ConformalDisk(_) = self.kind {
            ConformalMap::reset_warm_start();
        }
    }

    /// True iff `x` is strictly interior.
    pub fn contains(&self, x: Point2) -> bool {
        if !x.is_finite() {
            return false;
        }
        match &self.kind {
            DomainKind::Plane => true,
            DomainKind::HalfPlane => x.x2 > 0.0,
            DomainKind::UnitDisk => x.norm_sq() < 1.0,
            DomainKind::ConformalDisk(map) => map.inverse(x).is_ok(),
        }
    }

    fn check_interior(&self, x: Point2) -> Result<(), GeometryError> {
        if !x.is_finite() {
            return Err(GeometryError::NonFinite(x));
        }
        match &self.kind {
            DomainKind::ConformalDisk(_) => Ok(()), // checked by the inverse map
            _ if self.contains(x) => Ok(()),
            _ => Err(GeometryError::OutsideDomain(x)),
        }
    }

    fn check_pair(&self, x: Point2, y: Point2) -> Result<(), GeometryError> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        if (x - y).norm() < coincidence_threshold(x, y) {
            return Err(GeometryError::CoincidentPoints { x, y });
        }
        Ok(())
    }

    fn no_boundary(&self, op: &'static str) -> GeometryError {
        GeometryError::UnsupportedVariant {
            op,
            variant: self.name(),
        }
    }

    /// Green's function `G(x, y)`.
    pub fn green(&self, x: Point2, y: Point2) -> Result<f64, GeometryError> {
        self.check_pair(x, y)?;
        Ok(match &self.kind {
            DomainKind::Plane => INV_2PI * (x - y).norm().ln(),
            DomainKind::HalfPlane => {
                let image = (x - y.reflect()).norm_sq();
                INV_2PI * 0.5 * ((x - y).norm_sq() / image).ln()
            }
            DomainKind::UnitDisk => disk_green(x, y),
            DomainKind::ConformalDisk(map) => {
                let z = map.inverse(x)?;
                let w = map.inverse(y)?;
                disk_green(to_point(z), to_point(w))
            }
        })
    }

    /// Gradient of `G(x, y)` with respect to `x`.
    pub fn grad_green_x(&self, x: Point2, y: Point2) -> Result<Point2, GeometryError> {
        self.check_pair(x, y)?;
        Ok(match &self.kind {
            DomainKind::Plane => {
                let d = x - y;
                d / d.norm_sq() * INV_2PI
            }
            DomainKind::HalfPlane => {
                let d = x - y;
                let e = x - y.reflect();
                (d / d.norm_sq() - e / e.norm_sq()) * INV_2PI
            }
            DomainKind::UnitDisk => disk_grad_green(x, y),
            DomainKind::ConformalDisk(map) => {
                let z = map.inverse(x)?;
                let w = map.inverse(y)?;
                let g = to_complex(disk_grad_green(to_point(z), to_point(w)));
                // ∇_x (u ∘ T) = conj(T'(x)) ∇_z u with T' = 1/f'
                complex_grad((Complex64::new(1.0, 0.0) / map.derivative_at(z)).conj() * g)
            }
        })
    }

    /// Robin function `γ̃(x)`.
    pub fn robin(&self, x: Point2) -> Result<f64, GeometryError> {
        self.check_interior(x)?;
        match &self.kind {
            DomainKind::Plane => Err(self.no_boundary("robin")),
            DomainKind::HalfPlane => Ok(-INV_2PI * (2.0 * x.x2).ln()),
            DomainKind::UnitDisk => Ok(disk_robin(x)),
            DomainKind::ConformalDisk(map) => {
                let z = map.inverse(x)?;
                // γ̃_Ω(x) = γ̃_𝔻(z) + ln|T'(x)|/2π, T'(x) = 1/f'(z)
                Ok(disk_robin(to_point(z)) - INV_2PI * map.derivative_at(z).norm().ln())
            }
        }
    }

    /// Gradient of the Robin function.
    pub fn grad_robin(&self, x: Point2) -> Result<Point2, GeometryError> {
        self.check_interior(x)?;
        match &self.kind {
            DomainKind::Plane => Err(self.no_boundary("grad_robin")),
            DomainKind::HalfPlane => Ok(Point2::new(0.0, -INV_2PI / x.x2)),
            DomainKind::UnitDisk => Ok(disk_grad_robin(x)),
            DomainKind::ConformalDisk(map) => {
                let z = map.inverse(x)?;
                let d1 = map.derivative_at(z);
                let d2 = map.second_derivative_at(z);
                let inv = Complex64::new(1.0, 0.0) / d1;
                let pulled = inv.conj() * to_complex(disk_grad_robin(to_point(z)));
                // ∇ Re(−log f'(T(x))) = conj(−f''/f'²)
                let log_term = (-d2 * inv * inv).conj() * INV_2PI;
                Ok(complex_grad(pulled + log_term))
            }
        }
    }

    /// All kernel values for the pair `(x, y)`; Robin fields are zero for the plane.
    pub fn kernel_values(&self, x: Point2, y: Point2) -> Result<KernelValues, GeometryError> {
        let (robin, grad_robin) = if self.has_boundary() {
            (self.robin(x)?, self.grad_robin(x)?)
        } else {
            (0.0, Point2::ZERO)
        };
        Ok(KernelValues {
            green: self.green(x, y)?,
            grad_green_x: self.grad_green_x(x, y)?,
            robin,
            grad_robin,
        })
    }

    /// Gradients needed by the velocity field: `∇_x G(x_i, x_j)` in row-major
    /// order with a zero diagonal, and `∇γ̃(x_i)` (zero for the plane).
    ///
    /// Conformal domains invert each position once instead of once per pair.
    pub fn interaction_gradients(
        &self,
        xs: &[Point2],
    ) -> Result<(Vec<Point2>, Vec<Point2>), GeometryError> {
        let n = xs.len();
        for (i, &x) in xs.iter().enumerate() {
            self.check_interior(x)?;
            for &y in &xs[..i] {
                if (x - y).norm() < coincidence_threshold(x, y) {
                    return Err(GeometryError::CoincidentPoints { x: y, y: x });
                }
            }
        }
        let mut pair = vec![Point2::ZERO; n * n];
        let mut robin = vec![Point2::ZERO; n];
        if let DomainKind::ConformalDisk(map) = &self.kind {
            let zs = xs
                .iter()
                .map(|&x| map.inverse(x).map(to_point))
                .collect::<Result<Vec<_>, _>>()?;
            let one = Complex64::new(1.0, 0.0);
            for i in 0..n {
                let z = to_complex(zs[i]);
                let d1 = map.derivative_at(z);
                let inv = (one / d1).conj();
                for j in 0..n {
                    if i != j {
                        pair[i * n + j] = complex_grad(inv * to_complex(disk_grad_green(zs[i], zs[j])));
                    }
                }
                let d2 = map.second_derivative_at(z);
                let log_term = (-d2 / (d1 * d1)).conj() * INV_2PI;
                robin[i] = complex_grad(inv * to_complex(disk_grad_robin(zs[i])) + log_term);
            }
            return Ok((pair, robin));
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pair[i * n + j] = self.grad_green_x(xs[i], xs[j])?;
                }
            }
            if self.has_boundary() {
                robin[i] = self.grad_robin(xs[i])?;
            }
        }
        Ok((pair, robin))
    }

    /// `∇_x G(x, y) + ∇_x G(y, x)`.
    pub fn symmetrized_green_gradient(&self, x: Point2, y: Point2) -> Result<Point2, GeometryError> {
        Ok(self.grad_green_x(x, y)? + self.grad_green_x(y, x)?)
    }

    /// Euclidean distance to the boundary (`+∞` for the plane).
    pub fn boundary_distance(&self, x: Point2) -> Result<f64, GeometryError> {
        self.check_interior(x)?;
        Ok(match &self.kind {
            DomainKind::Plane => f64::INFINITY,
            DomainKind::HalfPlane => x.x2,
            DomainKind::UnitDisk => 1.0 - x.norm(),
            DomainKind::ConformalDisk(map) => {
                map.inverse(x)?;
                map.nearest_boundary(x).distance
            }
        })
    }

    fn check_band(&self, distance: f64) -> Result<(), GeometryError> {
        // the flat boundary has a globally single-valued projection
        if matches!(self.kind, DomainKind::HalfPlane) || distance <= self.band {
            Ok(())
        } else {
            Err(GeometryError::OutsideBand {
                distance,
                band: self.band,
            })
        }
    }

    /// Nearest boundary point, defined on the projection band.
    pub fn boundary_projection(&self, x: Point2) -> Result<Point2, GeometryError> {
        self.projection_and_distance(x).map(|(p, _)| p)
    }

    fn projection_and_distance(&self, x: Point2) -> Result<(Point2, f64), GeometryError> {
        self.check_interior(x)?;
        let (p, d) = match &self.kind {
            DomainKind::Plane => return Err(self.no_boundary("boundary_projection")),
            DomainKind::HalfPlane => (Point2::new(x.x1, 0.0), x.x2),
            DomainKind::UnitDisk => {
                let r = x.norm();
                if r == 0.0 {
                    return Err(GeometryError::OutsideBand {
                        distance: 1.0,
                        band: self.band,
                    });
                }
                (x / r, 1.0 - r)
            }
            DomainKind::ConformalDisk(map) => {
                map.inverse(x)?;
                let foot = map.nearest_boundary(x);
                (foot.point, foot.distance)
            }
        };
        self.check_band(d)?;
        Ok((p, d))
    }

    /// Gradient of the distance function, `(x − P(x))/|x − P(x)|`.
    pub fn distance_gradient(&self, x: Point2) -> Result<Point2, GeometryError> {
        match &self.kind {
            DomainKind::HalfPlane => {
                self.check_interior(x)?;
                Ok(Point2::E2)
            }
            DomainKind::UnitDisk => {
                let (p, _) = self.projection_and_distance(x)?;
                Ok(-p)
            }
            _ => {
                let (p, d) = self.projection_and_distance(x)?;
                Ok((x - p) / d)
            }
        }
    }

    /// Outward unit normal at the projection, `n(P(x)) = −∇dist(x)`.
    pub fn normal_at_projection(&self, x: Point2) -> Result<Point2, GeometryError> {
        self.distance_gradient(x).map(|g| -g)
    }

    /// Unit tangent at the projection, `τ(P(x)) = −(∇dist(x))^⊥`.
    pub fn tangent_at_projection(&self, x: Point2) -> Result<Point2, GeometryError> {
        self.distance_gradient(x).map(|g| -g.perp())
    }

    /// `Λ(x) = (∇²dist ∇^⊥dist)·∇^⊥dist`, the only nonzero eigenvalue of the
    /// rank-one distance Hessian.
    pub fn curvature_lambda(&self, x: Point2) -> Result<f64, GeometryError> {
        match &self.kind {
            DomainKind::Plane => Err(self.no_boundary("curvature_lambda")),
            DomainKind::HalfPlane => {
                self.check_interior(x)?;
                Ok(0.0)
            }
            DomainKind::UnitDisk => {
                self.projection_and_distance(x)?;
                Ok(-1.0 / x.norm())
            }
            DomainKind::ConformalDisk(map) => {
                let (p, d) = self.projection_and_distance(x)?;
                let g = (x - p) / d;
                let t = g.perp();
                let h = LAMBDA_FD_STEP;
                let grad_at = |y: Point2| {
                    let foot = map.nearest_boundary(y);
                    (y - foot.point) / foot.distance
                };
                let dg = (grad_at(x + t * h) - grad_at(x - t * h)) / (2.0 * h);
                Ok(dg.dot(t))
            }
        }
    }
}
