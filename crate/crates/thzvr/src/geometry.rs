//! Point processes for SBS deployments and blocker placement.
//!
//! Deployments use a Matérn type-II hard-core process obtained by thinning a
//! Poisson parent. Parents are drawn in the region dilated by the hard-core
//! distance so that points near the boundary see their full neighbourhood.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned square `[0, side] x [0, side]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub side: f64,
}

impl Region {
    pub fn new(side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::Config(format!(
                "region side must be positive, got {side}"
            )));
        }
        Ok(Region { side })
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn center(&self) -> Point2D {
        Point2D::new(0.5 * self.side, 0.5 * self.side)
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        (0.0..=self.side).contains(&p.x) && (0.0..=self.side).contains(&p.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub sbs_positions: Vec<Point2D>,
    pub hard_core_distance: f64,
    pub region: Region,
}

impl Deployment {
    /// Smallest pairwise distance, infinite for fewer than two points.
    pub fn min_pairwise_distance(&self) -> f64 {
        let p = &self.sbs_positions;
        let mut best = f64::INFINITY;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                best = best.min(p[i].distance(&p[j]));
            }
        }
        best
    }
}

fn ppp_in_square<R: Rng + ?Sized>(rng: &mut R, intensity: f64, lo: f64, hi: f64) -> Vec<Point2D> {
    let side = hi - lo;
    let mean = intensity * side * side;
    if mean <= 0.0 {
        return Vec::new();
    }
    let n = Poisson::new(mean)
        .map(|d| d.sample(rng) as usize)
        .unwrap_or(0);
    (0..n)
        .map(|_| Point2D::new(rng.random_range(lo..hi), rng.random_range(lo..hi)))
        .collect()
}

/// Homogeneous Poisson points in `region`, drawn from a caller-owned generator.
pub fn sample_ppp_with<R: Rng + ?Sized>(
    rng: &mut R,
    intensity: f64,
    region: Region,
) -> Result<Vec<Point2D>> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::Domain(format!(
            "intensity must be nonnegative, got {intensity}"
        )));
    }
    Ok(ppp_in_square(rng, intensity, 0.0, region.side))
}

/// Homogeneous Poisson points in `region` for a fixed seed.
pub fn sample_ppp(intensity: f64, region: Region, seed: u64) -> Result<Vec<Point2D>> {
    sample_ppp_with(&mut ChaCha8Rng::seed_from_u64(seed), intensity, region)
}

/// Parent intensity whose Matérn-II thinning retains `eta`.
pub fn matern_parent_intensity(eta: f64, epsilon: f64) -> Result<f64> {
    if eta == 0.0 || epsilon == 0.0 {
        return Ok(eta);
    }
    let a = std::f64::consts::PI * epsilon * epsilon;
    if eta * a >= 1.0 {
        return Err(Error::Config(format!(
            "hard-core intensity {eta} with distance {epsilon} is infeasible: eta*pi*eps^2 = {:.4} must be below 1",
            eta * a
        )));
    }
    Ok(-(1.0 - eta * a).ln() / a)
}

/// Matérn type-II deployment from a caller-owned generator.
pub fn sample_mhcpp_with<R: Rng + ?Sized>(
    rng: &mut R,
    eta: f64,
    epsilon: f64,
    region: Region,
) -> Result<Deployment> {
    if !(eta >= 0.0 && eta.is_finite()) || !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!(
            "hard-core process needs eta >= 0 and eps >= 0, got eta = {eta}, eps = {epsilon}"
        )));
    }
    let parent = matern_parent_intensity(eta, epsilon)?;
    let parents = ppp_in_square(rng, parent, -epsilon, region.side + epsilon);
    let marks: Vec<f64> = parents.iter().map(|_| rng.random::<f64>()).collect();
    let kept = parents
        .iter()
        .enumerate()
        .filter(|&(i, p)| {
            parents
                .iter()
                .enumerate()
                .all(|(j, q)| j == i || marks[j] >= marks[i] || p.distance(q) >= epsilon)
        })
        .map(|(_, p)| *p)
        .filter(|p| region.contains(p))
        .collect();
    Ok(Deployment {
        sbs_positions: kept,
        hard_core_distance: epsilon,
        region,
    })
}

/// Matérn type-II deployment for a fixed seed.
pub fn sample_mhcpp(eta: f64, epsilon: f64, region: Region, seed: u64) -> Result<Deployment> {
    sample_mhcpp_with(&mut ChaCha8Rng::seed_from_u64(seed), eta, epsilon, region)
}

/// Intensity of the Poisson process standing in for the hard-core process.
///
/// Intensity matching: the equivalent process keeps `eta` unchanged.
pub fn equivalent_ppp_intensity(eta: f64, _epsilon: f64) -> f64 {
    eta
}

/// Euclidean distances from `origin`, ascending.
pub fn distances_from(origin: Point2D, points: &[Point2D]) -> Vec<f64> {
    let mut d: Vec<f64> = points.iter().map(|p| origin.distance(p)).collect();
    d.sort_by(f64::total_cmp);
    d
}
