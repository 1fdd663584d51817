//! Wrap-around simulation region and the homogeneous Poisson point process.
//!
//! All geometry is in meters. Intensities are given in devices per km² and
//! converted once in [`sample_ppp`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const M2_PER_KM2: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Square `[0, L)²` with opposite edges identified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusRegion {
    side_length: f64,
}

impl TorusRegion {
    pub fn new(side_length: f64) -> Result<Self> {
        if !side_length.is_finite() || side_length <= 0.0 {
            return Err(invalid(
                "side_length",
                format!("must be finite and positive, got {side_length}"),
            ));
        }
        Ok(Self { side_length })
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn area_km2(&self) -> f64 {
        self.side_length * self.side_length / M2_PER_KM2
    }

    fn wrap_coord(&self, v: f64) -> f64 {
        let l = self.side_length;
        let w = v.rem_euclid(l);
        // rem_euclid can round up to exactly L for tiny negative inputs.
        if w >= l {
            0.0
        } else {
            w
        }
    }

    /// Maps any finite point onto its representative in `[0, L)²`.
    pub fn normalize(&self, p: Point) -> Point {
        Point::new(self.wrap_coord(p.x), self.wrap_coord(p.y))
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.side_length).contains(&p.x) && (0.0..self.side_length).contains(&p.y)
    }

    /// Minimal-image displacement `q - p`, each component in `(-L/2, L/2]`.
    pub fn displacement(&self, p: Point, q: Point) -> (f64, f64) {
        (self.wrap_delta(q.x - p.x), self.wrap_delta(q.y - p.y))
    }

    fn wrap_delta(&self, d: f64) -> f64 {
        let l = self.side_length;
        let half = 0.5 * l;
        if d > half {
            d - l
        } else if d <= -half {
            d + l
        } else {
            d
        }
    }

    /// Shortest distance between two normalized points on the torus.
    pub fn distance(&self, p: Point, q: Point) -> f64 {
        torus_distance(p, q, self)
    }
}

/// Euclidean distance using the nearest periodic image on each axis.
pub fn torus_distance(p: Point, q: Point, region: &TorusRegion) -> f64 {
    let l = region.side_length;
    let mut dx = (p.x - q.x).abs();
    let mut dy = (p.y - q.y).abs();
    dx = dx.min(l - dx);
    dy = dy.min(l - dy);
    dx.hypot(dy)
}

/// One realization of device locations. Device id = index into `positions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSet {
    region: TorusRegion,
    positions: Vec<Point>,
}

impl DeviceSet {
    /// Builds a device set from explicit positions, normalizing them onto the torus.
    pub fn from_positions(region: TorusRegion, positions: impl IntoIterator<Item = Point>) -> Result<Self> {
        let mut out = Vec::new();
        for p in positions {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(invalid("positions", "coordinates must be finite"));
            }
            out.push(region.normalize(p));
        }
        Ok(Self {
            region,
            positions: out,
        })
    }

    pub fn region(&self) -> &TorusRegion {
        &self.region
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, id: usize) -> Point {
        self.positions[id]
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Samples a homogeneous PPP of `intensity` devices per km² on `region`.
///
/// The count is Poisson with mean `intensity × area`, positions are i.i.d.
/// uniform. The generator is ChaCha8, so a given `(region, intensity, seed)`
/// reproduces the same realization on every platform.
pub fn sample_ppp(region: TorusRegion, intensity: f64, seed: u64) -> Result<DeviceSet> {
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(invalid(
            "intensity",
            format!("must be finite and non-negative, got {intensity}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = intensity * region.area_km2();
    let count = if mean == 0.0 {
        0
    } else {
        let poisson = Poisson::new(mean).map_err(|e| invalid("intensity", e.to_string()))?;
        poisson.sample(&mut rng) as usize
    };
    let l = region.side_length();
    let positions = (0..count)
        .map(|_| {
            let x = rng.random_range(0.0..l);
            let y = rng.random_range(0.0..l);
            Point::new(x, y)
        })
        .collect();
    Ok(DeviceSet { region, positions })
}
