//! Seeded quasi-random sample sets over rectangular domains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::Point;

/// Region removed from a domain (singular loci of coefficients or maps).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exclusion {
    /// Open disk.
    Disk { center: Point, radius: f64 },
    /// Points with `|a x1 + b x2 + c| < half_width`.
    Band { a: f64, b: f64, c: f64, half_width: f64 },
}

impl Exclusion {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Exclusion::Disk { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) < radius
            }
            Exclusion::Band { a, b, c, half_width } => (a * p[0] + b * p[1] + c).abs() < half_width,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
    #[serde(default)]
    pub exclusions: Vec<Exclusion>,
}

impl Domain {
    pub fn rect(x1: (f64, f64), x2: (f64, f64)) -> Self {
        Domain {
            x1,
            x2,
            exclusions: Vec::new(),
        }
    }

    pub fn excluding(mut self, e: Exclusion) -> Self {
        self.exclusions.push(e);
        self
    }

    pub fn admits(&self, p: Point) -> bool {
        p[0] >= self.x1.0
            && p[0] <= self.x1.1
            && p[1] >= self.x2.0
            && p[1] <= self.x2.1
            && !self.exclusions.iter().any(|e| e.contains(p))
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::rect((0.5, 2.0), (0.5, 2.0))
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

#[derive(Clone, Debug)]
pub struct SampleSet {
    pub points: Vec<Point>,
    pub seed: u64,
    pub domain: Domain,
}

impl SampleSet {
    /// `n` points of a randomly shifted Halton(2,3) sequence inside the
    /// domain. The shift comes from `seed`, so the set is reproducible.
    pub fn new(domain: &Domain, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = [rng.gen::<f64>(), rng.gen::<f64>()];
        let mut points = Vec::with_capacity(n);
        let mut i = 1u64;
        while points.len() < n && i < 1000 * n as u64 + 1000 {
            let u = (radical_inverse(i, 2) + shift[0]).fract();
            let v = (radical_inverse(i, 3) + shift[1]).fract();
            let p = [
                domain.x1.0 + u * (domain.x1.1 - domain.x1.0),
                domain.x2.0 + v * (domain.x2.1 - domain.x2.0),
            ];
            if domain.admits(p) {
                points.push(p);
            }
            i += 1;
        }
        SampleSet {
            points,
            seed,
            domain: domain.clone(),
        }
    }

    pub fn from_points(points: Vec<Point>) -> Self {
        SampleSet {
            points,
            seed: 0,
            domain: Domain::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_inside() {
        let d = Domain::rect((-1.0, 1.0), (-1.0, 1.0)).excluding(Exclusion::Disk {
            center: [0.0, 0.0],
            radius: 0.3,
        });
        let a = SampleSet::new(&d, 100, 9);
        let b = SampleSet::new(&d, 100, 9);
        assert_eq!(a.points, b.points);
        assert_eq!(a.len(), 100);
        assert!(a.points.iter().all(|p| p[0].hypot(p[1]) >= 0.3));
        let c = SampleSet::new(&d, 100, 10);
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn band_exclusion() {
        let d = Domain::rect((0.0, 1.0), (0.0, 1.0)).excluding(Exclusion::Band {
            a: 1.0,
            b: -1.0,
            c: 0.0,
            half_width: 0.1,
        });
        let s = SampleSet::new(&d, 50, 1);
        assert!(s.points.iter().all(|p| (p[0] - p[1]).abs() >= 0.1));
    }
}
