//! Planar geometry in lon/lat degrees.
//!
//! AOIs are city-block sized, so curvature is ignored throughout.

use alloc::vec::Vec;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    /// Validating constructor.
    pub fn new(lon: f64, lat: f64) -> Result<Self, Error> {
        if !lon.is_finite() || !lat.is_finite() {
            return Err(Error::NonFiniteCoordinate);
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Error::LonOutOfRange);
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::LatOutOfRange);
        }
        Ok(Self { lon, lat })
    }

    /// Builds a point without range checks. Geometry helpers use this for
    /// translated or synthetic coordinates.
    pub const fn raw(lon: f64, lat: f64) -> Self {
        Self { lon, lat }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub fn of(points: &[GeoPoint]) -> Self {
        let mut b = BBox {
            min_lon: f64::INFINITY,
            min_lat: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
            max_lat: f64::NEG_INFINITY,
        };
        for p in points {
            b.min_lon = b.min_lon.min(p.lon);
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lon = b.max_lon.max(p.lon);
            b.max_lat = b.max_lat.max(p.lat);
        }
        b
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lon >= self.min_lon && p.lon <= self.max_lon && p.lat >= self.min_lat && p.lat <= self.max_lat
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_lon <= other.max_lon
            && other.min_lon <= self.max_lon
            && self.min_lat <= other.max_lat
            && other.min_lat <= self.max_lat
    }
}

/// Why a vertex list is not a valid simple polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolygonDefect {
    TooFewVertices,
    SelfIntersecting,
    ZeroArea,
    CrossesAntimeridian,
    InvalidVertex(&'static str),
}

/// A simple polygon without holes. Closure is implicit: the first vertex is
/// not repeated at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<GeoPoint>,
    bbox: BBox,
}

impl Polygon {
    /// Validates and builds a polygon. A trailing vertex equal to the first
    /// one is dropped.
    pub fn new(mut vertices: Vec<GeoPoint>) -> Result<Self, PolygonDefect> {
        for v in &vertices {
            if let Err(e) = GeoPoint::new(v.lon, v.lat) {
                return Err(PolygonDefect::InvalidVertex(match e {
                    Error::LonOutOfRange => "lon out of range",
                    Error::LatOutOfRange => "lat out of range",
                    _ => "non-finite coordinate",
                }));
            }
        }
        if vertices.len() > 3 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(PolygonDefect::TooFewVertices);
        }
        let bbox = BBox::of(&vertices);
        if bbox.max_lon - bbox.min_lon > 180.0 {
            return Err(PolygonDefect::CrossesAntimeridian);
        }
        if self_intersects(&vertices) {
            return Err(PolygonDefect::SelfIntersecting);
        }
        if signed_area(&vertices) == 0.0 {
            return Err(PolygonDefect::ZeroArea);
        }
        Ok(Self { vertices, bbox })
    }

    pub fn vertices(&self) -> &[GeoPoint] {
        &self.vertices
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn area(&self) -> f64 {
        libm::fabs(signed_area(&self.vertices))
    }

    pub fn edges(&self) -> impl Iterator<Item = (GeoPoint, GeoPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Smallest distance from `p` to any edge, in degrees.
    pub fn distance_to_boundary(&self, p: GeoPoint) -> f64 {
        self.edges().map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }
}

/// Shoelace area, positive when counter-clockwise. Coordinates are shifted
/// to the first vertex to limit cancellation.
pub fn signed_area(v: &[GeoPoint]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let o = v[0];
    let mut acc = 0.0;
    for i in 1..v.len() - 1 {
        let a = v[i];
        let b = v[i + 1];
        acc += (a.lon - o.lon) * (b.lat - o.lat) - (b.lon - o.lon) * (a.lat - o.lat);
    }
    acc / 2.0
}

/// Cross product of (b - a) x (c - a). Positive when c is left of a->b.
pub fn orient(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> f64 {
    (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)
}

fn on_segment_collinear(a: GeoPoint, b: GeoPoint, p: GeoPoint) -> bool {
    p.lon >= a.lon.min(b.lon) && p.lon <= a.lon.max(b.lon) && p.lat >= a.lat.min(b.lat) && p.lat <= a.lat.max(b.lat)
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(p1: GeoPoint, p2: GeoPoint, q1: GeoPoint, q2: GeoPoint) -> bool {
    let d1 = sign(orient(q1, q2, p1));
    let d2 = sign(orient(q1, q2, p2));
    let d3 = sign(orient(p1, p2, q1));
    let d4 = sign(orient(p1, p2, q2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment_collinear(q1, q2, p1))
        || (d2 == 0 && on_segment_collinear(q1, q2, p2))
        || (d3 == 0 && on_segment_collinear(p1, p2, q1))
        || (d4 == 0 && on_segment_collinear(p1, p2, q2))
}

fn self_intersects(v: &[GeoPoint]) -> bool {
    let n = v.len();
    for i in 0..n {
        if v[i] == v[(i + 1) % n] {
            return true;
        }
    }
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        // adjacent edge folding back onto this one
        let c = v[(i + 2) % n];
        if orient(a, b, c) == 0.0 {
            let dot = (a.lon - b.lon) * (c.lon - b.lon) + (a.lat - b.lat) * (c.lat - b.lat);
            if dot > 0.0 {
                return true;
            }
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a, b, v[j], v[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// Euclidean distance from `p` to the closed segment `a`-`b`.
pub fn segment_distance(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    let dx = b.lon - a.lon;
    let dy = b.lat - a.lat;
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.lon - a.lon) * dx + (p.lat - a.lat) * dy) / len2).clamp(0.0, 1.0) };
    let ex = a.lon + t * dx - p.lon;
    let ey = a.lat + t * dy - p.lat;
    libm::sqrt(ex * ex + ey * ey)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pts(c: &[(f64, f64)]) -> Vec<GeoPoint> {
        c.iter().map(|&(x, y)| GeoPoint::raw(x, y)).collect()
    }

    #[test]
    fn rejects_out_of_range_points() {
        assert_eq!(GeoPoint::new(200.0, 31.2), Err(Error::LonOutOfRange));
        assert_eq!(GeoPoint::new(121.5, -91.0), Err(Error::LatOutOfRange));
        assert_eq!(GeoPoint::new(f64::NAN, 0.0), Err(Error::NonFiniteCoordinate));
        assert!(GeoPoint::new(-180.0, 90.0).is_ok());
    }

    #[test]
    fn polygon_validation() {
        let square = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let p = Polygon::new(square.clone()).unwrap();
        assert_eq!(p.area(), 1.0);

        let mut closed = square.clone();
        closed.push(square[0]);
        assert_eq!(Polygon::new(closed).unwrap().vertices().len(), 4);

        assert_eq!(Polygon::new(pts(&[(0.0, 0.0), (1.0, 0.0)])), Err(PolygonDefect::TooFewVertices));
        let bowtie = pts(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(Polygon::new(bowtie), Err(PolygonDefect::SelfIntersecting));
        let flat = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert!(Polygon::new(flat).is_err());
        let spike = pts(&[(0.0, 0.0), (2.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        assert_eq!(Polygon::new(spike), Err(PolygonDefect::SelfIntersecting));
        let wide = pts(&[(-170.0, 0.0), (170.0, 0.0), (170.0, 1.0)]);
        assert_eq!(Polygon::new(wide), Err(PolygonDefect::CrossesAntimeridian));
        let bad = vec![GeoPoint::raw(0.0, 0.0), GeoPoint::raw(0.0, 95.0), GeoPoint::raw(1.0, 0.0)];
        assert_eq!(Polygon::new(bad), Err(PolygonDefect::InvalidVertex("lat out of range")));
    }

    #[test]
    fn bowtie_crossing_confirmed_by_segment_pairs() {
        // Edges (0,0)-(1,1) and (1,0)-(0,1) of the bowtie cross at (0.5, 0.5).
        let a = pts(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(segments_intersect(a[0], a[1], a[2], a[3]));
        assert!(!segments_intersect(a[0], a[2], a[1], a[3]));
    }

    #[test]
    fn boundary_distance() {
        let p = Polygon::new(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert!((p.distance_to_boundary(GeoPoint::raw(0.5, 0.25)) - 0.25).abs() < 1e-15);
        assert!((p.distance_to_boundary(GeoPoint::raw(2.0, 0.5)) - 1.0).abs() < 1e-15);
    }
}
