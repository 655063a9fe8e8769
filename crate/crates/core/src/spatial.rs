//! Point-in-polygon and a uniform grid over AOI bounding boxes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geo::{orient, segment_distance, BBox, GeoPoint, Polygon};
use crate::model::{AoiCatalog, AoiId, AoiKind};

/// Points closer than this to an edge are treated as lying on it.
pub const EDGE_TOLERANCE_DEG: f64 = 1e-12;

/// Default grid cell, roughly 1 km.
pub const DEFAULT_CELL_SIZE_DEG: f64 = 0.01;

/// Crossing-number test with closed boundary: points on an edge or vertex
/// are inside.
pub fn contains(vertices: &[GeoPoint], p: GeoPoint) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if on_edge(a, b, p) {
            return true;
        }
        // Orient each edge upward so the test is symmetric under reversal.
        let (lo, hi) = if a.lat <= b.lat { (a, b) } else { (b, a) };
        if lo.lat <= p.lat && p.lat < hi.lat && orient(lo, hi, p) > 0.0 {
            inside = !inside;
        }
    }
    inside
}

#[inline]
fn on_edge(a: GeoPoint, b: GeoPoint, p: GeoPoint) -> bool {
    let t = EDGE_TOLERANCE_DEG;
    if p.lon < a.lon.min(b.lon) - t || p.lon > a.lon.max(b.lon) + t || p.lat < a.lat.min(b.lat) - t || p.lat > a.lat.max(b.lat) + t {
        return false;
    }
    segment_distance(p, a, b) <= t
}

impl Polygon {
    pub fn contains(&self, p: GeoPoint) -> bool {
        self.bbox().contains(p) && contains(self.vertices(), p)
    }
}

type CellKey = (i32, i32);

#[derive(Debug, Clone, Copy)]
struct Cell {
    key: CellKey,
    start: u32,
    len: u32,
}

/// Uniform grid mapping cells to the AOIs whose bounding boxes overlap them.
///
/// AOI positions (`u32`) follow the catalog's ascending id order, so sorting
/// positions sorts ids.
#[derive(Debug, Clone)]
pub struct AoiIndex {
    cell_size: f64,
    ids: Vec<AoiId>,
    kinds: Vec<AoiKind>,
    polygons: Vec<Polygon>,
    cells: Vec<Cell>,
    candidates: Vec<u32>,
}

impl AoiIndex {
    pub fn build(catalog: &AoiCatalog, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidCellSize);
        }
        let mut pairs: Vec<(CellKey, u32)> = Vec::new();
        for (pos, aoi) in catalog.iter().enumerate() {
            let (x0, y0, x1, y1) = cell_span(aoi.polygon.bbox(), cell_size);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    pairs.push(((x, y), pos as u32));
                }
            }
        }
        // stable: positions inside a cell stay ascending
        pairs.sort_by_key(|&(k, _)| k);
        let mut cells: Vec<Cell> = Vec::new();
        let mut candidates = Vec::with_capacity(pairs.len());
        for (key, pos) in pairs {
            match cells.last_mut() {
                Some(c) if c.key == key => c.len += 1,
                _ => cells.push(Cell { key, start: candidates.len() as u32, len: 1 }),
            }
            candidates.push(pos);
        }
        Ok(Self {
            cell_size,
            ids: catalog.iter().map(|a| a.aoi_id.clone()).collect(),
            kinds: catalog.iter().map(|a| a.kind).collect(),
            polygons: catalog.iter().map(|a| a.polygon.clone()).collect(),
            cells,
            candidates,
        })
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, pos: u32) -> &AoiId {
        &self.ids[pos as usize]
    }

    pub fn kind(&self, pos: u32) -> AoiKind {
        self.kinds[pos as usize]
    }

    pub fn polygon(&self, pos: u32) -> &Polygon {
        &self.polygons[pos as usize]
    }

    pub fn position(&self, id: &str) -> Option<u32> {
        self.ids.binary_search_by(|a| a.as_str().cmp(id)).ok().map(|i| i as u32)
    }

    pub fn cell_of(&self, p: GeoPoint) -> (i32, i32) {
        (cell_coord(p.lon, self.cell_size), cell_coord(p.lat, self.cell_size))
    }

    /// AOI positions registered in a grid cell.
    pub fn cell_candidates(&self, key: (i32, i32)) -> &[u32] {
        match self.cells.binary_search_by_key(&key, |c| c.key) {
            Ok(i) => {
                let c = self.cells[i];
                &self.candidates[c.start as usize..(c.start + c.len) as usize]
            }
            Err(_) => &[],
        }
    }

    /// Every populated cell with its candidate list, in key order.
    pub fn cells(&self) -> impl Iterator<Item = ((i32, i32), &[u32])> + '_ {
        self.cells.iter().map(|c| (c.key, &self.candidates[c.start as usize..(c.start + c.len) as usize]))
    }

    /// Appends the positions of all AOIs containing `p`, ascending.
    pub fn assign_into(&self, p: GeoPoint, out: &mut Vec<u32>) {
        for &pos in self.cell_candidates(self.cell_of(p)) {
            if self.polygons[pos as usize].contains(p) {
                out.push(pos);
            }
        }
    }

    /// Ids of all AOIs containing `p`, ascending. Empty when none.
    pub fn assign(&self, p: GeoPoint) -> Vec<&AoiId> {
        let mut hits = Vec::new();
        self.assign_into(p, &mut hits);
        hits.into_iter().map(|pos| self.id(pos)).collect()
    }
}

fn cell_coord(v: f64, cell: f64) -> i32 {
    libm::floor(v / cell) as i32
}

fn cell_span(b: &BBox, cell: f64) -> (i32, i32, i32, i32) {
    (cell_coord(b.min_lon, cell), cell_coord(b.min_lat, cell), cell_coord(b.max_lon, cell), cell_coord(b.max_lat, cell))
}
