//! AOI polygons, POIs and home locations.

use mobimetrics_core::{Aoi, AoiKind, GeoPoint, Poi};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::WorldConfig;

pub const LON0: f64 = 120.8;
pub const LAT0: f64 = 30.7;
const CELL: f64 = 0.15;
const COLS: usize = 8;
/// Homes keep this far from any AOI bounding box.
const HOME_MARGIN: f64 = 0.01;
/// Sampled in-AOI points keep this far from the boundary.
const EDGE_CLEARANCE: f64 = 2e-5;

pub fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Auto,
    Restaurant,
    Finance,
    Tourism,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Auto, Category::Restaurant, Category::Finance, Category::Tourism];

    pub fn path(self) -> &'static str {
        match self {
            Category::Auto => "Automobile/Car Dealer",
            Category::Restaurant => "Food/Restaurant",
            Category::Finance => "Finance/Investment",
            Category::Tourism => "Tourism/Attraction",
        }
    }

    fn id_prefix(self) -> &'static str {
        match self {
            Category::Auto => "auto",
            Category::Restaurant => "food",
            Category::Finance => "fin",
            Category::Tourism => "tour",
        }
    }

    pub fn count(self, cfg: &WorldConfig) -> usize {
        match self {
            Category::Auto => cfg.n_auto_pois,
            Category::Restaurant => cfg.n_restaurant_pois,
            Category::Finance => cfg.n_finance_pois,
            Category::Tourism => cfg.n_tourism_pois,
        }
    }

    pub fn monthly(self, cfg: &WorldConfig) -> f64 {
        match self {
            Category::Auto => cfg.auto_monthly,
            Category::Restaurant => cfg.restaurant_monthly,
            Category::Finance => cfg.finance_monthly,
            Category::Tourism => cfg.tourism_monthly,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Layout {
    /// Traditional parks, then high-tech parks, then malls.
    pub aois: Vec<Aoi>,
    pub centers: Vec<GeoPoint>,
    pub pois: Vec<Poi>,
    /// POI position per mall, indexed like the malls.
    pub mall_pois: Vec<usize>,
    /// POI positions per [`Category::ALL`] entry.
    pub category_pois: Vec<Vec<usize>>,
    pub cinema_ids: Vec<String>,
    rows: usize,
}

impl Layout {
    pub fn park_ids(cfg: &WorldConfig) -> Vec<String> {
        let trad = (0..cfg.n_traditional).map(|i| format!("trad_{i:02}"));
        let tech = (0..cfg.n_high_tech).map(|i| format!("tech_{i:02}"));
        trad.chain(tech).collect()
    }

    pub fn mall_id(i: usize) -> String {
        format!("mall_{i:02}")
    }

    pub fn generate(cfg: &WorldConfig, rng: &mut ChaCha8Rng) -> Self {
        let n = cfg.n_parks() + cfg.n_commercial;
        let rows = n.div_ceil(COLS);
        let mut cells: Vec<usize> = (0..rows * COLS).collect();
        cells.shuffle(rng);
        let mut aois = Vec::with_capacity(n);
        let mut centers = Vec::with_capacity(n);
        let ids_kinds = Self::park_ids(cfg)
            .into_iter()
            .enumerate()
            .map(|(i, id)| (id, if i < cfg.n_traditional { AoiKind::IndustrialTraditional } else { AoiKind::IndustrialHighTech }))
            .chain((0..cfg.n_commercial).map(|i| (Self::mall_id(i), AoiKind::Commercial)));
        for ((id, kind), cell) in ids_kinds.zip(cells) {
            let cx = LON0 + CELL * ((cell % COLS) as f64 + 0.5) + rng.random_range(-0.03..0.03);
            let cy = LAT0 + CELL * ((cell / COLS) as f64 + 0.5) + rng.random_range(-0.03..0.03);
            let radius = rng.random_range(0.006..0.012);
            let k = rng.random_range(6..=9usize);
            let step = std::f64::consts::TAU / k as f64;
            let phase = rng.random_range(0.0..step);
            let vertices = (0..k)
                .map(|j| {
                    let a = phase + step * (j as f64 + rng.random_range(-0.3..0.3));
                    let r = radius * rng.random_range(0.75..1.0);
                    GeoPoint::raw(round6(cx + r * a.cos()), round6(cy + r * a.sin()))
                })
                .collect();
            let name = format!("{} {}", kind_name(kind), &id[id.len() - 2..]);
            aois.push(Aoi::new(&id, &name, kind, vertices).expect("star-shaped polygons are simple"));
            centers.push(GeoPoint::raw(round6(cx), round6(cy)));
        }

        let mut pois = Vec::new();
        let mut mall_pois = Vec::new();
        for m in 0..cfg.n_commercial {
            let c = centers[cfg.n_parks() + m];
            mall_pois.push(pois.len());
            pois.push(poi(&format!("mallpoi_{m:02}"), &format!("Mall {m:02}"), c, "Shopping/Mall"));
        }
        let mut layout = Layout { aois, centers, pois, mall_pois, category_pois: Vec::new(), cinema_ids: Vec::new(), rows };
        for cat in Category::ALL {
            let mut idx = Vec::new();
            for i in 0..cat.count(cfg) {
                idx.push(layout.pois.len());
                let p = layout.random_point(rng);
                layout.pois.push(poi(&format!("{}_{i:03}", cat.id_prefix()), &format!("{} {i}", cat.path()), p, cat.path()));
            }
            layout.category_pois.push(idx);
        }
        for v in 0..cfg.n_venues {
            let id = format!("cinema_{v:02}");
            let p = layout.random_point(rng);
            layout.pois.push(poi(&id, &format!("Cinema {v:02}"), p, "Entertainment/Cinema"));
            layout.cinema_ids.push(id);
        }
        layout
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> GeoPoint {
        GeoPoint::raw(
            round6(LON0 + rng.random_range(0.0..CELL * COLS as f64)),
            round6(LAT0 + rng.random_range(0.0..CELL * self.rows as f64)),
        )
    }

    /// A point well away from every AOI.
    pub fn home(&self, rng: &mut ChaCha8Rng) -> GeoPoint {
        loop {
            let p = self.random_point(rng);
            let near = self.aois.iter().any(|a| {
                let b = a.polygon.bbox();
                p.lon > b.min_lon - HOME_MARGIN
                    && p.lon < b.max_lon + HOME_MARGIN
                    && p.lat > b.min_lat - HOME_MARGIN
                    && p.lat < b.max_lat + HOME_MARGIN
            });
            if !near {
                return p;
            }
        }
    }

    /// Home plus a small jitter, still clear of every AOI.
    pub fn near_home(home: GeoPoint, rng: &mut ChaCha8Rng) -> GeoPoint {
        GeoPoint::raw(round6(home.lon + rng.random_range(-0.002..0.002)), round6(home.lat + rng.random_range(-0.002..0.002)))
    }

    /// Uniform point strictly inside AOI `a`, clear of its boundary after
    /// rounding to six decimals.
    pub fn inside(&self, a: usize, rng: &mut ChaCha8Rng) -> GeoPoint {
        let poly = &self.aois[a].polygon;
        let b = *poly.bbox();
        loop {
            let p = GeoPoint::raw(
                round6(rng.random_range(b.min_lon..b.max_lon)),
                round6(rng.random_range(b.min_lat..b.max_lat)),
            );
            if poly.contains(p) && poly.distance_to_boundary(p) > EDGE_CLEARANCE {
                return p;
            }
        }
    }
}

fn kind_name(kind: AoiKind) -> &'static str {
    match kind {
        AoiKind::IndustrialTraditional => "Traditional Park",
        AoiKind::IndustrialHighTech => "High-Tech Park",
        AoiKind::Commercial => "Mall",
    }
}

fn poi(id: &str, name: &str, p: GeoPoint, path: &str) -> Poi {
    Poi::new(id, name, p.lon, p.lat, path.split('/').map(String::from).collect()).expect("generated POIs are valid")
}
