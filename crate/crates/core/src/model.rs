//! Record types for the four input datasets and the in-memory catalogs.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;

use crate::calendar::{StudyWindow, Timestamp};
use crate::error::{Error, Result};
use crate::geo::{GeoPoint, Polygon, PolygonDefect};

macro_rules! id_newtype {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[cfg_attr(feature = "serde", derive(serde::Serialize))]
        #[cfg_attr(feature = "serde", serde(transparent))]
        pub struct $name(String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_newtype!(
    /// Opaque, pre-anonymized user token.
    UserId
);
id_newtype!(PoiId);
id_newtype!(AoiId);

impl UserId {
    pub fn new(raw: &str) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyUserId);
        }
        if raw.chars().any(char::is_whitespace) {
            return Err(Error::WhitespaceUserId);
        }
        Ok(Self(raw.to_owned()))
    }
}

impl PoiId {
    pub fn new(raw: &str) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyPoiId);
        }
        Ok(Self(raw.to_owned()))
    }
}

impl AoiId {
    pub fn new(raw: &str) -> Self {
        Self(raw.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositioningRecord {
    pub user_id: UserId,
    pub point: GeoPoint,
    pub timestamp: Timestamp,
}

impl PositioningRecord {
    pub fn new(user: &str, lon: f64, lat: f64, timestamp: Timestamp, window: &StudyWindow) -> Result<Self> {
        let user_id = UserId::new(user)?;
        let point = GeoPoint::new(lon, lat)?;
        if !window.contains(timestamp) {
            return Err(Error::OutsideWindow(timestamp));
        }
        Ok(Self { user_id, point, timestamp })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapQueryRecord {
    pub user_id: UserId,
    /// Resolved against the POI catalog at join time, not here.
    pub poi_id: PoiId,
    pub keyword: Option<String>,
    pub timestamp: Timestamp,
}

impl MapQueryRecord {
    pub fn new(user: &str, poi: &str, keyword: Option<&str>, timestamp: Timestamp, window: &StudyWindow) -> Result<Self> {
        let user_id = UserId::new(user)?;
        let poi_id = PoiId::new(poi)?;
        if !window.contains(timestamp) {
            return Err(Error::OutsideWindow(timestamp));
        }
        Ok(Self { user_id, poi_id, keyword: keyword.map(ToOwned::to_owned), timestamp })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poi {
    pub poi_id: PoiId,
    pub name: String,
    pub location: GeoPoint,
    /// Root first, e.g. `["Shopping", "Supermarket"]`.
    pub category_path: Vec<String>,
}

impl Poi {
    pub fn new(id: &str, name: &str, lon: f64, lat: f64, category_path: Vec<String>) -> Result<Self> {
        let poi_id = PoiId::new(id)?;
        let location = GeoPoint::new(lon, lat)?;
        if category_path.is_empty() || category_path.iter().any(|c| c.is_empty()) {
            return Err(Error::EmptyCategory(id.to_owned()));
        }
        Ok(Self { poi_id, name: name.to_owned(), location, category_path })
    }

    /// True when `prefix` is a leading sub-path of this POI's category path.
    pub fn in_category<S: AsRef<str>>(&self, prefix: &[S]) -> bool {
        prefix.len() <= self.category_path.len()
            && prefix.iter().zip(&self.category_path).all(|(p, c)| p.as_ref() == c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum AoiKind {
    IndustrialTraditional,
    IndustrialHighTech,
    Commercial,
}

impl AoiKind {
    pub const ALL: [AoiKind; 3] = [AoiKind::IndustrialTraditional, AoiKind::IndustrialHighTech, AoiKind::Commercial];

    pub fn label(self) -> &'static str {
        match self {
            AoiKind::IndustrialTraditional => "IndustrialTraditional",
            AoiKind::IndustrialHighTech => "IndustrialHighTech",
            AoiKind::Commercial => "Commercial",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        AoiKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_owned()))
    }

    pub fn is_industrial(self) -> bool {
        !matches!(self, AoiKind::Commercial)
    }
}

impl fmt::Display for AoiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aoi {
    pub aoi_id: AoiId,
    pub name: String,
    pub kind: AoiKind,
    pub polygon: Polygon,
}

impl Aoi {
    pub fn new(id: &str, name: &str, kind: AoiKind, vertices: Vec<GeoPoint>) -> Result<Self> {
        let aoi = || id.to_owned();
        let polygon = Polygon::new(vertices).map_err(|d| match d {
            PolygonDefect::TooFewVertices => Error::TooFewVertices { aoi: aoi() },
            PolygonDefect::SelfIntersecting => Error::SelfIntersecting { aoi: aoi() },
            PolygonDefect::ZeroArea => Error::ZeroArea { aoi: aoi() },
            PolygonDefect::CrossesAntimeridian => Error::CrossesAntimeridian { aoi: aoi() },
            PolygonDefect::InvalidVertex(reason) => Error::InvalidVertex { aoi: aoi(), reason },
        })?;
        Ok(Self { aoi_id: AoiId::new(id), name: name.to_owned(), kind, polygon })
    }
}

/// Immutable, id-sorted collection with unique ids.
#[derive(Debug, Clone, Default)]
pub struct PoiCatalog {
    pois: Vec<Poi>,
}

impl PoiCatalog {
    pub fn new(mut pois: Vec<Poi>) -> Result<Self> {
        pois.sort_by(|a, b| a.poi_id.cmp(&b.poi_id));
        if let Some(w) = pois.windows(2).find(|w| w[0].poi_id == w[1].poi_id) {
            return Err(Error::DuplicateId(w[0].poi_id.to_string()));
        }
        Ok(Self { pois })
    }

    pub fn get(&self, id: &str) -> Option<&Poi> {
        self.pois.binary_search_by(|p| p.poi_id.as_str().cmp(id)).ok().map(|i| &self.pois[i])
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Poi> {
        self.pois.iter()
    }

    pub fn len(&self) -> usize {
        self.pois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pois.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct AoiCatalog {
    aois: Vec<Aoi>,
}

impl AoiCatalog {
    pub fn new(mut aois: Vec<Aoi>) -> Result<Self> {
        aois.sort_by(|a, b| a.aoi_id.cmp(&b.aoi_id));
        if let Some(w) = aois.windows(2).find(|w| w[0].aoi_id == w[1].aoi_id) {
            return Err(Error::DuplicateId(w[0].aoi_id.to_string()));
        }
        Ok(Self { aois })
    }

    pub fn get(&self, id: &str) -> Option<&Aoi> {
        self.aois.binary_search_by(|a| a.aoi_id.as_str().cmp(id)).ok().map(|i| &self.aois[i])
    }

    /// AOIs in ascending id order.
    pub fn as_slice(&self) -> &[Aoi] {
        &self.aois
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Aoi> {
        self.aois.iter()
    }

    pub fn len(&self) -> usize {
        self.aois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aois.is_empty()
    }
}

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    /// 1-based line number in the source file.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RejectLog {
    entries: Vec<Reject>,
}

impl RejectLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, line: u64, reason: impl Into<String>) {
        self.entries.push(Reject { line, reason: reason.into() });
    }

    pub fn entries(&self) -> &[Reject] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: RejectLog) {
        self.entries.extend(other.entries);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn window() -> StudyWindow {
        StudyWindow::new(1_400_000_000, 1_500_000_000)
    }

    #[test]
    fn positioning_validation() {
        let w = window();
        assert!(PositioningRecord::new("a1", 121.5, 31.2, 1_420_070_400, &w).is_ok());
        assert_eq!(PositioningRecord::new("a1", 200.0, 31.2, 1_420_070_400, &w).unwrap_err().to_string(), "lon out of range");
        assert_eq!(PositioningRecord::new("", 1.0, 1.0, 1_420_070_400, &w).unwrap_err(), Error::EmptyUserId);
        assert_eq!(PositioningRecord::new("a b", 1.0, 1.0, 1_420_070_400, &w).unwrap_err(), Error::WhitespaceUserId);
        assert!(matches!(PositioningRecord::new("a", 1.0, 1.0, 1, &w), Err(Error::OutsideWindow(1))));
    }

    #[test]
    fn query_keyword_optional() {
        let q = MapQueryRecord::new("a1", "p9", None, 1_420_070_400, &window()).unwrap();
        assert_eq!(q.keyword, None);
        assert_eq!(MapQueryRecord::new("", "p9", None, 1_420_070_400, &window()).unwrap_err().to_string(), "empty user_id");
    }

    #[test]
    fn catalog_rejects_duplicates_and_resolves() {
        let mk = |id: &str| Poi::new(id, "x", 1.0, 1.0, vec!["Food".into(), "Restaurant".into()]).unwrap();
        let cat = PoiCatalog::new(vec![mk("p2"), mk("p1"), mk("p3")]).unwrap();
        assert_eq!(cat.len(), 3);
        assert!(cat.get("p1").is_some() && cat.get("p3").is_some() && cat.get("p4").is_none());
        assert_eq!(PoiCatalog::new(vec![mk("p1"), mk("p1")]).unwrap_err(), Error::DuplicateId("p1".into()));
        assert!(mk("p1").in_category(&["Food"]));
        assert!(!mk("p1").in_category(&["Food", "Bar"]));
        assert!(Poi::new("p", "x", 1.0, 1.0, vec![]).is_err());
    }

    #[test]
    fn aoi_errors_name_the_aoi() {
        let two = vec![GeoPoint::raw(0.0, 0.0), GeoPoint::raw(1.0, 0.0)];
        let err = Aoi::new("park-7", "P", AoiKind::Commercial, two).unwrap_err();
        assert_eq!(err.to_string(), "aoi park-7: polygon has < 3 vertices");
        assert_eq!(AoiKind::from_label("Commercial").unwrap(), AoiKind::Commercial);
        assert!(AoiKind::from_label("Mall").is_err());
    }
}
