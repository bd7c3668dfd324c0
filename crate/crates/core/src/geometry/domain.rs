use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{cross, dist, point_segment_distance, sub, GeometryError, Point, Segment};

/// Geometric description of Ω.
///
/// Polygon vertices are counter-clockwise. Boundary edges are indexed in the
/// order of the boundary walk returned by [`DomainSpec::walk`]; that index is
/// what [`GammaSelector::Edges`] refers to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind {
    /// `(a, b)`; edge 0 is the left endpoint, edge 1 the right one.
    Interval { a: f64, b: f64 },
    Polygon { vertices: Vec<Point> },
    /// Polygonal approximation of a disk; the boundary polygon depends on h.
    Disk { center: Point, radius: f64 },
    /// `(0,s)² \ [s/2,s)²`, re-entrant corner at `(s/2, s/2)`.
    LShape { size: f64 },
    /// `(0,s)²` cut along the segment from `(s/2, s/2)` to `(s, s/2)`.
    SlitSquare { size: f64 },
}

/// Which boundary edges form Γ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaSelector {
    All,
    Edges(Vec<usize>),
}

impl Serialize for GammaSelector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GammaSelector::All => s.serialize_str("all"),
            GammaSelector::Edges(e) => e.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for GammaSelector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            Edges(Vec<usize>),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "all" => Ok(GammaSelector::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected \"all\" or a list of edge indices, found \"{w}\""
            ))),
            Raw::Edges(e) => Ok(GammaSelector::Edges(e)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    pub gamma: GammaSelector,
}

/// A point-membership oracle for the open set Ω.
pub trait Region: Sync {
    /// `true` iff `x` lies strictly inside Ω (boundary points are outside).
    fn contains(&self, x: Point) -> bool;
}

impl<F: Fn(Point) -> bool + Sync> Region for F {
    fn contains(&self, x: Point) -> bool {
        self(x)
    }
}

impl DomainSpec {
    pub fn new(kind: DomainKind, gamma: GammaSelector) -> Self {
        Self { kind, gamma }
    }

    pub fn unit_interval() -> Self {
        Self::new(DomainKind::Interval { a: 0.0, b: 1.0 }, GammaSelector::All)
    }

    pub fn unit_square() -> Self {
        Self::new(
            DomainKind::Polygon {
                vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            },
            GammaSelector::All,
        )
    }

    pub fn with_gamma(mut self, gamma: GammaSelector) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Checks the structural invariants that do not depend on a mesh.
    pub fn validate(&self) -> Result<(), GeometryError> {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return Err(GeometryError::DegenerateDomain(format!(
                        "interval endpoints ({a}, {b})"
                    )));
                }
            }
            DomainKind::Polygon { vertices } => validate_polygon(vertices)?,
            DomainKind::Disk { radius, .. } | DomainKind::LShape { size: radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(GeometryError::DegenerateDomain(format!("size {radius}")));
                }
            }
            DomainKind::SlitSquare { size } => {
                if !(size.is_finite() && *size > 0.0) {
                    return Err(GeometryError::DegenerateDomain(format!("size {size}")));
                }
            }
        }
        if let GammaSelector::Edges(e) = &self.gamma {
            if e.is_empty() {
                return Err(GeometryError::EmptyGamma);
            }
            // Disk edge counts depend on h and are checked at meshing time.
            if !matches!(self.kind, DomainKind::Disk { .. }) {
                let count = self.walk(1.0).len();
                if let Some(&index) = e.iter().find(|&&i| i >= count) {
                    return Err(GeometryError::GammaOutOfRange { index, count });
                }
            }
        }
        Ok(())
    }

    /// Number of rings used to approximate a disk of this radius at size h.
    pub(crate) fn disk_rings(radius: f64, h: f64) -> usize {
        ((radius / h) - 1e-9).ceil().max(1.0) as usize
    }

    /// The boundary walk: consecutive boundary edges with Ω on their left.
    /// `h` only matters for disks.
    pub fn walk(&self, h: f64) -> Vec<Segment> {
        match &self.kind {
            DomainKind::Interval { a, b } => vec![[[*a, 0.0], [*a, 0.0]], [[*b, 0.0], [*b, 0.0]]],
            DomainKind::Polygon { vertices } => closed_walk(vertices),
            DomainKind::Disk { center, radius } => {
                let n = 6 * Self::disk_rings(*radius, h);
                let pts: Vec<Point> = (0..n)
                    .map(|j| ring_point(*center, *radius, j, n))
                    .collect();
                closed_walk(&pts)
            }
            DomainKind::LShape { size: s } => closed_walk(&l_shape_vertices(*s)),
            DomainKind::SlitSquare { size: s } => {
                let s = *s;
                let m = 0.5 * s;
                let pts = [[0.0, 0.0], [s, 0.0], [s, m], [m, m], [s, m], [s, s], [0.0, s]];
                closed_walk(&pts)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::Disk { radius, .. } => 2.0 * radius,
            _ => {
                let w = self.walk(1.0);
                let mut d: f64 = 0.0;
                for s in &w {
                    for t in &w {
                        d = d.max(dist(s[0], t[0]));
                    }
                }
                d
            }
        }
    }

    /// Indices of the walk edges forming Γ.
    pub fn gamma_edges(&self, h: f64) -> Vec<usize> {
        match &self.gamma {
            GammaSelector::All => (0..self.walk(h).len()).collect(),
            GammaSelector::Edges(e) => {
                let mut e = e.clone();
                e.sort_unstable();
                e.dedup();
                e
            }
        }
    }

    /// Distance from `x` to the boundary walk.
    pub fn boundary_distance(&self, x: Point, h: f64) -> f64 {
        self.walk(h)
            .iter()
            .map(|s| point_segment_distance(x, s))
            .fold(f64::INFINITY, f64::min)
    }
}

impl Region for DomainSpec {
    fn contains(&self, x: Point) -> bool {
        match &self.kind {
            DomainKind::Interval { a, b } => x[0] > *a && x[0] < *b,
            DomainKind::Disk { center, radius } => {
                dist(x, *center) < radius * (1.0 - 1e-12)
            }
            _ => {
                let walk = self.walk(1.0);
                let scale = self.diameter();
                if walk
                    .iter()
                    .any(|s| point_segment_distance(x, s) <= 1e-12 * scale)
                {
                    return false;
                }
                even_odd(&walk, x)
            }
        }
    }
}

pub(crate) fn ring_point(center: Point, r: f64, j: usize, n: usize) -> Point {
    let t = std::f64::consts::TAU * (j as f64) / (n as f64);
    [center[0] + r * t.cos(), center[1] + r * t.sin()]
}

pub(crate) fn l_shape_vertices(s: f64) -> Vec<Point> {
    let m = 0.5 * s;
    vec![[0.0, 0.0], [s, 0.0], [s, m], [m, m], [m, s], [0.0, s]]
}

fn closed_walk(pts: &[Point]) -> Vec<Segment> {
    (0..pts.len())
        .map(|i| [pts[i], pts[(i + 1) % pts.len()]])
        .collect()
}

fn even_odd(walk: &[Segment], x: Point) -> bool {
    let mut inside = false;
    for [a, b] in walk {
        if (a[1] > x[1]) != (b[1] > x[1]) {
            let t = (x[1] - a[1]) / (b[1] - a[1]);
            let xc = a[0] + t * (b[0] - a[0]);
            if x[0] < xc {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| cross(pts[i], pts[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

fn segments_intersect(p: Segment, q: Segment) -> bool {
    let o = |a: Point, b: Point, c: Point| cross(sub(b, a), sub(c, a));
    let d1 = o(q[0], q[1], p[0]);
    let d2 = o(q[0], q[1], p[1]);
    let d3 = o(p[0], p[1], q[0]);
    let d4 = o(p[0], p[1], q[1]);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d == 0.0
            && c[0] >= a[0].min(b[0])
            && c[0] <= a[0].max(b[0])
            && c[1] >= a[1].min(b[1])
            && c[1] <= a[1].max(b[1])
    };
    on(q[0], q[1], p[0], d1) || on(q[0], q[1], p[1], d2) || on(p[0], p[1], q[0], d3) || on(p[0], p[1], q[1], d4)
}

fn validate_polygon(v: &[Point]) -> Result<(), GeometryError> {
    if v.len() < 3 {
        return Err(GeometryError::DegenerateDomain(format!(
            "polygon needs at least 3 vertices, got {}",
            v.len()
        )));
    }
    if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(GeometryError::DegenerateDomain("non-finite vertex".into()));
    }
    let area = signed_area(v);
    if area <= 0.0 {
        return Err(GeometryError::DegenerateDomain(format!(
            "polygon must be counter-clockwise with positive area (signed area {area})"
        )));
    }
    let edges = closed_walk(v);
    let n = edges.len();
    for i in 0..n {
        if dist(edges[i][0], edges[i][1]) == 0.0 {
            return Err(GeometryError::DegenerateDomain(format!("repeated vertex {i}")));
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if !adjacent && segments_intersect(edges[i], edges[j]) {
                return Err(GeometryError::DegenerateDomain(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_membership() {
        let d = DomainSpec::unit_square();
        assert!(d.contains([0.5, 0.5]));
        assert!(!d.contains([0.5, 0.0]));
        assert!(!d.contains([1.5, 0.5]));
    }

    #[test]
    fn slit_points_are_outside() {
        let d = DomainSpec::new(DomainKind::SlitSquare { size: 1.0 }, GammaSelector::Edges(vec![2, 3]));
        d.validate().unwrap();
        assert!(!d.contains([0.75, 0.5]));
        assert!(d.contains([0.25, 0.5]));
        assert!(d.contains([0.75, 0.6]));
    }

    #[test]
    fn l_shape_excludes_cut_out_quadrant() {
        let d = DomainSpec::new(DomainKind::LShape { size: 1.0 }, GammaSelector::All);
        assert!(d.contains([0.25, 0.75]));
        assert!(!d.contains([0.75, 0.75]));
        assert!((d.diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clockwise_and_self_intersecting_polygons_are_rejected() {
        let cw = DomainSpec::new(
            DomainKind::Polygon { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]] },
            GammaSelector::All,
        );
        assert!(matches!(cw.validate(), Err(GeometryError::DegenerateDomain(_))));
        let bow = DomainSpec::new(
            DomainKind::Polygon { vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]] },
            GammaSelector::All,
        );
        assert!(bow.validate().is_err());
    }

    #[test]
    fn gamma_index_out_of_range() {
        let d = DomainSpec::unit_square().with_gamma(GammaSelector::Edges(vec![4]));
        assert_eq!(d.validate(), Err(GeometryError::GammaOutOfRange { index: 4, count: 4 }));
    }

    #[test]
    fn gamma_selector_parses_keyword_and_list() {
        let all: GammaSelector = serde_json::from_str("\"all\"").unwrap();
        assert_eq!(all, GammaSelector::All);
        let e: GammaSelector = serde_json::from_str("[0, 2]").unwrap();
        assert_eq!(e, GammaSelector::Edges(vec![0, 2]));
        assert!(serde_json::from_str::<GammaSelector>("\"some\"").is_err());
    }
}
