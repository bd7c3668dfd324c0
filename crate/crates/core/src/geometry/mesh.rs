use std::collections::{HashMap, HashSet};

use super::delaunay::{bowyer_watson, lawson_flip, orient};
use super::domain::ring_point;
use super::{
    cross, dist, dot, point_segment_distance, sub, DomainKind, DomainSpec, GammaSet,
    GeometryError, Point, Region, Segment,
};

/// A boundary facet: a mesh edge in 2D, a single node (stored twice) in 1D.
/// `tag` is the index of the boundary-walk edge it lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub nodes: [usize; 2],
    pub tag: usize,
}

/// Per-cell data used by every assembly loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    /// Length in 1D, area in 2D.
    pub measure: f64,
    pub barycenter: Point,
    /// Gradients of the local hat functions; only the first `dim + 1` are used.
    pub grads: [Point; 3],
}

/// A simplicial mesh of Ω with boundary tagging and the Γ node set.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub nodes: Vec<Point>,
    cells: Vec<usize>,
    pub geometry: Vec<CellGeometry>,
    pub facets: Vec<BoundaryFacet>,
    /// `true` at nodes on ∂Ω.
    pub boundary: Vec<bool>,
    /// `true` at nodes on Γ.
    pub gamma: Vec<bool>,
    /// Boundary walk of the domain (Ω on the left of every edge).
    pub walk: Vec<Segment>,
    /// Walk indices that make up Γ.
    pub gamma_edges: Vec<usize>,
    pub h: f64,
    /// All triangle angles are at most π/2 (always true in 1D).
    pub nonobtuse: bool,
    pub diameter: f64,
    node_cells: Vec<Vec<usize>>,
}

impl Mesh {
    /// Assembles a mesh from raw simplices and tags the boundary against `walk`.
    /// Cells are reoriented counter-clockwise.
    pub fn from_cells(
        dim: usize,
        nodes: Vec<Point>,
        mut cells: Vec<usize>,
        walk: Vec<Segment>,
        gamma_edges: Vec<usize>,
        h: f64,
    ) -> Result<Self, GeometryError> {
        let stride = dim + 1;
        assert_eq!(cells.len() % stride, 0);
        let mut geometry = Vec::with_capacity(cells.len() / stride);
        for c in cells.chunks_mut(stride) {
            let g = if dim == 1 {
                let (a, b) = (nodes[c[0]][0], nodes[c[1]][0]);
                if b < a {
                    c.swap(0, 1);
                }
                let len = (b - a).abs();
                if len <= 0.0 {
                    return Err(GeometryError::MeshingFailure(format!(
                        "zero-length segment between nodes {} and {}",
                        c[0], c[1]
                    )));
                }
                CellGeometry {
                    measure: len,
                    barycenter: [0.5 * (a + b), 0.0],
                    grads: [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]],
                }
            } else {
                if orient(nodes[c[0]], nodes[c[1]], nodes[c[2]]) < 0.0 {
                    c.swap(1, 2);
                }
                triangle_geometry([nodes[c[0]], nodes[c[1]], nodes[c[2]]]).ok_or_else(|| {
                    GeometryError::MeshingFailure(format!(
                        "degenerate triangle ({}, {}, {})",
                        c[0], c[1], c[2]
                    ))
                })?
            };
            geometry.push(g);
        }

        let mut node_cells = vec![Vec::new(); nodes.len()];
        for (t, c) in cells.chunks(stride).enumerate() {
            for &v in c {
                node_cells[v].push(t);
            }
        }
        if let Some(orphan) = node_cells.iter().position(|c| c.is_empty()) {
            return Err(GeometryError::MeshingFailure(format!(
                "node {orphan} belongs to no cell"
            )));
        }

        let scale = walk
            .iter()
            .flat_map(|s| s.iter())
            .map(|p| p[0].abs().max(p[1].abs()))
            .fold(1e-300, f64::max);
        let on_tol = 1e-9 * scale;
        let mut facets = Vec::new();
        if dim == 1 {
            for (tag, s) in walk.iter().enumerate() {
                let v = (0..nodes.len())
                    .min_by(|&a, &b| dist(nodes[a], s[0]).total_cmp(&dist(nodes[b], s[0])))
                    .filter(|&v| dist(nodes[v], s[0]) <= on_tol)
                    .ok_or_else(|| {
                        GeometryError::MeshingFailure(format!("no node at boundary point {tag}"))
                    })?;
                facets.push(BoundaryFacet { nodes: [v, v], tag });
            }
        } else {
            let mut count: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
            for (t, c) in cells.chunks(3).enumerate() {
                for k in 0..3 {
                    let (a, b) = (c[k], c[(k + 1) % 3]);
                    let e = count.entry((a.min(b), a.max(b))).or_insert((0, t));
                    e.0 += 1;
                }
            }
            let mut edges: Vec<_> = count
                .into_iter()
                .filter(|(_, (n, _))| *n == 1)
                .map(|(e, (_, t))| (e, t))
                .collect();
            edges.sort_unstable();
            for ((a, b), t) in edges {
                let (pa, pb) = (nodes[a], nodes[b]);
                let centroid = geometry[t].barycenter;
                let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                let tag = walk.iter().position(|s| {
                    let d = sub(s[1], s[0]);
                    let inward = [-d[1], d[0]];
                    point_segment_distance(pa, s) <= on_tol
                        && point_segment_distance(pb, s) <= on_tol
                        && dot(inward, sub(centroid, mid)) > 0.0
                });
                let tag = tag.ok_or_else(|| {
                    GeometryError::MeshingFailure(format!(
                        "boundary edge ({a}, {b}) from {pa:?} to {pb:?} lies on no boundary segment"
                    ))
                })?;
                facets.push(BoundaryFacet { nodes: [a, b], tag });
            }
        }

        let mut boundary = vec![false; nodes.len()];
        let mut gamma = vec![false; nodes.len()];
        let gamma_tags: HashSet<usize> = gamma_edges.iter().copied().collect();
        for f in &facets {
            for &v in &f.nodes {
                boundary[v] = true;
                if gamma_tags.contains(&f.tag) {
                    gamma[v] = true;
                }
            }
        }

        let nonobtuse = dim == 1
            || cells.chunks(3).all(|c| {
                (0..3).all(|k| {
                    let p = nodes[c[k]];
                    let u = sub(nodes[c[(k + 1) % 3]], p);
                    let v = sub(nodes[c[(k + 2) % 3]], p);
                    dot(u, v) >= -1e-9 * (dot(u, u) * dot(v, v)).sqrt()
                })
            });

        let mut diameter: f64 = 0.0;
        for s in &walk {
            for t in &walk {
                diameter = diameter.max(dist(s[0], t[0]));
            }
        }

        Ok(Self {
            dim,
            nodes,
            cells,
            geometry,
            facets,
            boundary,
            gamma,
            walk,
            gamma_edges,
            h,
            nonobtuse,
            diameter,
            node_cells,
        })
    }

    /// 1D mesh on the given strictly increasing node coordinates.
    pub fn interval_from_nodes(xs: &[f64], gamma_edges: Vec<usize>) -> Result<Self, GeometryError> {
        if xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::DegenerateDomain(
                "interval nodes must be strictly increasing".into(),
            ));
        }
        let nodes: Vec<Point> = xs.iter().map(|&x| [x, 0.0]).collect();
        let cells: Vec<usize> = (0..xs.len() - 1).flat_map(|i| [i, i + 1]).collect();
        let (a, b) = (xs[0], xs[xs.len() - 1]);
        let h = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Self::from_cells(1, nodes, cells, vec![[[a, 0.0]; 2], [[b, 0.0]; 2]], gamma_edges, h)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.geometry.len()
    }

    pub fn cell(&self, t: usize) -> &[usize] {
        let s = self.dim + 1;
        &self.cells[t * s..(t + 1) * s]
    }

    /// Cells containing node `i`.
    pub fn star(&self, i: usize) -> &[usize] {
        &self.node_cells[i]
    }

    pub fn gamma_set(&self) -> GammaSet {
        GammaSet::new(self.gamma_edges.iter().map(|&e| self.walk[e]).collect())
    }

    /// Sorted unique node pairs joined by a mesh edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for t in 0..self.n_cells() {
            let c = self.cell(t);
            for a in 0..c.len() {
                for b in (a + 1)..c.len() {
                    out.push((c[a].min(c[b]), c[a].max(c[b])));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Node adjacency lists through mesh edges.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes()];
        for (a, b) in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .into_iter()
            .map(|(a, b)| dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Total measure of the mesh.
    pub fn measure(&self) -> f64 {
        self.geometry.iter().map(|g| g.measure).sum()
    }

    /// Writes the node table `id,x,y,boundary,gamma` as CSV.
    pub fn nodes_csv(&self) -> String {
        let mut s = String::from("id,x,y,boundary,gamma\n");
        for (i, p) in self.nodes.iter().enumerate() {
            s.push_str(&format!(
                "{i},{},{},{},{}\n",
                p[0], p[1], self.boundary[i] as u8, self.gamma[i] as u8
            ));
        }
        s
    }

    /// Writes the cell table `id,v0,v1[,v2]` as CSV.
    pub fn cells_csv(&self) -> String {
        let mut s = String::from(if self.dim == 1 { "id,v0,v1\n" } else { "id,v0,v1,v2\n" });
        for t in 0..self.n_cells() {
            let c: Vec<String> = self.cell(t).iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("{t},{}\n", c.join(",")));
        }
        s
    }
}

fn triangle_geometry(p: [Point; 3]) -> Option<CellGeometry> {
    let area2 = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let scale = dot(sub(p[1], p[0]), sub(p[1], p[0])).max(dot(sub(p[2], p[0]), sub(p[2], p[0])));
    if area2 <= 1e-14 * scale {
        return None;
    }
    let mut grads = [[0.0; 2]; 3];
    for (i, g) in grads.iter_mut().enumerate() {
        let e = sub(p[(i + 2) % 3], p[(i + 1) % 3]);
        *g = [-e[1] / area2, e[0] / area2];
    }
    Some(CellGeometry {
        measure: 0.5 * area2,
        barycenter: [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ],
        grads,
    })
}

/// Subdivision of `[a, b]` into `n` equal parts with coordinates computed as
/// `a + (b − a)·i/n`, so nested refinements share bit-identical nodes.
fn subdivide(a: f64, b: f64, h: f64) -> Vec<f64> {
    let n = (((b - a) / h) - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * (i as f64) / (n as f64)).collect()
}

/// Grid lines through every vertex coordinate, refined to spacing ≤ h.
fn grid_lines(coords: impl Iterator<Item = f64>, h: f64) -> Vec<f64> {
    let mut c: Vec<f64> = coords.collect();
    c.sort_by(f64::total_cmp);
    c.dedup();
    let mut out = vec![c[0]];
    for w in c.windows(2) {
        out.extend(subdivide(w[0], w[1], h).into_iter().skip(1));
    }
    out
}

/// Right-triangle mesh of a polygon whose edges are all axis-parallel.
fn rectilinear_mesh(
    vertices: &[Point],
    walk: Vec<Segment>,
    gamma_edges: Vec<usize>,
    h: f64,
    region: &dyn Region,
) -> Result<Mesh, GeometryError> {
    let xs = grid_lines(vertices.iter().map(|v| v[0]), h);
    let ys = grid_lines(vertices.iter().map(|v| v[1]), h);
    let (nx, ny) = (xs.len(), ys.len());
    let mut id = vec![usize::MAX; nx * ny];
    let mut nodes = Vec::new();
    let mut cells = Vec::new();
    let mut node = |i: usize, j: usize, nodes: &mut Vec<Point>| {
        let k = j * nx + i;
        if id[k] == usize::MAX {
            id[k] = nodes.len();
            nodes.push([xs[i], ys[j]]);
        }
        id[k]
    };
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            if !region.contains(c) {
                continue;
            }
            let a = node(i, j, &mut nodes);
            let b = node(i + 1, j, &mut nodes);
            let cc = node(i + 1, j + 1, &mut nodes);
            let d = node(i, j + 1, &mut nodes);
            cells.extend([a, b, cc, a, cc, d]);
        }
    }
    Mesh::from_cells(2, nodes, cells, walk, gamma_edges, h)
}

/// Structured mesh of the slit square, with the nodes on the slit duplicated
/// so the two faces are separate boundary pieces. The slit tip is shared.
fn slit_mesh(s: f64, walk: Vec<Segment>, gamma_edges: Vec<usize>, h: f64) -> Result<Mesh, GeometryError> {
    let mut n = ((s / h) - 1e-9).ceil().max(2.0) as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let m = n / 2;
    let coord = |i: usize| s * (i as f64) / (n as f64);
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1) + m);
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([coord(i), coord(j)]);
        }
    }
    let mut upper = vec![usize::MAX; n + 1];
    for (i, u) in upper.iter_mut().enumerate().skip(m + 1) {
        *u = nodes.len();
        nodes.push([coord(i), coord(m)]);
    }
    let id = |i: usize, j: usize, above: bool| {
        if above && j == m && i > m {
            upper[i]
        } else {
            j * (n + 1) + i
        }
    };
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        let above = j >= m;
        for i in 0..n {
            let a = id(i, j, above);
            let b = id(i + 1, j, above);
            let c = id(i + 1, j + 1, above);
            let d = id(i, j + 1, above);
            cells.extend([a, b, c, a, c, d]);
        }
    }
    Mesh::from_cells(2, nodes, cells, walk, gamma_edges, h)
}

/// Concentric-ring mesh of a disk: ring `i` has radius `i·R/N` and `6i`
/// equally spaced nodes, so angle 0 and π are nodes on every ring.
pub(crate) fn disk_mesh(
    center: Point,
    radius: f64,
    rings: usize,
    walk: Vec<Segment>,
    gamma_edges: Vec<usize>,
    h: f64,
) -> Result<Mesh, GeometryError> {
    let mut nodes = vec![center];
    let mut start = vec![0usize];
    for i in 1..=rings {
        start.push(nodes.len());
        let r = radius * (i as f64) / (rings as f64);
        for j in 0..6 * i {
            nodes.push(ring_point(center, r, j, 6 * i));
        }
    }
    let mut cells = Vec::new();
    for j in 0..6 {
        cells.extend([0, start[1] + j, start[1] + (j + 1) % 6]);
    }
    for i in 2..=rings {
        let (ni, no) = (6 * (i - 1), 6 * i);
        let inner = |j: usize| start[i - 1] + j % ni;
        let outer = |j: usize| start[i] + j % no;
        let (mut a, mut b) = (0usize, 0usize);
        // Merge the two rings by angle: advance whichever ring's next node
        // comes first (ties go to the outer ring).
        while a < ni || b < no {
            let ta = (a + 1) as f64 / ni as f64;
            let tb = (b + 1) as f64 / no as f64;
            if b < no && (a >= ni || tb <= ta) {
                cells.extend([inner(a), outer(b), outer(b + 1)]);
                b += 1;
            } else {
                cells.extend([inner(a), outer(b), inner(a + 1)]);
                a += 1;
            }
        }
    }
    let mut tris: Vec<[usize; 3]> = cells.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    for t in tris.iter_mut() {
        if orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }
    lawson_flip(&nodes, &mut tris, &[]);
    let cells = tris.into_iter().flatten().collect();
    Mesh::from_cells(2, nodes, cells, walk, gamma_edges, h)
}

/// Unstructured Delaunay mesh of a general simple polygon.
fn polygon_mesh(
    spec: &DomainSpec,
    walk: Vec<Segment>,
    gamma_edges: Vec<usize>,
    h: f64,
) -> Result<Mesh, GeometryError> {
    let mut pts: Vec<Point> = Vec::new();
    let mut constraints = Vec::new();
    for s in &walk {
        let len = dist(s[0], s[1]);
        let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
        let first = pts.len();
        for i in 0..n {
            let t = i as f64 / n as f64;
            pts.push([s[0][0] + t * (s[1][0] - s[0][0]), s[0][1] + t * (s[1][1] - s[0][1])]);
        }
        for i in 0..n {
            constraints.push((first + i, first + i + 1));
        }
    }
    if let Some(last) = constraints.last_mut() {
        last.1 = 0;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((hi[1] - lo[1]) / dy).ceil() as usize;
    let cols = ((hi[0] - lo[0]) / h).ceil() as usize + 1;
    for r in 0..=rows {
        let y = lo[1] + r as f64 * dy;
        let shift = if r % 2 == 1 { 0.5 * h } else { 0.0 };
        for c in 0..=cols {
            let p = [lo[0] + shift + c as f64 * h, y];
            if spec.contains(p) && spec.boundary_distance(p, h) >= 0.5 * h {
                pts.push(p);
            }
        }
    }
    let mut tris = bowyer_watson(&pts);
    tris.retain(|t| {
        let c = [
            (pts[t[0]][0] + pts[t[1]][0] + pts[t[2]][0]) / 3.0,
            (pts[t[0]][1] + pts[t[1]][1] + pts[t[2]][1]) / 3.0,
        ];
        spec.contains(c)
    });
    let present: HashSet<(usize, usize)> = tris
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .collect();
    for &(a, b) in &constraints {
        if !present.contains(&(a.min(b), a.max(b))) {
            return Err(GeometryError::MeshingFailure(format!(
                "boundary conformity: segment from {:?} to {:?} is not a mesh edge",
                pts[a], pts[b]
            )));
        }
    }
    lawson_flip(&pts, &mut tris, &constraints);
    // Drop lattice points that ended up in no triangle.
    let mut used = vec![false; pts.len()];
    for t in &tris {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; pts.len()];
    let mut nodes = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if used[i] {
            remap[i] = nodes.len();
            nodes.push(*p);
        }
    }
    let cells = tris.iter().flat_map(|t| t.map(|v| remap[v])).collect();
    Mesh::from_cells(2, nodes, cells, walk, gamma_edges, h)
}

fn is_rectilinear(vertices: &[Point]) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        a[0] == b[0] || a[1] == b[1]
    })
}

/// Meshes the domain with target size `h`.
pub fn build_mesh(spec: &DomainSpec, h: f64) -> Result<Mesh, GeometryError> {
    spec.validate()?;
    let diam = spec.diameter();
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeometryError::InvalidMeshSize { h, reason: "must be positive".into() });
    }
    if h >= diam / 4.0 {
        return Err(GeometryError::InvalidMeshSize {
            h,
            reason: format!("must be below diam/4 = {}", diam / 4.0),
        });
    }
    let walk = spec.walk(h);
    let gamma_edges = spec.gamma_edges(h);
    if let Some(&index) = gamma_edges.iter().find(|&&e| e >= walk.len()) {
        return Err(GeometryError::GammaOutOfRange { index, count: walk.len() });
    }
    let mesh = match &spec.kind {
        DomainKind::Interval { a, b } => {
            let xs = subdivide(*a, *b, h);
            let mut m = Mesh::interval_from_nodes(&xs, gamma_edges)?;
            m.h = h;
            m
        }
        DomainKind::Polygon { vertices } if is_rectilinear(vertices) => {
            rectilinear_mesh(vertices, walk, gamma_edges, h, spec)?
        }
        DomainKind::LShape { size } => {
            rectilinear_mesh(&super::domain::l_shape_vertices(*size), walk, gamma_edges, h, spec)?
        }
        DomainKind::Polygon { .. } => polygon_mesh(spec, walk, gamma_edges, h)?,
        DomainKind::SlitSquare { size } => slit_mesh(*size, walk, gamma_edges, h)?,
        DomainKind::Disk { center, radius } => {
            let rings = DomainSpec::disk_rings(*radius, h);
            disk_mesh(*center, *radius, rings, walk, gamma_edges, h)?
        }
    };
    let longest = mesh.max_edge_length();
    if longest > 2.0 * h * (1.0 + 1e-12) {
        return Err(GeometryError::MeshingFailure(format!(
            "edge length bound: longest edge {longest} exceeds 2h = {}",
            2.0 * h
        )));
    }
    Ok(mesh)
}
