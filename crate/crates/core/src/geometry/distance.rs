use super::{dist, dot, sub, GeometryError, Mesh, Point, Segment};

/// Euclidean distance from `x` to the closed segment `s`.
pub fn point_segment_distance(x: Point, s: &Segment) -> f64 {
    let d = sub(s[1], s[0]);
    let len2 = dot(d, d);
    if len2 == 0.0 {
        return dist(x, s[0]);
    }
    let t = (dot(sub(x, s[0]), d) / len2).clamp(0.0, 1.0);
    let c = [s[0][0] + t * d[0], s[0][1] + t * d[1]];
    dist(x, c)
}

/// The distinguished boundary part as a union of closed segments.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSet {
    pub segments: Vec<Segment>,
}

impl GammaSet {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn distance(&self, x: Point) -> f64 {
        self.segments
            .iter()
            .map(|s| point_segment_distance(x, s))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| dist(s[0], s[1])).sum()
    }

    /// Points along Γ with consecutive spacing at most `spacing`, segment
    /// endpoints included. Degenerate segments contribute their point once.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for s in &self.segments {
            let len = dist(s[0], s[1]);
            let n = if len == 0.0 { 0 } else { (len / spacing).ceil().max(1.0) as usize };
            for i in 0..=n {
                let p = if n == 0 {
                    s[0]
                } else {
                    let t = i as f64 / n as f64;
                    [s[0][0] + t * (s[1][0] - s[0][0]), s[0][1] + t * (s[1][1] - s[0][1])]
                };
                if !out.iter().rev().take(2).any(|q| *q == p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// `n` points spread by arclength over Γ, both ends of the walk included.
    pub fn arclength_points(&self, n: usize) -> Vec<Point> {
        let total = self.length();
        if total == 0.0 || n <= 1 {
            return self.segments.iter().map(|s| s[0]).take(n.max(1)).collect();
        }
        (0..n)
            .map(|i| {
                let mut target = total * i as f64 / (n - 1) as f64;
                for s in &self.segments {
                    let len = dist(s[0], s[1]);
                    if target <= len || std::ptr::eq(s, self.segments.last().unwrap()) {
                        let t = if len == 0.0 { 0.0 } else { (target / len).min(1.0) };
                        return [s[0][0] + t * (s[1][0] - s[0][0]), s[0][1] + t * (s[1][1] - s[0][1])];
                    }
                    target -= len;
                }
                unreachable!()
            })
            .collect()
    }
}

/// Nodal values of the distance to Γ.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub values: Vec<f64>,
}

impl DistanceField {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Exact distance from each node to Γ; Γ nodes get exactly zero.
pub fn distance_field(mesh: &Mesh) -> Result<DistanceField, GeometryError> {
    let gamma = mesh.gamma_set();
    if gamma.is_empty() {
        return Err(GeometryError::EmptyGamma);
    }
    let values = mesh
        .nodes
        .iter()
        .zip(&mesh.gamma)
        .map(|(&x, &on)| if on { 0.0 } else { gamma.distance(x) })
        .collect();
    Ok(DistanceField { values })
}
