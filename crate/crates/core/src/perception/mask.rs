use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A simple polygon in pixel coordinates. The closing edge is implicit; a
/// repeated first vertex at the end is accepted and dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let p = Polygon { vertices };
        p.validate()?;
        Ok(p)
    }

    pub fn rect(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(vec![[x, y], [x + w, y], [x + w, y + h], [x, y + h]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Rejects polygons with fewer than three vertices, zero area, or
    /// crossing edges.
    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return Err(Error::Geometry(format!("polygon has {n} vertices")));
        }
        if v.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("non-finite vertex".into()));
        }
        if polygon_area(v).abs() == 0.0 {
            return Err(Error::Geometry("polygon has zero area".into()));
        }
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (c, d) = (v[j], v[(j + 1) % n]);
                if adjacent {
                    // adjacent edges may only share their common vertex
                    if collinear_overlap(a, b, c, d) {
                        return Err(Error::Geometry("polygon folds back on itself".into()));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(Error::Geometry(format!("edges {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }

    fn bounds(&self) -> [f64; 4] {
        self.vertices.iter().fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |b, p| [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])],
        )
    }

    /// Even-odd point containment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let (xi, yi) = (v[i][0], v[i][1]);
            let (xj, yj) = (v[j][0], v[j][1]);
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

impl TryFrom<Vec<[f64; 2]>> for Polygon {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<[f64; 2]> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

/// Signed shoelace area (positive for counter-clockwise in a y-up frame).
pub fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

// Edges a→b and c→d share the vertex b == c; they overlap if d doubles back along a→b.
fn collinear_overlap(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (shared, p, q) = if b == c {
        (b, a, d)
    } else if a == d {
        (a, b, c)
    } else {
        return false;
    };
    if orient(p, shared, q) != 0.0 {
        return false;
    }
    let dot = (p[0] - shared[0]) * (q[0] - shared[0]) + (p[1] - shared[1]) * (q[1] - shared[1]);
    dot > 0.0
}

/// Mask IoU by rasterization: a cell of side `grid_px` belongs to a polygon
/// when its center does; IoU is taken over the two cell sets.
pub fn iou_masks(a: &Polygon, b: &Polygon, grid_px: f64) -> Result<f64> {
    if !(grid_px > 0.0 && grid_px.is_finite()) {
        return Err(Error::Geometry(format!("grid size {grid_px}")));
    }
    a.validate()?;
    b.validate()?;
    let (ba, bb) = (a.bounds(), b.bounds());
    let x0 = (ba[0].min(bb[0]) / grid_px).floor() as i64;
    let y0 = (ba[1].min(bb[1]) / grid_px).floor() as i64;
    let x1 = (ba[2].max(bb[2]) / grid_px).ceil() as i64;
    let y1 = (ba[3].max(bb[3]) / grid_px).ceil() as i64;
    let (mut inter, mut union) = (0u64, 0u64);
    for j in y0..y1 {
        let y = (j as f64 + 0.5) * grid_px;
        for i in x0..x1 {
            let x = (i as f64 + 0.5) * grid_px;
            match (a.contains(x, y), b.contains(x, y)) {
                (true, true) => {
                    inter += 1;
                    union += 1;
                }
                (true, false) | (false, true) => union += 1,
                _ => {}
            }
        }
    }
    if union == 0 {
        return Err(Error::Geometry("both masks vanish at this grid size".into()));
    }
    Ok(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bowtie_and_degenerates() {
        assert!(Polygon::new(vec![[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 1.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).is_err());
        // spike that retraces an edge
        assert!(Polygon::new(vec![[0.0, 0.0], [4.0, 0.0], [2.0, 0.0], [2.0, 3.0]]).is_err());
    }

    #[test]
    fn closing_vertex_is_optional() {
        let p = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert!((polygon_area(p.vertices()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_squares() {
        let a = Polygon::rect(10.0, 10.0, 20.0, 20.0).unwrap();
        assert_eq!(iou_masks(&a, &a, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_and_bad_grid() {
        let a = Polygon::rect(0.0, 0.0, 4.0, 4.0).unwrap();
        let b = Polygon::rect(10.0, 0.0, 4.0, 4.0).unwrap();
        assert_eq!(iou_masks(&a, &b, 1.0).unwrap(), 0.0);
        assert!(iou_masks(&a, &b, 0.0).is_err());
    }

    #[test]
    fn containment() {
        let tri = Polygon::new(vec![[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]]).unwrap();
        assert!(tri.contains(1.0, 1.0));
        assert!(!tri.contains(6.0, 6.0));
    }
}
