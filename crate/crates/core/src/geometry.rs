//! Bounding regions used to prune the search space around a failed segment.
//!
//! All membership tests are inclusive of the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SkywayError};
use crate::network::{NodeIx, NodeSet, Point, SkywayNetwork};

/// Angular slack for half-plane tests, relative to the operand magnitudes.
const SIDE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Point) -> bool {
        p.dist(self.center) <= self.radius
    }
}

/// Circle centered on the midpoint of `a`-`b`.
pub fn build_circle(a: Point, b: Point, radius: f64) -> Result<Circle> {
    if !(radius > 0.0) {
        return Err(SkywayError::InvalidParams("circle radius must be positive".into()));
    }
    Ok(Circle {
        center: a.midpoint(b),
        radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Density {
    Sparse,
    Average,
    Dense,
}

impl Density {
    /// Half-width multiplier for partial bounding areas.
    pub fn multiplier(self) -> f64 {
        match self {
            Density::Dense => 1.0,
            Density::Average => 2.0,
            Density::Sparse => 3.0,
        }
    }
}

/// Node-count grid over the network bounding box, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub cell_size: f64,
    pub origin: Point,
    pub rows: usize,
    pub cols: usize,
    pub counts: Vec<usize>,
    pub classes: Vec<Density>,
    pub co: usize,
    /// Node indices grouped by cell: cell `k` owns
    /// `cell_nodes[cell_start[k]..cell_start[k + 1]]`. Empty for grids built
    /// from bare counts.
    #[serde(skip)]
    cell_start: Vec<usize>,
    #[serde(skip)]
    cell_nodes: Vec<NodeIx>,
}

impl CellGrid {
    /// Grid from precomputed counts; classes derived by [`classify_cells`].
    pub fn from_counts(origin: Point, cell_size: f64, rows: usize, cols: usize, counts: Vec<usize>) -> Self {
        assert_eq!(counts.len(), rows * cols, "counts must be rows * cols");
        let (co, classes) = classify_cells(&counts);
        Self {
            cell_size,
            origin,
            rows,
            cols,
            counts,
            classes,
            co,
            cell_start: Vec::new(),
            cell_nodes: Vec::new(),
        }
    }

    /// `(row, col)` of the cell holding `p`, clamped to the grid.
    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let clamp = |v: f64, n: usize| ((v / self.cell_size).floor().max(0.0) as usize).min(n - 1);
        (
            clamp(p.y - self.origin.y, self.rows),
            clamp(p.x - self.origin.x, self.cols),
        )
    }

    pub fn class_at(&self, p: Point) -> Density {
        let (r, c) = self.cell_of(p);
        self.classes[r * self.cols + c]
    }

    pub fn count(&self, row: usize, col: usize) -> usize {
        self.counts[row * self.cols + col]
    }

    /// Inserts every node of `net` lying in one of `squares`, visiting only
    /// the cells the squares overlap.
    pub fn collect_in_squares(&self, net: &SkywayNetwork, squares: &[Square], into: &mut NodeSet) {
        if self.cell_start.is_empty() {
            for ix in 0..net.node_count() {
                if squares.iter().any(|s| s.contains(net.point(ix))) {
                    into.insert(ix);
                }
            }
            into.normalize();
            return;
        }
        for sq in squares {
            let h = sq.half_width;
            let (r0, c0) = self.cell_of(Point::new(sq.center.x - h, sq.center.y - h));
            let (r1, c1) = self.cell_of(Point::new(sq.center.x + h, sq.center.y + h));
            for r in r0..=r1 {
                for c in c0..=c1 {
                    let k = r * self.cols + c;
                    for &ix in &self.cell_nodes[self.cell_start[k]..self.cell_start[k + 1]] {
                        if !into.contains(ix) && sq.contains(net.point(ix)) {
                            into.insert(ix);
                        }
                    }
                }
            }
        }
        into.normalize();
    }
}

/// Spread `co = max - min` and the per-cell classes on the half-open thirds
/// `[0, co/3)`, `[co/3, 2co/3)`, `[2co/3, inf)`. A zero spread makes every
/// cell dense.
pub fn classify_cells(counts: &[usize]) -> (usize, Vec<Density>) {
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    let co = max - min;
    let lo = co as f64 / 3.0;
    let hi = 2.0 * co as f64 / 3.0;
    let classes = counts
        .iter()
        .map(|&n| {
            let n = n as f64;
            if n < lo {
                Density::Sparse
            } else if n < hi {
                Density::Average
            } else {
                Density::Dense
            }
        })
        .collect();
    (co, classes)
}

pub fn build_cell_grid(net: &SkywayNetwork, cell_size: f64) -> Result<CellGrid> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(SkywayError::InvalidParams("cell size must be positive".into()));
    }
    let bbox = net.bbox();
    let rows = ((bbox.height() / cell_size).ceil() as usize).max(1);
    let cols = ((bbox.width() / cell_size).ceil() as usize).max(1);
    let mut grid = CellGrid {
        cell_size,
        origin: Point::new(bbox.min_x, bbox.min_y),
        rows,
        cols,
        counts: vec![0; rows * cols],
        classes: Vec::new(),
        co: 0,
        cell_start: Vec::new(),
        cell_nodes: Vec::new(),
    };
    let cells: Vec<usize> = net
        .nodes()
        .iter()
        .map(|n| {
            let (r, c) = grid.cell_of(n.point());
            r * cols + c
        })
        .collect();
    for &k in &cells {
        grid.counts[k] += 1;
    }
    // counting sort of node indices by cell
    let mut start = Vec::with_capacity(rows * cols + 1);
    start.push(0);
    for &n in &grid.counts {
        start.push(start.last().unwrap() + n);
    }
    let mut fill = start.clone();
    let mut nodes = vec![0; cells.len()];
    for (ix, &k) in cells.iter().enumerate() {
        nodes[fill[k]] = ix;
        fill[k] += 1;
    }
    grid.cell_start = start;
    grid.cell_nodes = nodes;
    let (co, classes) = classify_cells(&grid.counts);
    grid.co = co;
    grid.classes = classes;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub center: Point,
    pub half_width: f64,
}

impl Square {
    pub fn contains(&self, p: Point) -> bool {
        (p.x - self.center.x).abs() <= self.half_width && (p.y - self.center.y).abs() <= self.half_width
    }
}

/// One square per seed node, half-width `multiplier(class) * do_size`.
pub fn build_partial_areas(seeds: &[Point], grid: &CellGrid, do_size: f64) -> Result<Region> {
    if !(do_size > 0.0) {
        return Err(SkywayError::InvalidParams("DO must be positive".into()));
    }
    if seeds.is_empty() {
        return Err(SkywayError::InvalidParams("no seed nodes for partial areas".into()));
    }
    let squares = seeds
        .iter()
        .map(|&p| Square {
            center: p,
            half_width: grid.class_at(p).multiplier() * do_size,
        })
        .collect();
    Ok(Region::Squares { squares })
}

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Accepts either orientation; drops collinear and repeated vertices.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let mut vs = vertices;
        if signed_area(&vs) < 0.0 {
            vs.reverse();
        }
        let mut changed = true;
        while changed && vs.len() >= 3 {
            changed = false;
            for i in 0..vs.len() {
                let n = vs.len();
                let prev = vs[(i + n - 1) % n];
                let next = vs[(i + 1) % n];
                let d1 = vs[i].sub(prev);
                let d2 = next.sub(vs[i]);
                let scale = d1.norm() * d2.norm();
                if scale == 0.0 || d1.cross(d2).abs() <= SIDE_RTOL * scale && d1.dot(d2) >= 0.0 {
                    vs.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        if vs.len() < 3 {
            return Err(SkywayError::Degenerate);
        }
        let n = vs.len();
        for i in 0..n {
            let d1 = vs[(i + 1) % n].sub(vs[i]);
            let d2 = vs[(i + 2) % n].sub(vs[(i + 1) % n]);
            if d1.cross(d2) <= 0.0 {
                return Err(SkywayError::InvalidParams("polygon is not strictly convex".into()));
            }
        }
        Ok(Self { vertices: vs })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn contains(&self, p: Point) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let e = self.vertices[(i + 1) % n].sub(a);
            let d = p.sub(a);
            e.cross(d) >= -SIDE_RTOL * e.norm() * d.norm()
        })
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }
}

/// Shoelace formula; positive for counterclockwise order.
pub fn signed_area(vs: &[Point]) -> f64 {
    let n = vs.len();
    0.5 * (0..n).map(|i| vs[i].cross(vs[(i + 1) % n])).sum::<f64>()
}

/// Which side of the line through the failed segment (positive = left of `a -> b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

/// Frame aligned with the segment `a -> b`: `s` runs along it from `a`,
/// `t` is the signed perpendicular offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corridor {
    pub a: Point,
    pub b: Point,
    pub half_width: f64,
    axis: Point,
    normal: Point,
    length: f64,
}

impl Corridor {
    pub fn new(a: Point, b: Point, half_width: f64) -> Result<Self> {
        let d = b.sub(a);
        let length = d.norm();
        if length == 0.0 {
            return Err(SkywayError::Degenerate);
        }
        if !(half_width > 0.0) {
            return Err(SkywayError::InvalidParams("corridor offset must be positive".into()));
        }
        let axis = d.scale(1.0 / length);
        Ok(Self {
            a,
            b,
            half_width,
            axis,
            normal: Point::new(-axis.y, axis.x),
            length,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn to_local(&self, p: Point) -> (f64, f64) {
        let d = p.sub(self.a);
        (d.dot(self.axis), d.dot(self.normal))
    }

    fn world_at(&self, s: f64, t: f64) -> Point {
        self.a.add(self.axis.scale(s)).add(self.normal.scale(t))
    }

    /// Strict side of the segment line; `None` on the line.
    pub fn side_of(&self, p: Point) -> Option<Side> {
        let (_, t) = self.to_local(p);
        if t > 0.0 {
            Some(Side::Positive)
        } else if t < 0.0 {
            Some(Side::Negative)
        } else {
            None
        }
    }

    /// Bounded by the two parallels at `±half_width` and the perpendiculars through `a` and `b`.
    pub fn rectangle(&self) -> ConvexPolygon {
        let (l, w) = (self.length, self.half_width);
        self.polygon(&[(0.0, -w), (l, -w), (l, w), (0.0, w)])
    }

    /// Joins the midpoints of the rectangle's sides; `a` and `b` are vertices.
    pub fn rhombus(&self) -> ConvexPolygon {
        let (l, w) = (self.length, self.half_width);
        self.polygon(&[(0.0, 0.0), (0.5 * l, -w), (l, 0.0), (0.5 * l, w)])
    }

    /// Half of the rhombus on the given side of the segment line.
    pub fn triangle(&self, side: Side) -> ConvexPolygon {
        let (l, w) = (self.length, self.half_width);
        let t = match side {
            Side::Positive => w,
            Side::Negative => -w,
        };
        self.polygon(&[(0.0, 0.0), (l, 0.0), (0.5 * l, t)])
    }

    fn polygon(&self, local: &[(f64, f64)]) -> ConvexPolygon {
        let mut vs: Vec<Point> = local.iter().map(|&(s, t)| self.world_at(s, t)).collect();
        // pin the segment endpoints exactly
        for v in &mut vs {
            if v.dist(self.a) < 1e-12 * self.length {
                *v = self.a;
            } else if v.dist(self.b) < 1e-12 * self.length {
                *v = self.b;
            }
        }
        ConvexPolygon::new(vs).expect("corridor polygons are convex by construction")
    }
}

/// The three nested two-phase regions around a failed segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhombusRegions {
    pub rectangle: ConvexPolygon,
    pub rhombus: ConvexPolygon,
    pub triangle: ConvexPolygon,
    pub side: Side,
    /// Nodes of the rectangle on each (closed) side of the segment line.
    pub positive_count: usize,
    pub negative_count: usize,
}

/// Builds rectangle, midpoint rhombus and the triangle on the half of the
/// rectangle holding more nodes of `net`.
///
/// Ties go to the half holding the smaller node id among the nodes exclusive
/// to a half, then to the positive side.
pub fn build_rhombus_regions(net: &SkywayNetwork, a: Point, b: Point, half_width: f64) -> Result<RhombusRegions> {
    let corridor = Corridor::new(a, b, half_width)?;
    let rectangle = corridor.rectangle();
    let mut pos = 0;
    let mut neg = 0;
    let mut first_pos: Option<u64> = None;
    let mut first_neg: Option<u64> = None;
    for n in net.nodes() {
        let p = n.point();
        if !rectangle.contains(p) {
            continue;
        }
        match corridor.side_of(p) {
            Some(Side::Positive) => {
                pos += 1;
                first_pos = Some(first_pos.map_or(n.id, |f| f.min(n.id)));
            }
            Some(Side::Negative) => {
                neg += 1;
                first_neg = Some(first_neg.map_or(n.id, |f| f.min(n.id)));
            }
            None => {}
        }
    }
    let side = if pos != neg {
        if pos > neg {
            Side::Positive
        } else {
            Side::Negative
        }
    } else {
        match (first_pos, first_neg) {
            (Some(p), Some(q)) if q < p => Side::Negative,
            _ => Side::Positive,
        }
    };
    // nodes on the line belong to both halves
    let on_line = net
        .nodes()
        .iter()
        .filter(|n| rectangle.contains(n.point()) && corridor.side_of(n.point()).is_none())
        .count();
    Ok(RhombusRegions {
        rhombus: corridor.rhombus(),
        triangle: corridor.triangle(side),
        rectangle,
        side,
        positive_count: pos + on_line,
        negative_count: neg + on_line,
    })
}

/// A search-space bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    Circle(Circle),
    Squares { squares: Vec<Square> },
    Polygon(ConvexPolygon),
    /// A region plus extra nodes admitted by nearest-neighbor growth.
    Grown { base: Box<Region>, nodes: Vec<NodeIx>, points: Vec<Point> },
    All,
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Circle(c) => c.contains(p),
            Region::Squares { squares } => squares.iter().any(|s| s.contains(p)),
            Region::Polygon(poly) => poly.contains(p),
            Region::Grown { base, points, .. } => base.contains(p) || points.contains(&p),
            Region::All => true,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Region::Circle(_) => "circle",
            Region::Squares { .. } => "squares",
            Region::Polygon(_) => "polygon",
            Region::Grown { .. } => "grown",
            Region::All => "all",
        }
    }
}

/// Nodes whose coordinates satisfy the region's membership test, ascending.
pub fn nodes_in_region(net: &SkywayNetwork, region: &Region) -> Vec<NodeIx> {
    match region {
        Region::All => (0..net.node_count()).collect(),
        Region::Grown { base, nodes, .. } => {
            let mut out = nodes_in_region(net, base);
            out.extend(nodes.iter().copied());
            out.sort_unstable();
            out.dedup();
            out
        }
        _ => (0..net.node_count())
            .filter(|&ix| region.contains(net.point(ix)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::net5;
    use crate::network::Node;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn circle_membership() {
        let c = build_circle(p(0.0, 0.0), p(10.0, 0.0), 10.0).unwrap();
        assert_eq!(c.center, p(5.0, 0.0));
        assert!(c.contains(p(5.0, 4.0)));
        assert!(!c.contains(p(20.0, 20.0)));
        // boundary is inclusive: (5,0) -> (8,4) is exactly 5
        let c5 = build_circle(p(5.0, 0.0), p(5.0, 0.0), 5.0).unwrap();
        assert!(c5.contains(p(8.0, 4.0)));
        assert!(c5.contains(p(5.0, 0.0)));
        assert!(build_circle(p(0.0, 0.0), p(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn thirds_rule() {
        let (co, classes) = classify_cells(&[0, 1, 2, 3, 4, 5, 6, 6, 0]);
        assert_eq!(co, 6);
        use Density::*;
        assert_eq!(
            classes,
            vec![Sparse, Sparse, Average, Average, Dense, Dense, Dense, Dense, Sparse]
        );
        let (co, classes) = classify_cells(&[4, 4, 4, 4]);
        assert_eq!(co, 0);
        assert!(classes.iter().all(|&c| c == Dense));
    }

    #[test]
    fn grid_counts_partition_nodes() {
        let net = net5();
        let grid = build_cell_grid(&net, 10.0).unwrap();
        // bbox 20 x 26 -> 3 rows, 2 cols
        assert_eq!((grid.rows, grid.cols), (3, 2));
        assert_eq!(grid.counts.iter().sum::<usize>(), 5);
        assert_eq!(grid.co, grid.counts.iter().max().unwrap() - grid.counts.iter().min().unwrap());
        // B at x=10 sits on the boundary between columns -> higher column
        assert_eq!(grid.cell_of(p(10.0, 0.0)).1, 1);
        // E at the max corner is clamped into the last cell
        assert_eq!(grid.cell_of(p(20.0, 20.0)), (2, 1));
    }

    #[test]
    fn grid_boundary_at_exact_multiple() {
        let nodes = vec![Node { id: 0, x: 0.0, y: 0.0 }, Node { id: 1, x: 20.0, y: 0.0 }];
        let net = SkywayNetwork::from_parts(nodes, [(0, 1, None)]).unwrap();
        let grid = build_cell_grid(&net, 10.0).unwrap();
        assert_eq!((grid.rows, grid.cols), (1, 2));
        assert_eq!(grid.counts, vec![1, 1]);
    }

    #[test]
    fn partial_area_sizes() {
        let dense = CellGrid::from_counts(p(0.0, 0.0), 100.0, 1, 1, vec![5]);
        let r = build_partial_areas(&[p(50.0, 50.0)], &dense, 10.0).unwrap();
        assert_eq!(
            r,
            Region::Squares {
                squares: vec![Square { center: p(50.0, 50.0), half_width: 10.0 }]
            }
        );
        assert!(r.contains(p(40.0, 60.0)));
        assert!(!r.contains(p(39.9, 50.0)));

        // left cell sparse (0), right cell dense (6)
        let mixed = CellGrid::from_counts(p(0.0, 0.0), 100.0, 1, 2, vec![0, 6]);
        let r = build_partial_areas(&[p(50.0, 50.0)], &mixed, 10.0).unwrap();
        assert!(r.contains(p(20.0, 80.0)) && !r.contains(p(19.0, 50.0)));

        let two = build_partial_areas(&[p(50.0, 50.0), p(150.0, 50.0)], &mixed, 10.0).unwrap();
        assert!(two.contains(p(25.0, 50.0)));
        assert!(two.contains(p(155.0, 55.0)));
        assert!(!two.contains(p(100.0, 50.0)));
    }

    #[test]
    fn rhombus_regions_diagonal() {
        // offset sqrt(2) puts the parallels at y = x +- 2
        let c = Corridor::new(p(0.0, 0.0), p(4.0, 4.0), 2f64.sqrt()).unwrap();
        let close = |a: Point, b: Point| a.dist(b) < 1e-12;
        let rect = c.rectangle();
        for corner in [p(-1.0, 1.0), p(1.0, -1.0), p(5.0, 3.0), p(3.0, 5.0)] {
            assert!(rect.vertices().iter().any(|&v| close(v, corner)), "{corner:?}");
        }
        let rh = c.rhombus();
        for corner in [p(0.0, 0.0), p(1.0, 3.0), p(4.0, 4.0), p(3.0, 1.0)] {
            assert!(rh.vertices().iter().any(|&v| close(v, corner)), "{corner:?}");
        }
        let tri = c.triangle(Side::Positive);
        assert!(tri.contains(p(2.0, 3.0)));
        assert!(!tri.contains(p(3.0, 2.0)));
        assert!(c.triangle(Side::Negative).contains(p(3.0, 2.0)));
        assert!((rect.area() - 16.0).abs() < 1e-9);
        assert!((rh.area() - 8.0).abs() < 1e-9);
        assert!((tri.area() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rhombus_vertical_segment() {
        let c = Corridor::new(p(0.0, 0.0), p(0.0, 4.0), 2.0).unwrap();
        let rect = c.rectangle();
        for corner in [p(-2.0, 0.0), p(2.0, 0.0), p(2.0, 4.0), p(-2.0, 4.0)] {
            assert!(rect.vertices().iter().any(|&v| v.dist(corner) < 1e-12));
        }
        assert!(rect.contains(p(2.0, 4.0)) && !rect.contains(p(2.1, 2.0)));
    }

    #[test]
    fn denser_half_selects_triangle() {
        let net = net5();
        let r = build_rhombus_regions(&net, p(0.0, 0.0), p(10.0, 0.0), 5.0).unwrap();
        assert_eq!(r.side, Side::Positive);
        // A, B on the line count for both halves; C above; D outside
        assert_eq!((r.positive_count, r.negative_count), (3, 2));
        assert!(r.triangle.contains(p(5.0, 4.0)));
        assert_eq!(nodes_in_region(&net, &Region::Polygon(r.rectangle)), vec![0, 1, 2]);
    }

    #[test]
    fn side_tie_breaks() {
        let n = |id, x, y| Node { id, x, y };
        // one node above (id 5), one below (id 2): below holds the smaller id
        let nodes = vec![n(0, 0.0, 0.0), n(1, 10.0, 0.0), n(5, 5.0, 1.0), n(2, 5.0, -1.0)];
        let net = SkywayNetwork::from_parts(nodes, [(0, 1, None), (0, 5, None), (0, 2, None)]).unwrap();
        let r = build_rhombus_regions(&net, p(0.0, 0.0), p(10.0, 0.0), 5.0).unwrap();
        assert_eq!(r.side, Side::Negative);
        // empty halves default to positive
        let nodes = vec![n(0, 0.0, 0.0), n(1, 10.0, 0.0)];
        let net = SkywayNetwork::from_parts(nodes, [(0, 1, None)]).unwrap();
        let r = build_rhombus_regions(&net, p(0.0, 0.0), p(10.0, 0.0), 5.0).unwrap();
        assert_eq!(r.side, Side::Positive);
    }

    #[test]
    fn degenerate_corridor() {
        assert!(matches!(Corridor::new(p(1.0, 1.0), p(1.0, 1.0), 1.0), Err(SkywayError::Degenerate)));
    }

    #[test]
    fn region_queries_on_fixture() {
        let net = net5();
        let c = Region::Circle(build_circle(p(0.0, 0.0), p(10.0, 0.0), 10.0).unwrap());
        assert_eq!(nodes_in_region(&net, &c), vec![0, 1, 2, 3]);
        assert_eq!(nodes_in_region(&net, &Region::All).len(), 5);
        let far = Region::Circle(build_circle(p(100.0, 100.0), p(100.0, 100.0), 1.0).unwrap());
        assert!(nodes_in_region(&net, &far).is_empty());
    }

    #[test]
    fn region_json_shape() {
        let c = Region::Circle(build_circle(p(0.0, 0.0), p(2.0, 0.0), 1.0).unwrap());
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["kind"], "circle");
        assert_eq!(v["radius"], 1.0);
        assert_eq!(serde_json::to_value(Region::All).unwrap()["kind"], "all");
        let back: Region = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn polygon_rejects_nonconvex() {
        let arrow = vec![p(0.0, 0.0), p(4.0, 0.0), p(1.0, 1.0), p(0.0, 4.0)];
        assert!(ConvexPolygon::new(arrow).is_err());
        let with_collinear = vec![p(0.0, 0.0), p(2.0, 0.0), p(4.0, 0.0), p(4.0, 4.0)];
        assert_eq!(ConvexPolygon::new(with_collinear).unwrap().vertices().len(), 3);
    }
}
