//! Exact planar geometry in lattice coordinates.
//!
//! Every mesh vertex in this crate is a lattice site, so all geometric
//! predicates (orientation, point location, segment clipping) operate on
//! integer coordinates with respect to the lattice basis, using `i128`
//! intermediates and `Ratio<i128>` for derived parameters. The linear map
//! from lattice to Cartesian coordinates preserves orientation signs and
//! affine parameters, so predicates evaluated in lattice coordinates are
//! exact statements about the Cartesian objects.
//!
//! Coordinates stay far below the overflow range: a period cell of side
//! `N ≤ 512` keeps every orientation determinant under `2^40`.

use num_rational::Ratio;

/// Rational scalar used for exact clip parameters and barycentric weights.
pub type Rat = Ratio<i128>;

/// A lattice point in integer coordinates `(i, j)` w.r.t. the basis `(a1, a2)`.
pub type IPoint = (i64, i64);

/// A point with rational lattice coordinates (e.g. a point along a bond).
pub type RPoint = (Rat, Rat);

/// Rational from an integer coordinate.
#[inline]
pub fn rat(v: i64) -> Rat {
    Ratio::from_integer(v as i128)
}

#[inline]
pub fn sub(a: IPoint, b: IPoint) -> IPoint {
    (a.0 - b.0, a.1 - b.1)
}

#[inline]
pub fn add(a: IPoint, b: IPoint) -> IPoint {
    (a.0 + b.0, a.1 + b.1)
}

#[inline]
pub fn neg(a: IPoint) -> IPoint {
    (-a.0, -a.1)
}

/// Cross product of two integer vectors.
#[inline]
pub fn cross(a: IPoint, b: IPoint) -> i128 {
    a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128
}

/// Orientation of the triple `(a, b, c)`: positive if counter-clockwise.
///
/// The sign agrees with the Cartesian orientation because the lattice basis
/// has positive determinant.
#[inline]
pub fn orient2d(a: IPoint, b: IPoint, c: IPoint) -> i128 {
    cross(sub(b, a), sub(c, a))
}

/// Twice the signed area of a triangle, in lattice-coordinate units.
///
/// The Cartesian area is `sqrt(3)/2 * area2_lattice / 2`.
#[inline]
pub fn area2_lattice(tri: &[IPoint; 3]) -> i128 {
    orient2d(tri[0], tri[1], tri[2])
}

/// A closed parameter interval `[t0, t1] ⊆ [0, 1]` along a segment.
///
/// `t0 == t1` encodes a degenerate (single-point) intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TSpan {
    pub t0: Rat,
    pub t1: Rat,
}

impl TSpan {
    /// Length of the interval (in segment parameter units).
    pub fn len(&self) -> Rat {
        self.t1 - self.t0
    }

    pub fn is_degenerate(&self) -> bool {
        self.t0 == self.t1
    }

    /// Midpoint parameter.
    pub fn mid(&self) -> Rat {
        (self.t0 + self.t1) / Ratio::from_integer(2)
    }
}

/// Clips the segment `p + t r`, `t ∈ [0,1]`, against a closed convex polygon
/// given by counter-clockwise vertices.
///
/// Returns the parameter interval of the intersection, or `None` when the
/// closed segment misses the closed polygon entirely. A returned degenerate
/// span means the segment touches the polygon in exactly one point.
pub fn clip_segment_convex(p: IPoint, r: IPoint, poly: &[IPoint]) -> Option<TSpan> {
    debug_assert!(poly.len() >= 3);
    let mut lo = Rat::from_integer(0);
    let mut hi = Rat::from_integer(1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        // Inside the half-plane: orient2d(a, b, p + t r) >= 0, i.e. c0 + t d >= 0.
        let c0 = orient2d(a, b, p);
        let d = cross(sub(b, a), r);
        if d == 0 {
            if c0 < 0 {
                return None;
            }
        } else {
            let t = Ratio::new(-c0, d);
            if d > 0 {
                if t > lo {
                    lo = t;
                }
            } else if t < hi {
                hi = t;
            }
        }
        if lo > hi {
            return None;
        }
    }
    Some(TSpan { t0: lo, t1: hi })
}

/// Clips a segment against a closed triangle (counter-clockwise vertices).
pub fn clip_segment_triangle(p: IPoint, r: IPoint, tri: &[IPoint; 3]) -> Option<TSpan> {
    clip_segment_convex(p, r, tri)
}

/// Location of a point relative to a closed triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Outside,
    /// On the open edge `k` (between vertices `k` and `k+1 mod 3`).
    Edge(usize),
    /// Coincides with vertex `k`.
    Vertex(usize),
    Inside,
}

/// Exactly locates a rational point relative to a closed CCW triangle.
pub fn locate_in_triangle(p: RPoint, tri: &[IPoint; 3]) -> Location {
    let mut zero_edges = [false; 3];
    let mut n_zero = 0;
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        // orient2d(a, b, p) with rational p.
        let o = (rat(b.0) - rat(a.0)) * (p.1 - rat(a.1)) - (rat(b.1) - rat(a.1)) * (p.0 - rat(a.0));
        if o < Rat::from_integer(0) {
            return Location::Outside;
        }
        if o == Rat::from_integer(0) {
            zero_edges[k] = true;
            n_zero += 1;
        }
    }
    match n_zero {
        0 => Location::Inside,
        1 => Location::Edge(zero_edges.iter().position(|&z| z).unwrap()),
        2 => {
            // The shared vertex of the two zero edges: edges k and k+1 meet at
            // vertex k+1.
            let k = (0..3)
                .find(|&k| zero_edges[k] && zero_edges[(k + 1) % 3])
                .expect("two zero orientations must be adjacent edges");
            Location::Vertex((k + 1) % 3)
        }
        _ => unreachable!("a nondegenerate triangle cannot have 3 zero orientations"),
    }
}

/// Point along a segment at rational parameter `t`.
pub fn point_at(p: IPoint, r: IPoint, t: Rat) -> RPoint {
    (rat(p.0) + t * rat(r.0), rat(p.1) + t * rat(r.1))
}

/// Exact barycentric coordinates of a rational point w.r.t. a CCW triangle.
///
/// Returns `[w0, w1, w2]` with `w0 + w1 + w2 = 1`; all weights are in `[0,1]`
/// exactly when the point lies in the closed triangle.
pub fn barycentric(p: RPoint, tri: &[IPoint; 3]) -> [Rat; 3] {
    let denom = Ratio::from_integer(area2_lattice(tri));
    debug_assert!(denom > Rat::from_integer(0), "triangle must be CCW nondegenerate");
    let mut w = [Rat::from_integer(0); 3];
    for k in 0..3 {
        let a = tri[(k + 1) % 3];
        let b = tri[(k + 2) % 3];
        let o = (rat(b.0) - rat(a.0)) * (p.1 - rat(a.1)) - (rat(b.1) - rat(a.1)) * (p.0 - rat(a.0));
        w[k] = o / denom;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    const UP: [IPoint; 3] = [(0, 0), (1, 0), (0, 1)];

    #[test]
    fn orientation_signs() {
        assert!(orient2d((0, 0), (1, 0), (0, 1)) > 0);
        assert!(orient2d((0, 0), (0, 1), (1, 0)) < 0);
        assert_eq!(orient2d((0, 0), (1, 1), (2, 2)), 0);
    }

    #[test]
    fn clip_segment_through_triangle_interior() {
        // Segment from (-1, 0) to (2, 0)... runs along the edge y = 0.
        let span = clip_segment_triangle((-1, 0), (3, 0), &UP).unwrap();
        assert_eq!(span.t0, Ratio::new(1, 3));
        assert_eq!(span.t1, Ratio::new(2, 3));
    }

    #[test]
    fn clip_segment_miss_is_none() {
        assert!(clip_segment_triangle((5, 5), (1, 0), &UP).is_none());
        // Parallel to an edge, strictly outside.
        assert!(clip_segment_triangle((0, -1), (1, 0), &UP).is_none());
    }

    #[test]
    fn clip_segment_touch_is_degenerate() {
        // Passes exactly through the vertex (1,0) transversally.
        let span = clip_segment_triangle((0, -1), (2, 2), &UP).unwrap();
        assert!(span.is_degenerate());
        assert_eq!(span.t0, Ratio::new(1, 2));
    }

    #[test]
    fn clip_segment_along_edge_line_keeps_the_edge_portion() {
        // The segment (2,-1) -> (0,1) runs along the hypotenuse line x+y=1 and
        // lies inside the closed triangle for the second half of its span.
        let span = clip_segment_triangle((2, -1), (-2, 2), &UP).unwrap();
        assert_eq!(span.t0, Ratio::new(1, 2));
        assert_eq!(span.t1, Rat::from_integer(1));
    }

    #[test]
    fn clip_entirely_inside_keeps_unit_interval() {
        let tri: [IPoint; 3] = [(0, 0), (10, 0), (0, 10)];
        let span = clip_segment_triangle((1, 1), (2, 1), &tri).unwrap();
        assert_eq!(span.t0, Rat::from_integer(0));
        assert_eq!(span.t1, Rat::from_integer(1));
    }

    #[test]
    fn locate_cases() {
        assert_eq!(
            locate_in_triangle((Ratio::new(1, 4), Ratio::new(1, 4)), &UP),
            Location::Inside
        );
        assert_eq!(
            locate_in_triangle((Ratio::new(1, 2), Rat::from_integer(0)), &UP),
            Location::Edge(0)
        );
        assert_eq!(
            locate_in_triangle((Rat::from_integer(0), Rat::from_integer(0)), &UP),
            Location::Vertex(0)
        );
        assert_eq!(
            locate_in_triangle((Rat::from_integer(2), Rat::from_integer(2)), &UP),
            Location::Outside
        );
    }

    #[test]
    fn barycentric_weights_sum_to_one_and_interpolate_vertices() {
        let tri: [IPoint; 3] = [(2, 1), (5, 2), (3, 6)];
        let p = (Ratio::new(10, 3), Ratio::new(7, 3));
        let w = barycentric(p, &tri);
        assert_eq!(w[0] + w[1] + w[2], Rat::from_integer(1));
        // Reconstruct the point from the weights.
        let x = w[0] * rat(tri[0].0) + w[1] * rat(tri[1].0) + w[2] * rat(tri[2].0);
        let y = w[0] * rat(tri[0].1) + w[1] * rat(tri[1].1) + w[2] * rat(tri[2].1);
        assert_eq!((x, y), p);
        for (k, _) in tri.iter().enumerate() {
            let w = barycentric((rat(tri[k].0), rat(tri[k].1)), &tri);
            assert_eq!(w[k], Rat::from_integer(1));
        }
    }

    #[test]
    fn clip_convex_hexagon_closed_touch() {
        // Regular lattice hexagon of radius 2 around the origin (CCW).
        let hex: Vec<IPoint> = vec![(2, 0), (0, 2), (-2, 2), (-2, 0), (0, -2), (2, -2)];
        // Segment grazing the corner (2,0) from outside: both edges incident to
        // the corner (i=2 and i+j=2) are crossed outward immediately.
        let span = clip_segment_convex((1, 2), (2, -4), &hex).unwrap();
        assert_eq!(span.t0, Ratio::new(1, 2));
        assert_eq!(span.t1, Ratio::new(1, 2));
        // Shifted one lattice step outward: clean miss.
        assert!(clip_segment_convex((2, 2), (2, -4), &hex).is_none());
    }
}
