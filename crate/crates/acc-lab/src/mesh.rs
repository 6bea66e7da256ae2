//! Triangulations of the period cell: full atomistic resolution, graded
//! hexagonal-ring meshes, exact bond traces, bond densities, and jump
//! seminorms.
//!
//! All mesh vertices are lattice sites, so every geometric predicate
//! (segment clipping, point location, areas) is evaluated in exact integer
//! or rational arithmetic; floating point enters only through Cartesian
//! lengths and P1 gradients.

use std::collections::{HashMap, HashSet};
use std::io::Write as _;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::geom::{
    add, area2_lattice, barycentric, clip_segment_triangle, locate_in_triangle, point_at, rat,
    IPoint, Location, RPoint, Rat,
};
use crate::lattice::{cartesian, hexagon_corners, hexnorm, Cell, CellKind, LatticeDomain, SQRT3};
use crate::{Error, Result};

/// Grading family for the coarse region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    /// Self-similar hexagonal layers: constant subdivision count per side,
    /// element size growing linearly with the radius.
    Radial,
    /// Element size follows `h(r) = h_K (r/K)^alpha`.
    Algebraic,
}

/// Parameters of a graded mesh around the fully resolved core.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeshPlan {
    /// Side length of the hexagonal fully-resolved core (in lattice spacings).
    #[serde(rename = "K")]
    pub k: i64,
    /// Element size of the first coarse ring, at the core boundary.
    #[serde(rename = "hK")]
    pub h_k: f64,
    /// Grading exponent (used by the algebraic family).
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub family: MeshFamily,
    /// Smallest triangle angle tolerated at build time, in degrees.
    #[serde(default = "default_min_angle")]
    pub min_angle_deg: f64,
}

fn default_alpha() -> f64 {
    1.5
}

fn default_min_angle() -> f64 {
    20.0
}

impl MeshPlan {
    pub fn radial(k: i64, h_k: f64) -> Self {
        MeshPlan { k, h_k, alpha: 1.0, family: MeshFamily::Radial, min_angle_deg: 20.0 }
    }

    pub fn algebraic(k: i64, h_k: f64, alpha: f64) -> Self {
        MeshPlan { k, h_k, alpha, family: MeshFamily::Algebraic, min_angle_deg: 20.0 }
    }

    fn validate(&self, cell_side: i64) -> Result<()> {
        if self.k < 1 || self.k >= cell_side {
            return Err(Error::invalid(format!(
                "core side K = {} must satisfy 1 <= K < N = {cell_side}",
                self.k
            )));
        }
        if !(1.0 <= self.h_k && self.h_k <= self.k as f64) {
            return Err(Error::invalid(format!(
                "interface element size hK = {} must lie in [1, K = {}]",
                self.h_k, self.k
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid(format!("grading exponent alpha = {} must be > 0", self.alpha)));
        }
        Ok(())
    }

    /// Target element size at radius `r`.
    pub fn target_size(&self, r: f64) -> f64 {
        let alpha = match self.family {
            MeshFamily::Radial => 1.0,
            MeshFamily::Algebraic => self.alpha,
        };
        self.h_k * (r / self.k as f64).powf(alpha)
    }
}

/// Region tag of a mesh triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Region {
    Atomistic,
    Continuum,
}

/// One triangle of a mesh: canonical node ids plus the unwrapped lattice
/// coordinates of the periodic copy it was built from (counter-clockwise).
#[derive(Debug, Clone)]
pub struct MeshTriangle {
    pub nodes: [u32; 3],
    pub corners: [IPoint; 3],
    pub region: Region,
    /// Twice the lattice-coordinate area (Cartesian area = sqrt3/4 * area2).
    pub area2: i128,
    /// Cartesian area.
    pub area: f64,
    /// Longest Cartesian edge length.
    pub h_t: f64,
    /// Gradients of the three barycentric hat functions (Cartesian).
    pub hat_grads: [Vector2<f64>; 3],
}

impl MeshTriangle {
    /// Cartesian centroid.
    pub fn centroid(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for p in self.corners {
            let x = cartesian(p);
            c[0] += x[0] / 3.0;
            c[1] += x[1] / 3.0;
        }
        c
    }
}

/// An interior mesh edge with its two incident triangles.
#[derive(Debug, Clone, Copy)]
pub struct MeshEdge {
    pub nodes: (u32, u32),
    pub tris: (u32, u32),
    /// Cartesian length.
    pub length: f64,
    /// True when the edge lies inside the closed fully-resolved core, in
    /// which case coarsening seminorms skip it.
    pub in_core: bool,
}

/// A conforming periodic triangulation of the cell, optionally split into a
/// fully resolved hexagonal core and graded coarse rings.
#[derive(Debug, Clone)]
pub struct CoupledMesh {
    cell: Cell,
    /// Side of the hexagonal fully-resolved core; `None` when the whole
    /// cell is at atomistic resolution.
    core_radius: Option<i64>,
    nodes: Vec<IPoint>,
    node_ids: HashMap<IPoint, u32>,
    triangles: Vec<MeshTriangle>,
    edges: Vec<MeshEdge>,
    buckets: HashMap<IPoint, Vec<(u32, IPoint)>>,
    window: i64,
}

/// A parameter interval of a bond lying in one closed triangle, with the
/// coarse-region indicator `chi` of its midpoint (0 inside the core, 1/2 on
/// the core boundary, 1 outside).
#[derive(Debug, Clone, Copy)]
pub struct TraceInterval {
    pub tri: u32,
    pub t0: Rat,
    pub t1: Rat,
    pub chi: Rat,
}

impl TraceInterval {
    pub fn len(&self) -> Rat {
        self.t1 - self.t0
    }
}

/// A point where a bond passes from one triangle to another.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub t: f64,
    /// True when the bond passes exactly through a mesh vertex, in which
    /// case crossing-count bookkeeping splits the hit half/half between the
    /// two incident faces.
    pub vertex_hit: bool,
}

/// The exact decomposition of a bond into per-triangle parameter intervals.
#[derive(Debug, Clone)]
pub struct BondTrace {
    pub start: IPoint,
    pub dir: IPoint,
    pub intervals: Vec<TraceInterval>,
    pub crossings: Vec<Crossing>,
}

impl BondTrace {
    /// Sum of interval lengths; exactly 1 for a valid trace.
    pub fn covered(&self) -> Rat {
        self.intervals.iter().map(|iv| iv.len()).fold(Rat::zero(), |a, b| a + b)
    }
}

/// Exact hexagonal gauge of a rational point: `max(|i|, |j|, |i+j|)`.
fn hexnorm_rat(p: RPoint) -> Rat {
    let s = p.0 + p.1;
    p.0.abs().max(p.1.abs()).max(s.abs())
}

/// Builds the full atomistic-resolution triangulation of the period cell:
/// two unit triangles per lattice site, covering the cell exactly.
pub fn micro_triangulation(domain: &LatticeDomain) -> Result<CoupledMesh> {
    let cell = domain.cell();
    let mut raw = Vec::with_capacity(2 * cell.site_count());
    for p in cell.sites() {
        let (i, j) = p;
        raw.push(([(i, j), (i + 1, j), (i, j + 1)], Region::Atomistic));
        raw.push(([(i + 1, j), (i + 1, j + 1), (i, j + 1)], Region::Atomistic));
    }
    CoupledMesh::assemble(cell, None, raw, 20.0)
}

/// Builds the coupled mesh: unit triangles inside the hexagonal core of
/// side `plan.k`, graded hexagonal rings outside, conforming everywhere.
///
/// The core boundary is always subdivided at lattice spacing 1, so the
/// coarse mesh attaches to the micro-triangulation without hanging nodes.
pub fn build_graded_mesh(domain: &LatticeDomain, plan: &MeshPlan) -> Result<CoupledMesh> {
    let cell = domain.cell();
    if cell.kind() != CellKind::Hexagonal {
        return Err(Error::invalid(
            "graded meshes are built on the hexagonal period cell; use a hexagonal domain",
        ));
    }
    let n = cell.n();
    plan.validate(n)?;
    let k = plan.k;
    for &v in domain.vacancies() {
        if hexnorm(v) >= k {
            return Err(Error::invalid(format!(
                "vacancy ({}, {}) is not interior to the resolved core of side {k}",
                v.0, v.1
            )));
        }
    }

    let mut raw: Vec<([IPoint; 3], Region)> = Vec::new();
    // Fully resolved core: all unit triangles inside the hexagon of side k.
    let inside = |p: IPoint| hexnorm(p) <= k;
    for i in -k..k {
        for j in -k..k {
            let p = (i, j);
            let lower = [p, (i + 1, j), (i, j + 1)];
            if lower.iter().all(|&q| inside(q)) {
                raw.push((lower, Region::Atomistic));
            }
            let upper = [(i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if upper.iter().all(|&q| inside(q)) {
                raw.push((upper, Region::Atomistic));
            }
        }
    }
    let micro_count = raw.len();
    if micro_count as i64 != 6 * k * k {
        return Err(Error::Geometry(format!(
            "core triangulation produced {micro_count} triangles, expected {}",
            6 * k * k
        )));
    }

    // Subdivisions per side for each ring polyline.
    let m_of = |r: i64| -> i64 {
        if r == k {
            return k; // lattice spacing on the core boundary
        }
        let m = match plan.family {
            MeshFamily::Radial => (k as f64 / plan.h_k).round() as i64,
            MeshFamily::Algebraic => (r as f64 / plan.target_size(r as f64)).round() as i64,
        };
        m.clamp(1, r)
    };

    // Ring radii, grown by the target element size. Two shape-regularity
    // guards: a layer is never thicker than 1.5x its own tangential spacing
    // (thicker layers force thin corner wedges against the denser inner
    // ring), and an awkward remainder is split into two balanced layers
    // instead of leaving a sliver.
    let mut radii = vec![k];
    let mut rho = k;
    while rho < n {
        let spacing = rho as f64 / m_of(rho) as f64;
        let step = plan
            .target_size(rho as f64)
            .round()
            .clamp(1.0, (1.5 * spacing).floor().max(1.0)) as i64;
        let remaining = n - rho;
        let next = if remaining <= step {
            n
        } else if remaining < 2 * step {
            rho + (remaining + 1) / 2
        } else {
            rho + step
        };
        radii.push(next);
        rho = next;
    }
    let mut ms: Vec<i64> = radii.iter().map(|&r| m_of(r)).collect();
    // The outermost polyline is identified with itself across the period;
    // that requires a mirror-symmetric subdivision, impossible for an odd
    // radius with an even count — drop to the next odd count.
    let last = ms.len() - 1;
    if radii[last] % 2 == 1 && ms[last] % 2 == 0 {
        ms[last] = (ms[last] - 1).max(1);
    }

    let polylines: Vec<[Vec<IPoint>; 6]> = radii
        .iter()
        .zip(&ms)
        .map(|(&r, &m)| ring_polyline(r, m))
        .collect();
    for w in polylines.windows(2) {
        for s in 0..6 {
            zip_side(&w[0][s], &w[1][s], &mut raw);
        }
    }

    improve_by_flips(&cell, &mut raw)?;
    CoupledMesh::assemble(cell, Some(k), raw, plan.min_angle_deg)
}

/// Smallest interior angle of a lattice triangle, in degrees.
fn min_angle_deg_of(tri: &[IPoint; 3]) -> f64 {
    let xs: [Vector2<f64>; 3] = std::array::from_fn(|i| {
        let c = cartesian(tri[i]);
        Vector2::new(c[0], c[1])
    });
    let mut min_angle = f64::INFINITY;
    for i in 0..3 {
        let e1 = xs[(i + 1) % 3] - xs[i];
        let e2 = xs[(i + 2) % 3] - xs[i];
        let cosang = e1.dot(&e2) / (e1.norm() * e2.norm());
        min_angle = min_angle.min(cosang.clamp(-1.0, 1.0).acos().to_degrees());
    }
    min_angle
}

/// Local edge-flip smoothing: repeatedly flips interior coarse-region edges
/// whenever the flip strictly increases the smallest angle of the incident
/// triangle pair (Lawson's scheme, which terminates). Ring-transition strips
/// with mismatched subdivision counts start with a few thin triangles; this
/// pass restores shape regularity without moving any vertex, so conformity,
/// the node set, and the grading law are untouched.
fn improve_by_flips(cell: &Cell, raw: &mut [([IPoint; 3], Region)]) -> Result<()> {
    for (c, _) in raw.iter_mut() {
        let a2 = area2_lattice(c);
        if a2 == 0 {
            return Err(Error::Geometry(format!("degenerate triangle {c:?} before smoothing")));
        }
        if a2 < 0 {
            c.swap(1, 2);
        }
    }
    for _sweep in 0..200 {
        // Edges keyed by their canonical (wrapped) endpoints.
        let mut edge_map: HashMap<(IPoint, IPoint), Vec<(usize, usize)>> = HashMap::new();
        for (t, (c, _)) in raw.iter().enumerate() {
            for e in 0..3 {
                let p = cell.wrap(c[e]);
                let q = cell.wrap(c[(e + 1) % 3]);
                let key = if p <= q { (p, q) } else { (q, p) };
                edge_map.entry(key).or_default().push((t, e));
            }
        }
        let mut touched = vec![false; raw.len()];
        let mut flipped_any = false;
        for incident in edge_map.values() {
            if incident.len() != 2 {
                continue; // conformity is checked at assembly
            }
            let (t1, e1) = incident[0];
            let (t2, e2) = incident[1];
            if t1 == t2 || touched[t1] || touched[t2] {
                continue;
            }
            if raw[t1].1 != Region::Continuum || raw[t2].1 != Region::Continuum {
                continue;
            }
            let c1 = raw[t1].0;
            let c2 = raw[t2].0;
            let a1 = c1[e1];
            let b1 = c1[(e1 + 1) % 3];
            let apex1 = c1[(e1 + 2) % 3];
            // With both triangles counter-clockwise, the shared edge runs in
            // opposite directions; align t2's periodic copy with t1's frame.
            let a2 = c2[e2];
            let b2 = c2[(e2 + 1) % 3];
            let s = (a1.0 - b2.0, a1.1 - b2.1);
            if add(a2, s) != b1 {
                continue;
            }
            let d = add(c2[(e2 + 2) % 3], s);
            let new1 = [a1, d, apex1];
            let new2 = [b1, apex1, d];
            if area2_lattice(&new1) <= 0 || area2_lattice(&new2) <= 0 {
                continue; // non-convex quad: flip would invert a triangle
            }
            let before = min_angle_deg_of(&c1).min(min_angle_deg_of(&c2));
            let after = min_angle_deg_of(&new1).min(min_angle_deg_of(&new2));
            if after > before + 1e-9 {
                raw[t1].0 = new1;
                raw[t2].0 = new2;
                touched[t1] = true;
                touched[t2] = true;
                flipped_any = true;
            }
        }
        if !flipped_any {
            return Ok(());
        }
    }
    Ok(())
}

/// The six sides of the hexagonal ring of radius `r`, each subdivided into
/// `m` segments at lattice points, corners included on both sides.
fn ring_polyline(r: i64, m: i64) -> [Vec<IPoint>; 6] {
    let ks = side_subdivision(r, m);
    let corners = hexagon_corners(r);
    std::array::from_fn(|s| {
        let a = corners[s];
        let b = corners[(s + 1) % 6];
        let u = ((b.0 - a.0) / r, (b.1 - a.1) / r);
        ks.iter().map(|&t| (a.0 + t * u.0, a.1 + t * u.1)).collect()
    })
}

/// Strictly increasing integer breakpoints `0 = k_0 < ... < k_m = r`,
/// mirror-symmetric (`k_{m-j} = r - k_j`) whenever the parities allow.
fn side_subdivision(r: i64, m: i64) -> Vec<i64> {
    debug_assert!(1 <= m && m <= r);
    let mu = m as usize;
    let mut ks = vec![0i64; mu + 1];
    if m % 2 == 0 && r % 2 == 1 {
        // No symmetric choice exists; plain rounding (only used on interior
        // rings, where no periodic identification applies).
        for (j, slot) in ks.iter_mut().enumerate() {
            *slot = (j as f64 * r as f64 / m as f64).round() as i64;
        }
    } else {
        for j in 0..=mu / 2 {
            ks[j] = (j as f64 * r as f64 / m as f64).round() as i64;
        }
        for j in 0..=mu / 2 {
            ks[mu - j] = r - ks[j];
        }
    }
    for j in 0..mu {
        debug_assert!(ks[j + 1] > ks[j], "subdivision must be strictly increasing");
    }
    ks
}

/// Triangulates the strip between two subdivided parallel polyline sides by
/// merging their breakpoints in parameter order.
fn zip_side(inner: &[IPoint], outer: &[IPoint], out: &mut Vec<([IPoint; 3], Region)>) {
    let mi = inner.len() - 1;
    let mo = outer.len() - 1;
    let (mut i, mut o) = (0usize, 0usize);
    while i < mi || o < mo {
        let advance_inner = if o == mo {
            true
        } else if i == mi {
            false
        } else {
            // (i+1)/mi <= (o+1)/mo, cross-multiplied.
            (i + 1) * mo <= (o + 1) * mi
        };
        let tri = if advance_inner {
            i += 1;
            [inner[i - 1], inner[i], outer[o]]
        } else {
            o += 1;
            [inner[i], outer[o], outer[o - 1]]
        };
        out.push((tri, Region::Continuum));
    }
}

impl CoupledMesh {
    fn assemble(
        cell: Cell,
        core_radius: Option<i64>,
        raw: Vec<([IPoint; 3], Region)>,
        min_angle_deg: f64,
    ) -> Result<CoupledMesh> {
        let mut nodes: Vec<IPoint> = Vec::new();
        let mut node_ids: HashMap<IPoint, u32> = HashMap::new();
        let mut triangles: Vec<MeshTriangle> = Vec::with_capacity(raw.len());
        let mut area2_total: i128 = 0;

        for (mut corners, region) in raw {
            let a2 = area2_lattice(&corners);
            if a2 == 0 {
                return Err(Error::Geometry(format!(
                    "degenerate triangle {corners:?} in mesh construction"
                )));
            }
            if a2 < 0 {
                corners.swap(1, 2);
            }
            let a2 = area2_lattice(&corners);
            area2_total += a2;

            let xs: [Vector2<f64>; 3] = std::array::from_fn(|i| {
                let c = cartesian(corners[i]);
                Vector2::new(c[0], c[1])
            });
            let area = SQRT3 / 4.0 * a2 as f64;
            let mut h_t: f64 = 0.0;
            let mut min_angle = f64::INFINITY;
            for i in 0..3 {
                let e1 = xs[(i + 1) % 3] - xs[i];
                let e2 = xs[(i + 2) % 3] - xs[i];
                h_t = h_t.max(e1.norm());
                let cosang = e1.dot(&e2) / (e1.norm() * e2.norm());
                min_angle = min_angle.min(cosang.clamp(-1.0, 1.0).acos().to_degrees());
            }
            if min_angle < min_angle_deg - 1e-9 {
                return Err(Error::invalid(format!(
                    "triangle {corners:?} has minimum angle {min_angle:.2} deg, below the \
                     shape-regularity floor {min_angle_deg} deg"
                )));
            }
            let hat_grads: [Vector2<f64>; 3] = std::array::from_fn(|i| {
                let e = xs[(i + 2) % 3] - xs[(i + 1) % 3];
                Vector2::new(-e.y, e.x) / (2.0 * area)
            });

            let node_of = |p: IPoint, nodes: &mut Vec<IPoint>, ids: &mut HashMap<IPoint, u32>| {
                let c = cell.wrap(p);
                *ids.entry(c).or_insert_with(|| {
                    nodes.push(c);
                    (nodes.len() - 1) as u32
                })
            };
            let ids = [
                node_of(corners[0], &mut nodes, &mut node_ids),
                node_of(corners[1], &mut nodes, &mut node_ids),
                node_of(corners[2], &mut nodes, &mut node_ids),
            ];
            triangles.push(MeshTriangle {
                nodes: ids,
                corners,
                region,
                area2: a2,
                area,
                h_t,
                hat_grads,
            });
        }

        let expected = 2 * cell.site_count() as i128;
        if area2_total != expected {
            return Err(Error::Geometry(format!(
                "mesh does not tile the cell: total doubled area {area2_total}, expected {expected}"
            )));
        }

        // Edge set + conformity.
        let mut edge_map: HashMap<(u32, u32), Vec<(u32, usize)>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let a = tri.nodes[e];
                let b = tri.nodes[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                edge_map.entry(key).or_default().push((t as u32, e));
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        for (key, incident) in &edge_map {
            if incident.len() != 2 {
                return Err(Error::Geometry(format!(
                    "edge between nodes {key:?} is shared by {} triangles; the mesh is not a \
                     conforming periodic triangulation",
                    incident.len()
                )));
            }
            let (t0, e0) = incident[0];
            let tri0 = &triangles[t0 as usize];
            let a = tri0.corners[e0];
            let b = tri0.corners[(e0 + 1) % 3];
            let d = cartesian((b.0 - a.0, b.1 - a.1));
            let in_core = match core_radius {
                None => true,
                Some(k) => {
                    hexnorm(nodes[key.0 as usize]) <= k && hexnorm(nodes[key.1 as usize]) <= k
                }
            };
            edges.push(MeshEdge {
                nodes: *key,
                tris: (incident[0].0, incident[1].0),
                length: (d[0] * d[0] + d[1] * d[1]).sqrt(),
                in_core,
            });
        }

        // Spatial buckets over the unit lattice grid, for traces and lookups.
        let n = cell.n();
        let window = 2 * n + 6;
        let [v1, v2] = cell.period_vectors();
        let mut shifts = Vec::new();
        for a in -1..=1i64 {
            for b in -1..=1i64 {
                shifts.push((a * v1.0 + b * v2.0, a * v1.1 + b * v2.1));
            }
        }
        let mut buckets: HashMap<IPoint, Vec<(u32, IPoint)>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &s in &shifts {
                let c: Vec<IPoint> = tri.corners.iter().map(|&p| add(p, s)).collect();
                let (mut i0, mut i1) = (c[0].0, c[0].0);
                let (mut j0, mut j1) = (c[0].1, c[0].1);
                for &(ci, cj) in &c[1..] {
                    i0 = i0.min(ci);
                    i1 = i1.max(ci);
                    j0 = j0.min(cj);
                    j1 = j1.max(cj);
                }
                if i1 < -window || i0 > window || j1 < -window || j0 > window {
                    continue;
                }
                for bi in i0.max(-window)..=i1.min(window) {
                    for bj in j0.max(-window)..=j1.min(window) {
                        buckets.entry((bi, bj)).or_default().push((t as u32, s));
                    }
                }
            }
        }

        Ok(CoupledMesh {
            cell,
            core_radius,
            nodes,
            node_ids,
            triangles,
            edges,
            buckets,
            window,
        })
    }

    pub fn cell(&self) -> Cell {
        self.cell
    }

    /// Side of the fully resolved hexagonal core, if the mesh has one.
    pub fn core_radius(&self) -> Option<i64> {
        self.core_radius
    }

    pub fn nodes(&self) -> &[IPoint] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[MeshTriangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    /// Canonical node id of a lattice site (wrapping first).
    pub fn node_id(&self, p: IPoint) -> Option<u32> {
        self.node_ids.get(&self.cell.wrap(p)).copied()
    }

    /// Coarse-region indicator of a point given in unwrapped lattice
    /// coordinates near the canonical cell: 0 inside the resolved core,
    /// 1/2 on its boundary, 1 outside.
    pub fn chi_coarse(&self, p: RPoint) -> Rat {
        match self.core_radius {
            None => Rat::zero(),
            Some(k) => {
                let h = hexnorm_rat(p);
                let kk = rat(k);
                if h < kk {
                    Rat::zero()
                } else if h == kk {
                    Rat::new(1, 2)
                } else {
                    Rat::from_integer(1)
                }
            }
        }
    }

    /// P1 gradient of a nodal field on one triangle (2x2, Cartesian).
    pub fn gradient_on(&self, tri: usize, y: &[[f64; 2]]) -> Matrix2<f64> {
        let t = &self.triangles[tri];
        let mut g = Matrix2::zeros();
        for k in 0..3 {
            let u = y[t.nodes[k] as usize];
            let hg = t.hat_grads[k];
            g[(0, 0)] += u[0] * hg[0];
            g[(0, 1)] += u[0] * hg[1];
            g[(1, 0)] += u[1] * hg[0];
            g[(1, 1)] += u[1] * hg[1];
        }
        g
    }

    /// Locates a point (unwrapped lattice-rational coordinates near the
    /// canonical cell) in the mesh: containing triangle and barycentric
    /// coordinates.
    pub fn locate(&self, p: RPoint) -> Result<(u32, [Rat; 3])> {
        let bi = p.0.floor().to_integer() as i64;
        let bj = p.1.floor().to_integer() as i64;
        if let Some(cands) = self.buckets.get(&(bi, bj)) {
            for &(t, s) in cands {
                let tri = &self.triangles[t as usize];
                let shifted: [IPoint; 3] = std::array::from_fn(|i| add(tri.corners[i], s));
                if locate_in_triangle(p, &shifted) != Location::Outside {
                    return Ok((t, barycentric(p, &shifted)));
                }
            }
        }
        Err(Error::Geometry(format!(
            "point ({}, {}) not found in the mesh",
            p.0, p.1
        )))
    }

    /// Evaluates a piecewise-affine nodal field exactly at a rational point.
    pub fn eval_p1(&self, y: &[[f64; 2]], p: RPoint) -> Result<[f64; 2]> {
        let (t, w) = self.locate(p)?;
        let tri = &self.triangles[t as usize];
        let mut v = [0.0; 2];
        for k in 0..3 {
            let wk = w[k].to_f64().unwrap();
            let u = y[tri.nodes[k] as usize];
            v[0] += wk * u[0];
            v[1] += wk * u[1];
        }
        Ok(v)
    }

    /// Decomposes the bond `start -> start + dir` into per-triangle
    /// parameter intervals partitioning `[0, 1]` exactly.
    pub fn trace_bond(&self, start: IPoint, dir: IPoint) -> Result<BondTrace> {
        let p0 = self.cell.wrap(start);
        // Candidate (triangle, shift) pairs from the buckets under the
        // segment's bounding box.
        let (i0, i1) = (p0.0.min(p0.0 + dir.0), p0.0.max(p0.0 + dir.0));
        let (j0, j1) = (p0.1.min(p0.1 + dir.1), p0.1.max(p0.1 + dir.1));
        let mut cands: HashSet<(u32, IPoint)> = HashSet::new();
        for bi in i0..=i1 {
            for bj in j0..=j1 {
                if let Some(list) = self.buckets.get(&(bi, bj)) {
                    cands.extend(list.iter().copied());
                }
            }
        }
        // Exact clips.
        struct Span {
            tri: u32,
            shift: IPoint,
            t0: Rat,
            t1: Rat,
        }
        let mut spans: Vec<Span> = Vec::new();
        let mut breaks: Vec<Rat> = vec![Rat::zero(), Rat::from_integer(1)];
        for (t, s) in cands {
            let tri = &self.triangles[t as usize];
            let shifted: [IPoint; 3] = std::array::from_fn(|i| add(tri.corners[i], s));
            if let Some(span) = clip_segment_triangle(p0, dir, &shifted) {
                if !span.is_degenerate() {
                    breaks.push(span.t0);
                    breaks.push(span.t1);
                    spans.push(Span { tri: t, shift: s, t0: span.t0, t1: span.t1 });
                }
            }
        }
        breaks.retain(|t| *t >= Rat::zero() && *t <= Rat::from_integer(1));
        breaks.sort();
        breaks.dedup();

        let mut intervals: Vec<TraceInterval> = Vec::new();
        let mut crossings: Vec<Crossing> = Vec::new();
        let mut prev_key: Option<(u32, IPoint)> = None;
        for w in breaks.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            let winner = spans
                .iter()
                .filter(|s| s.t0 <= ta && s.t1 >= tb)
                .min_by_key(|s| s.tri);
            let Some(winner) = winner else {
                return Err(Error::Geometry(format!(
                    "bond trace gap on ({}, {}) + t ({}, {}) over [{}, {}]",
                    p0.0, p0.1, dir.0, dir.1, ta, tb
                )));
            };
            let key = (winner.tri, winner.shift);
            let mid = (ta + tb) / Rat::from_integer(2);
            let chi = self.chi_coarse(point_at(p0, dir, mid));
            if prev_key == Some(key) && intervals.last().map(|iv| iv.chi) == Some(chi) {
                intervals.last_mut().unwrap().t1 = tb;
            } else {
                if let Some(pk) = prev_key {
                    if pk != key {
                        // Record the crossing at ta.
                        let pt = point_at(p0, dir, ta);
                        let tri = &self.triangles[winner.tri as usize];
                        let shifted: [IPoint; 3] =
                            std::array::from_fn(|i| add(tri.corners[i], winner.shift));
                        let vertex_hit =
                            matches!(locate_in_triangle(pt, &shifted), Location::Vertex(_));
                        crossings.push(Crossing { t: ta.to_f64().unwrap(), vertex_hit });
                    }
                }
                intervals.push(TraceInterval { tri: winner.tri, t0: ta, t1: tb, chi });
                prev_key = Some(key);
            }
        }
        let trace = BondTrace { start: p0, dir, intervals, crossings };
        debug_assert_eq!(trace.covered(), Rat::from_integer(1));
        Ok(trace)
    }

    /// Coarsening jump seminorm `(sum_f h_f |[grad y]_f|^p)^{1/p}` over the
    /// interior edges outside the resolved core (`p = f64::INFINITY` gives
    /// the maximum jump).
    ///
    /// `y` is the cell-periodic nodal part of a deformation. An affine
    /// background `B x` is continuous across every edge, so it never
    /// contributes jumps and is not an input here.
    pub fn jump_seminorm(&self, y: &[[f64; 2]], p: f64) -> f64 {
        assert!(p >= 1.0, "jump seminorm needs p >= 1");
        let mut acc: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for e in &self.edges {
            if e.in_core {
                continue;
            }
            let ga = self.gradient_on(e.tris.0 as usize, y);
            let gb = self.gradient_on(e.tris.1 as usize, y);
            let j = (ga - gb).norm();
            if p.is_infinite() {
                worst = worst.max(j);
            } else {
                acc += e.length * j.powf(p);
            }
        }
        if p.is_infinite() {
            worst
        } else {
            acc.powf(1.0 / p)
        }
    }

    /// Writes the mesh as plain-text vertex/element files `base.node` and
    /// `base.ele` (1-indexed; element attribute 1 = resolved core, 2 =
    /// coarse region).
    pub fn write_node_ele(&self, base: impl AsRef<Path>) -> Result<()> {
        let base = base.as_ref();
        let node_path = base.with_extension("node");
        let ele_path = base.with_extension("ele");

        let mut node_text = format!("{} 2 0 0\n", self.nodes.len());
        for (i, &p) in self.nodes.iter().enumerate() {
            let c = cartesian(p);
            node_text.push_str(&format!("{} {:.16e} {:.16e}\n", i + 1, c[0], c[1]));
        }
        let mut ele_text = format!("{} 3 1\n", self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let attr = match t.region {
                Region::Atomistic => 1,
                Region::Continuum => 2,
            };
            ele_text.push_str(&format!(
                "{} {} {} {} {}\n",
                i + 1,
                t.nodes[0] + 1,
                t.nodes[1] + 1,
                t.nodes[2] + 1,
                attr
            ));
        }
        for (path, text) in [(&node_path, node_text), (&ele_path, ele_text)] {
            let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Effective density of lattice bonds of direction `r` inside a lattice
/// triangle: the exact sum over one period of the averaged indicator of the
/// periodically continued triangle along each bond `(x, x + r)`, with runs
/// on the triangle boundary weighted 1/2.
///
/// By the periodic bond-density identity this equals half the doubled
/// lattice area of the triangle — exactly, in rational arithmetic.
pub fn bond_density_check(cell: &Cell, tri: &[IPoint; 3], r: IPoint) -> Rat {
    let mut t = *tri;
    let a2 = area2_lattice(&t);
    assert!(a2 != 0, "bond density needs a nondegenerate triangle");
    if a2 < 0 {
        t.swap(1, 2);
    }
    let [v1, v2] = cell.period_vectors();
    let mut total = Rat::zero();
    for x in cell.sites() {
        for a in -1..=1i64 {
            for b in -1..=1i64 {
                let s = (a * v1.0 + b * v2.0, a * v1.1 + b * v2.1);
                let shifted: [IPoint; 3] = std::array::from_fn(|i| add(t[i], s));
                let Some(span) = clip_segment_triangle(x, r, &shifted) else {
                    continue;
                };
                if span.is_degenerate() {
                    continue;
                }
                let mid = point_at(x, r, span.mid());
                let w = match locate_in_triangle(mid, &shifted) {
                    Location::Inside => Rat::from_integer(1),
                    Location::Outside => unreachable!("midpoint of a clipped span is in the triangle"),
                    _ => Rat::new(1, 2),
                };
                total += span.len() * w;
            }
        }
    }
    total
}
