//! The periodic triangular lattice: cells, sites, vacancies, lattice
//! directions and their six-fold orbits, and finite differences.
//!
//! Sites carry integer coordinates `(i, j)` with Cartesian position
//! `x = i a1 + j a2`, `a1 = (1, 0)`, `a2 = (1/2, sqrt(3)/2)`. The squared
//! Euclidean length of `(i, j)` is the integer `i^2 + i j + j^2`, so shells
//! and symmetry orbits are classified without floating point.
//!
//! Two periodic cells are supported:
//!
//! * the *square* cell `A6 (0, N]^2` with `N^2` sites and period vectors
//!   `N a1`, `N a2` — the default for defect-index and Fourier computations;
//! * the *hexagonal* cell: the Wigner–Seitz hexagon (side `N`, `3 N^2` sites)
//!   of the sublattice spanned by `N (a1 + a2)` and `N (a3 - a1)`, used by the
//!   coupled meshes and experiments, whose defect sits at the cell centre.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::geom::{IPoint, RPoint};
use crate::{Error, Result};

/// `sqrt(3)`, the lattice's only irrationality.
pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Default reference-configuration interaction cutoff (bond list truncation).
pub const DEFAULT_CUTOFF: f64 = 3.1;

/// Cartesian coordinates of an integer lattice point.
#[inline]
pub fn cartesian(p: IPoint) -> [f64; 2] {
    [p.0 as f64 + 0.5 * p.1 as f64, 0.5 * SQRT3 * p.1 as f64]
}

/// Cartesian coordinates of a rational lattice point.
#[inline]
pub fn cartesian_rat(p: RPoint) -> [f64; 2] {
    let i = *p.0.numer() as f64 / *p.0.denom() as f64;
    let j = *p.1.numer() as f64 / *p.1.denom() as f64;
    [i + 0.5 * j, 0.5 * SQRT3 * j]
}

/// Integer squared Euclidean norm of a lattice vector: `i^2 + i j + j^2`.
#[inline]
pub fn norm2_int(p: IPoint) -> i64 {
    p.0 * p.0 + p.0 * p.1 + p.1 * p.1
}

/// Rotation by 60 degrees in lattice coordinates: `(i, j) -> (-j, i + j)`.
#[inline]
pub fn rot60(p: IPoint) -> IPoint {
    (-p.1, p.0 + p.1)
}

/// Hexagonal norm `max(|i|, |j|, |i+j|)`: the radius of the smallest
/// lattice-aligned hexagon (centred at the origin) containing the point.
#[inline]
pub fn hexnorm(p: IPoint) -> i64 {
    p.0.abs().max(p.1.abs()).max((p.0 + p.1).abs())
}

/// Corners of the lattice-aligned regular hexagon of radius 1, CCW from `a1`.
pub const HEX_CORNERS: [IPoint; 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Corners of the lattice-aligned hexagon of radius `k`, CCW.
pub fn hexagon_corners(k: i64) -> [IPoint; 6] {
    HEX_CORNERS.map(|c| (k * c.0, k * c.1))
}

/// The shape of a periodic cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CellKind {
    Square,
    Hexagonal,
}

/// A periodic cell of the triangular lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    kind: CellKind,
    n: i64,
}

impl Cell {
    /// Square cell `A6 (0, N]^2`.
    pub fn square(n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("square cell needs N >= 2, got {n}")));
        }
        Ok(Cell { kind: CellKind::Square, n })
    }

    /// Hexagonal Wigner–Seitz cell of side `N` centred at the origin.
    pub fn hexagonal(n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("hexagonal cell needs N >= 2, got {n}")));
        }
        Ok(Cell { kind: CellKind::Hexagonal, n })
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    /// The periodicity parameter `N`.
    pub fn n(&self) -> i64 {
        self.n
    }

    /// Number of lattice sites in the cell.
    pub fn site_count(&self) -> usize {
        match self.kind {
            CellKind::Square => (self.n * self.n) as usize,
            CellKind::Hexagonal => (3 * self.n * self.n) as usize,
        }
    }

    /// Integer period vectors (the cell tiles the plane under their span).
    pub fn period_vectors(&self) -> [IPoint; 2] {
        match self.kind {
            CellKind::Square => [(self.n, 0), (0, self.n)],
            CellKind::Hexagonal => [(self.n, self.n), (-self.n, 2 * self.n)],
        }
    }

    /// Cartesian area of the cell.
    pub fn area(&self) -> f64 {
        let [u, v] = self.period_vectors();
        let det = (u.0 * v.1 - u.1 * v.0) as f64;
        det * 0.5 * SQRT3
    }

    /// Canonical representative of the periodicity class of `p`.
    ///
    /// Square cells use representatives in `[1, N]^2` (the sites of
    /// `A6 (0, N]^2`); hexagonal cells use the representative inside the
    /// closed Wigner–Seitz hexagon with the lexicographically smallest
    /// `(hexnorm, i, j)` key, which makes boundary ties deterministic.
    pub fn wrap(&self, p: IPoint) -> IPoint {
        match self.kind {
            CellKind::Square => {
                let n = self.n;
                ((p.0 - 1).rem_euclid(n) + 1, (p.1 - 1).rem_euclid(n) + 1)
            }
            CellKind::Hexagonal => {
                let n = self.n;
                // Approximate reduction by the sublattice C = [v1 v2],
                // v1 = (N, N), v2 = (-N, 2N); C^{-1} = [[2, 1], [-1, 1]]/(3N).
                let alpha = (2 * p.0 + p.1) as f64 / (3 * n) as f64;
                let beta = (-p.0 + p.1) as f64 / (3 * n) as f64;
                let (ka, kb) = (alpha.round() as i64, beta.round() as i64);
                let q0 = (p.0 - ka * n + kb * n, p.1 - ka * n - 2 * kb * n);
                let mut best: Option<IPoint> = None;
                for da in -1..=1 {
                    for db in -1..=1 {
                        let q = (q0.0 - da * n + db * n, q0.1 - da * n - 2 * db * n);
                        if hexnorm(q) > n {
                            continue;
                        }
                        let better = match best {
                            None => true,
                            Some(b) => (hexnorm(q), q.0, q.1) < (hexnorm(b), b.0, b.1),
                        };
                        if better {
                            best = Some(q);
                        }
                    }
                }
                best.expect("hexagonal wrap: reduction must land within one cell of the WS hexagon")
            }
        }
    }

    /// Whether `p` is the canonical representative of its class.
    pub fn is_canonical(&self, p: IPoint) -> bool {
        self.wrap(p) == p
    }

    /// All canonical sites, in a deterministic order.
    ///
    /// Square cells enumerate `(i, j)` row-major with `j` outer; hexagonal
    /// cells enumerate the canonical representatives sorted by `(j, i)`.
    pub fn sites(&self) -> Vec<IPoint> {
        match self.kind {
            CellKind::Square => {
                let n = self.n;
                let mut out = Vec::with_capacity((n * n) as usize);
                for j in 1..=n {
                    for i in 1..=n {
                        out.push((i, j));
                    }
                }
                out
            }
            CellKind::Hexagonal => {
                let n = self.n;
                let mut out = Vec::with_capacity((3 * n * n) as usize);
                for j in -n..=n {
                    for i in -n..=n {
                        let p = (i, j);
                        if hexnorm(p) <= n && self.wrap(p) == p {
                            out.push(p);
                        }
                    }
                }
                out
            }
        }
    }

    /// Bounding box `(imin, imax, jmin, jmax)` of canonical representatives.
    pub fn rep_bounds(&self) -> (i64, i64, i64, i64) {
        match self.kind {
            CellKind::Square => (1, self.n, 1, self.n),
            CellKind::Hexagonal => (-self.n, self.n, -self.n, self.n),
        }
    }
}

/// A direction of the lattice (a nonzero integer vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeDirection {
    /// Integer coordinates w.r.t. `(a1, a2)`.
    pub coords: IPoint,
    /// Cartesian vector.
    pub cart: [f64; 2],
    /// Euclidean length.
    pub length: f64,
}

impl LatticeDirection {
    pub fn new(coords: IPoint) -> Self {
        assert!(coords != (0, 0), "lattice direction must be nonzero");
        let cart = cartesian(coords);
        let length = (norm2_int(coords) as f64).sqrt();
        LatticeDirection { coords, cart, length }
    }
}

/// One orbit of the 60-degree rotation acting on lattice directions.
#[derive(Debug, Clone)]
pub struct Orbit {
    /// Canonical representative: the member with angle in `[0, pi/3)`.
    pub rep: IPoint,
    /// Integer squared length.
    pub norm2: i64,
    /// Euclidean length `l_n`.
    pub length: f64,
    /// The six members `Q6^j rep`, starting at the representative.
    pub members: [IPoint; 6],
}

/// Decomposition of all lattice directions with `|r| <= cutoff` into orbits
/// of the six-fold rotation, sorted by nondecreasing length (ties by angle of
/// the representative).
#[derive(Debug, Clone)]
pub struct OrbitDecomposition {
    pub cutoff: f64,
    pub orbits: Vec<Orbit>,
}

impl OrbitDecomposition {
    /// Enumerates and groups all directions with `|r| <= cutoff`.
    pub fn up_to(cutoff: f64) -> Result<Self> {
        if !(cutoff >= 1.0) {
            return Err(Error::invalid(format!("orbit cutoff must be >= 1, got {cutoff}")));
        }
        let max_n2 = (cutoff * cutoff).floor() as i64;
        let bound = cutoff.ceil() as i64 + 1;
        let mut orbits = Vec::new();
        for i in 1..=bound {
            for j in 0..=bound {
                let p = (i, j);
                let n2 = norm2_int(p);
                if n2 == 0 || n2 > max_n2 {
                    continue;
                }
                // Representative cone: angle in [0, 60 degrees), i.e. the open
                // sector from a1 (inclusive) to a2 (exclusive): i >= 1, j >= 0.
                let mut members = [p; 6];
                for k in 1..6 {
                    members[k] = rot60(members[k - 1]);
                }
                orbits.push(Orbit {
                    rep: p,
                    norm2: n2,
                    length: (n2 as f64).sqrt(),
                    members,
                });
            }
        }
        // Sort by length, then by angle of the representative within the cone
        // (exact comparison via the cross product, whose Cartesian sign equals
        // its lattice-coordinate sign).
        orbits.sort_by(|a, b| {
            a.norm2
                .cmp(&b.norm2)
                .then_with(|| 0i64.cmp(&(a.rep.0 * b.rep.1 - a.rep.1 * b.rep.0)))
        });
        Ok(OrbitDecomposition { cutoff, orbits })
    }

    /// The six nearest-neighbour directions.
    pub fn nearest_neighbours() -> [IPoint; 6] {
        let mut out = [(1, 0); 6];
        for k in 1..6 {
            out[k] = rot60(out[k - 1]);
        }
        out
    }

    /// All directions in all orbits (for cutoff 3.1: 36 of them).
    pub fn directions(&self) -> Vec<LatticeDirection> {
        self.orbits
            .iter()
            .flat_map(|o| o.members.iter().map(|&m| LatticeDirection::new(m)))
            .collect()
    }

    /// Lengths `l_n` of the orbits, nondecreasing.
    pub fn lengths(&self) -> Vec<f64> {
        self.orbits.iter().map(|o| o.length).collect()
    }
}

/// Checks the two hexagonal summation identities for a matrix `G` and a unit
/// vector `r`: returns the sums `(sum_j |G Q6^j r|^2, sum_j [(Q6^j r)^T G (Q6^j r)]^2)`.
///
/// Callers compare against `3 |G|^2` and `(3/2) |G_sym|^2 + (3/4) (tr G)^2`.
pub fn hexagonal_identities_check(g: &nalgebra::Matrix2<f64>, r: &nalgebra::Vector2<f64>) -> (f64, f64) {
    let c = 0.5;
    let s = 0.5 * SQRT3;
    let q6 = nalgebra::Matrix2::new(c, -s, s, c);
    let mut v = *r;
    let mut quad = 0.0;
    let mut quart = 0.0;
    for _ in 0..6 {
        v = q6 * v;
        let gv = g * v;
        quad += gv.norm_squared();
        let form = v.dot(&gv);
        quart += form * form;
    }
    (quad, quart)
}

/// A set of vacancy sites, as read from a pattern file (unwrapped).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VacancyPattern {
    pub sites: Vec<IPoint>,
}

impl VacancyPattern {
    /// No vacancies.
    pub fn empty() -> Self {
        VacancyPattern { sites: Vec::new() }
    }

    /// A single vacancy at the given site.
    pub fn single(at: IPoint) -> Self {
        VacancyPattern { sites: vec![at] }
    }

    /// Two adjacent vacancies along `a1` starting at the given site.
    pub fn divacancy(at: IPoint) -> Self {
        VacancyPattern { sites: vec![at, (at.0 + 1, at.1)] }
    }

    /// A straight row of `len` vacancies along `a1` starting at the given
    /// site (the collapsed-cavity configuration uses `len = 8`).
    pub fn row(at: IPoint, len: usize) -> Self {
        VacancyPattern {
            sites: (0..len as i64).map(|k| (at.0 + k, at.1)).collect(),
        }
    }

    /// Parses the plain-text format: one `i j` pair per line, `#` comments.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut sites = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse_coord = |tok: Option<&str>| -> Result<i64> {
                tok.ok_or_else(|| {
                    Error::parse(origin, format!("line {}: expected `i j`", lineno + 1))
                })?
                .parse::<i64>()
                .map_err(|e| Error::parse(origin, format!("line {}: {e}", lineno + 1)))
            };
            let i = parse_coord(it.next())?;
            let j = parse_coord(it.next())?;
            if it.next().is_some() {
                return Err(Error::parse(
                    origin,
                    format!("line {}: trailing tokens after `i j`", lineno + 1),
                ));
            }
            sites.push((i, j));
        }
        Ok(VacancyPattern { sites })
    }

    /// Reads a pattern file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Serializes to the plain-text format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# vacancy pattern: one `i j` site per line\n");
        for s in &self.sites {
            writeln!(out, "{} {}", s.0, s.1).unwrap();
        }
        out
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Classification of a canonical site within a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SiteSlot {
    NotARep,
    Vacancy,
    Live(u32),
}

/// The periodic lattice with a vacancy set: the computational domain.
///
/// Live sites (the atoms that exist) get contiguous indices `0..n_live`;
/// vacancy sites remain addressable as lattice points but carry no index.
#[derive(Debug, Clone)]
pub struct LatticeDomain {
    cell: Cell,
    all_sites: Vec<IPoint>,
    live_sites: Vec<IPoint>,
    vacancies: Vec<IPoint>,
    grid: Vec<SiteSlot>,
    bounds: (i64, i64, i64, i64),
}

/// Builds the square-cell domain (the spec-level default constructor).
pub fn build_domain(n: i64, vacancy_pattern: &[IPoint]) -> Result<LatticeDomain> {
    LatticeDomain::square(n, vacancy_pattern)
}

impl LatticeDomain {
    pub fn square(n: i64, vacancy_pattern: &[IPoint]) -> Result<Self> {
        if n < 4 {
            return Err(Error::invalid(format!("domain needs N >= 4, got {n}")));
        }
        Self::new(Cell::square(n)?, vacancy_pattern)
    }

    pub fn hexagonal(n: i64, vacancy_pattern: &[IPoint]) -> Result<Self> {
        if n < 4 {
            return Err(Error::invalid(format!("domain needs N >= 4, got {n}")));
        }
        Self::new(Cell::hexagonal(n)?, vacancy_pattern)
    }

    pub fn new(cell: Cell, vacancy_pattern: &[IPoint]) -> Result<Self> {
        const COORD_LIMIT: i64 = 1 << 24;
        let mut vacancies = BTreeSet::new();
        for &v in vacancy_pattern {
            if v.0.abs() > COORD_LIMIT || v.1.abs() > COORD_LIMIT {
                return Err(Error::invalid(format!(
                    "vacancy coordinate ({}, {}) outside representable range",
                    v.0, v.1
                )));
            }
            let w = cell.wrap(v);
            if !vacancies.insert(w) {
                return Err(Error::invalid(format!(
                    "duplicate vacancy at ({}, {}) after periodic wrap",
                    w.0, w.1
                )));
            }
        }
        let vacancies: Vec<IPoint> = vacancies.into_iter().collect();

        let all_sites = cell.sites();
        let bounds = cell.rep_bounds();
        let (imin, imax, jmin, jmax) = bounds;
        let w = (imax - imin + 1) as usize;
        let h = (jmax - jmin + 1) as usize;
        let mut grid = vec![SiteSlot::NotARep; w * h];
        let slot = |p: IPoint| -> usize {
            (p.0 - imin) as usize + w * ((p.1 - jmin) as usize)
        };
        for &v in &vacancies {
            grid[slot(v)] = SiteSlot::Vacancy;
        }
        let mut live_sites = Vec::with_capacity(all_sites.len() - vacancies.len());
        for &p in &all_sites {
            if grid[slot(p)] == SiteSlot::Vacancy {
                continue;
            }
            grid[slot(p)] = SiteSlot::Live(live_sites.len() as u32);
            live_sites.push(p);
        }
        Ok(LatticeDomain { cell, all_sites, live_sites, vacancies, grid, bounds })
    }

    pub fn cell(&self) -> Cell {
        self.cell
    }

    /// All sites of the cell (vacancies included), deterministic order.
    pub fn all_sites(&self) -> &[IPoint] {
        &self.all_sites
    }

    /// Live sites in index order.
    pub fn live_sites(&self) -> &[IPoint] {
        &self.live_sites
    }

    pub fn vacancies(&self) -> &[IPoint] {
        &self.vacancies
    }

    pub fn n_live(&self) -> usize {
        self.live_sites.len()
    }

    fn slot(&self, p: IPoint) -> SiteSlot {
        let (imin, imax, jmin, jmax) = self.bounds;
        debug_assert!(p.0 >= imin && p.0 <= imax && p.1 >= jmin && p.1 <= jmax);
        let w = (imax - imin + 1) as usize;
        self.grid[(p.0 - imin) as usize + w * ((p.1 - jmin) as usize)]
    }

    /// Live-site index of a (possibly unwrapped) lattice point; `None` for
    /// vacancy sites.
    pub fn live_index(&self, p: IPoint) -> Option<usize> {
        match self.slot(self.cell.wrap(p)) {
            SiteSlot::Live(k) => Some(k as usize),
            SiteSlot::Vacancy => None,
            SiteSlot::NotARep => unreachable!("wrap always lands on a representative"),
        }
    }

    pub fn is_vacancy(&self, p: IPoint) -> bool {
        self.slot(self.cell.wrap(p)) == SiteSlot::Vacancy
    }

    /// Finite difference `D_b v = v(x + r) - v(x)` of a periodic site field.
    ///
    /// `v` is indexed by live-site index. Errors if either endpoint is a
    /// vacancy site: such differences are only defined after applying the
    /// extension operator from the defects module.
    pub fn finite_difference(&self, v: &[[f64; 2]], x: IPoint, r: IPoint) -> Result<[f64; 2]> {
        debug_assert_eq!(v.len(), self.n_live());
        let head = self.live_index((x.0 + r.0, x.1 + r.1)).ok_or_else(|| {
            Error::invalid(format!(
                "finite difference endpoint ({}, {}) is a vacancy: extend the field first",
                x.0 + r.0,
                x.1 + r.1
            ))
        })?;
        let tail = self.live_index(x).ok_or_else(|| {
            Error::invalid(format!(
                "finite difference base ({}, {}) is a vacancy: extend the field first",
                x.0, x.1
            ))
        })?;
        Ok([v[head][0] - v[tail][0], v[head][1] - v[tail][1]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integer_norm_matches_cartesian() {
        for i in -5..=5i64 {
            for j in -5..=5i64 {
                let c = cartesian((i, j));
                let n2 = c[0] * c[0] + c[1] * c[1];
                assert_relative_eq!(n2, norm2_int((i, j)) as f64, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn rot60_is_order_six_and_isometric() {
        for i in -4..=4i64 {
            for j in -4..=4i64 {
                if (i, j) == (0, 0) {
                    continue;
                }
                let mut p = (i, j);
                for _ in 0..6 {
                    let q = rot60(p);
                    assert_eq!(norm2_int(q), norm2_int(p));
                    p = q;
                }
                assert_eq!(p, (i, j));
            }
        }
    }

    #[test]
    fn square_cell_wrap_and_sites() {
        let cell = Cell::square(12).unwrap();
        assert_eq!(cell.sites().len(), 144);
        assert_eq!(cell.wrap((13, 1)), (1, 1));
        assert_eq!(cell.wrap((0, 5)), (12, 5));
        assert_eq!(cell.wrap((12, 12)), (12, 12));
        // Idempotence and period invariance.
        for &p in &[(3, 7), (-10, 40), (0, 0), (25, -13)] {
            let w = cell.wrap(p);
            assert_eq!(cell.wrap(w), w);
            assert_eq!(cell.wrap((p.0 + 12, p.1)), w);
            assert_eq!(cell.wrap((p.0, p.1 + 12)), w);
        }
    }

    #[test]
    fn hexagonal_cell_site_count_and_wrap() {
        for n in [2i64, 3, 5, 8] {
            let cell = Cell::hexagonal(n).unwrap();
            let sites = cell.sites();
            assert_eq!(sites.len(), (3 * n * n) as usize, "N = {n}");
            // Canonical sites wrap to themselves; period shifts collapse.
            let [v1, v2] = cell.period_vectors();
            for &p in &sites {
                assert_eq!(cell.wrap(p), p);
                assert_eq!(cell.wrap((p.0 + v1.0, p.1 + v1.1)), p);
                assert_eq!(cell.wrap((p.0 - v2.0, p.1 - v2.1)), p);
                assert!(hexnorm(p) <= n);
            }
        }
    }

    #[test]
    fn hexagonal_wrap_is_a_group_action() {
        let cell = Cell::hexagonal(4).unwrap();
        let shifts = [(1, 0), (0, 1), (-3, 2), (7, -5), (4, 4)];
        for &p in &[(0, 0), (4, 0), (-4, 4), (2, -3), (11, 9)] {
            for &z in &shifts {
                let lhs = cell.wrap((p.0 + z.0, p.1 + z.1));
                let w = cell.wrap(p);
                let rhs = cell.wrap((w.0 + z.0, w.1 + z.1));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn orbit_examples_from_small_cutoffs() {
        let one = OrbitDecomposition::up_to(1.0).unwrap();
        assert_eq!(one.orbits.len(), 1);
        assert_eq!(one.orbits[0].length, 1.0);
        assert_eq!(one.directions().len(), 6);

        let two = OrbitDecomposition::up_to(2.0).unwrap();
        assert_eq!(two.orbits.len(), 3);
        assert_eq!(two.directions().len(), 18);

        let full = OrbitDecomposition::up_to(3.1).unwrap();
        let lengths = full.lengths();
        let expected = [1.0, 3f64.sqrt(), 2.0, 7f64.sqrt(), 7f64.sqrt(), 3.0];
        assert_eq!(lengths.len(), expected.len());
        for (got, want) in lengths.iter().zip(expected) {
            assert_relative_eq!(got, &want, max_relative = 1e-15);
        }
        assert_eq!(full.directions().len(), 36);
    }

    #[test]
    fn orbits_partition_all_directions_exactly() {
        // Brute-force oracle: every lattice point with 0 < |r| <= cutoff occurs
        // in exactly one orbit.
        let cutoff = 3.1;
        let dec = OrbitDecomposition::up_to(cutoff).unwrap();
        let max_n2 = (cutoff * cutoff).floor() as i64;
        let mut expected = BTreeSet::new();
        for i in -4..=4i64 {
            for j in -4..=4i64 {
                let n2 = norm2_int((i, j));
                if n2 > 0 && n2 <= max_n2 {
                    expected.insert((i, j));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for orbit in &dec.orbits {
            // Representative in the canonical cone.
            assert!(orbit.rep.0 >= 1 && orbit.rep.1 >= 0);
            for &m in &orbit.members {
                assert_eq!(norm2_int(m), orbit.norm2);
                assert!(seen.insert(m), "direction {m:?} appears in two orbits");
            }
            // Q6 applied six times returns the representative (exact).
            let mut p = orbit.rep;
            for _ in 0..6 {
                p = rot60(p);
            }
            assert_eq!(p, orbit.rep);
        }
        assert_eq!(seen, expected);
    }

    #[test]
    fn hexagonal_identity_examples() {
        let (quad, quart) = hexagonal_identities_check(
            &nalgebra::Matrix2::identity(),
            &nalgebra::Vector2::new(1.0, 0.0),
        );
        assert_relative_eq!(quad, 6.0, max_relative = 1e-14);
        assert_relative_eq!(quart, 6.0, max_relative = 1e-14);

        let (quad, _) = hexagonal_identities_check(
            &nalgebra::Matrix2::new(1.0, 0.0, 0.0, 0.0),
            &nalgebra::Vector2::new(1.0, 0.0),
        );
        assert_relative_eq!(quad, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn domain_counts_match_vacancy_sets() {
        assert_eq!(build_domain(12, &[(3, 3)]).unwrap().n_live(), 143);
        assert_eq!(build_domain(12, &[]).unwrap().n_live(), 144);
        // Two distinct vacancies (as in the two-defect illustration).
        assert_eq!(build_domain(12, &[(3, 3), (9, 8)]).unwrap().n_live(), 142);
    }

    #[test]
    fn duplicate_vacancies_after_wrap_are_rejected() {
        let err = build_domain(12, &[(3, 3), (15, 3)]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "got {err:?}");
    }

    #[test]
    fn finite_difference_examples() {
        let dom = build_domain(8, &[]).unwrap();
        let n = dom.n_live();
        // Deterministic pseudo-random periodic field.
        let u: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = k as f64;
                [(t * 0.7).sin(), (t * 1.3).cos()]
            })
            .collect();
        for &x in &[(1, 1), (5, 7), (8, 8)] {
            // Telescoping: D_{a1} u(x) + D_{a1} u(x+a1) = D_{2 a1} u(x).
            let d1 = dom.finite_difference(&u, x, (1, 0)).unwrap();
            let d2 = dom.finite_difference(&u, (x.0 + 1, x.1), (1, 0)).unwrap();
            let d = dom.finite_difference(&u, x, (2, 0)).unwrap();
            assert_relative_eq!(d1[0] + d2[0], d[0], epsilon = 1e-15);
            assert_relative_eq!(d1[1] + d2[1], d[1], epsilon = 1e-15);
            // Periodicity: same difference one period away.
            let dp = dom.finite_difference(&u, (x.0 + 8, x.1), (2, 0)).unwrap();
            assert_eq!(d, dp);
        }
    }

    #[test]
    fn finite_difference_at_vacancy_errors() {
        let dom = build_domain(8, &[(4, 4)]).unwrap();
        let u = vec![[0.0; 2]; dom.n_live()];
        assert!(dom.finite_difference(&u, (3, 4), (1, 0)).is_err());
        assert!(dom.finite_difference(&u, (4, 4), (1, 0)).is_err());
        assert!(dom.finite_difference(&u, (3, 4), (-1, 0)).is_ok());
    }

    #[test]
    fn pattern_file_roundtrip_with_comments() {
        let text = "# two vacancies\n3 3   # the first\n\n9 8\n";
        let pat = VacancyPattern::parse(text, Path::new("inline")).unwrap();
        assert_eq!(pat.sites, vec![(3, 3), (9, 8)]);
        let back = VacancyPattern::parse(&pat.to_text(), Path::new("inline")).unwrap();
        assert_eq!(back, pat);
    }

    #[test]
    fn pattern_generators() {
        assert_eq!(VacancyPattern::divacancy((0, 0)).sites, vec![(0, 0), (1, 0)]);
        assert_eq!(VacancyPattern::row((0, 0), 8).sites.len(), 8);
    }
}
