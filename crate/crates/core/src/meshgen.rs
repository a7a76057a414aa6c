//! Randomized conforming triangulations of the unit square.
//!
//! Meshes start from a uniform grid of `c x c` square cells. Interior
//! vertices are displaced by independent uniform offsets, boundary vertices
//! slide along their side of the square, corners stay fixed. Each cell is
//! then split along its shorter diagonal. The grid spacing is chosen so that
//! no edge can exceed `h_max` whatever the offsets are, which makes the size
//! bound hold by construction.
//!
//! All draws come from [`crate::seed`], keyed by `(seed, vertex, component,
//! attempt)`, so a mesh is a pure function of its [`MeshParams`].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::seed;

/// Upper bound accepted for the jitter fraction.
pub const MAX_JITTER: f64 = 0.45;

/// Number of redraw rounds before a quality failure is reported.
pub const MAX_REPAIR_ROUNDS: u32 = 50;

/// Tolerance for deciding that a coordinate lies on the boundary of the square.
const BOUNDARY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("mesh size must be positive and finite, got {0}")]
    InvalidMeshSize(f64),
    #[error("jitter must lie in [0, {max}], got {value}", max = MAX_JITTER)]
    InvalidJitter { value: f64 },
    #[error("minimum angle must lie in (0, 60) degrees, got {0}")]
    InvalidMinAngle(f64),
    #[error(
        "mesh quality repair failed after {rounds} rounds: worst angle {worst_angle_deg:.3} deg < {required_deg} deg"
    )]
    Quality {
        rounds: u32,
        worst_angle_deg: f64,
        required_deg: f64,
    },
    #[error("invalid mesh: {0}")]
    Invalid(&'static str),
}

/// Parameters of the randomized generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    /// Target maximum element diameter.
    pub h_max: f64,
    pub seed: u64,
    /// Interior offsets are drawn in `[-jitter * s, jitter * s]` per axis,
    /// `s` being the grid spacing.
    pub jitter: f64,
    pub min_angle_deg: f64,
}

impl MeshParams {
    pub const DEFAULT_MIN_ANGLE_DEG: f64 = 20.0;

    /// Structured parameters (`jitter = 0`) with the default angle floor.
    pub fn new(h_max: f64, seed: u64) -> Self {
        Self {
            h_max,
            seed,
            jitter: 0.0,
            min_angle_deg: Self::DEFAULT_MIN_ANGLE_DEG,
        }
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn with_min_angle(mut self, min_angle_deg: f64) -> Self {
        self.min_angle_deg = min_angle_deg;
        self
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if !(self.h_max.is_finite() && self.h_max > 0.0) {
            return Err(MeshError::InvalidMeshSize(self.h_max));
        }
        if !(0.0..=MAX_JITTER).contains(&self.jitter) {
            return Err(MeshError::InvalidJitter { value: self.jitter });
        }
        if !(self.min_angle_deg > 0.0 && self.min_angle_deg < 60.0) {
            return Err(MeshError::InvalidMinAngle(self.min_angle_deg));
        }
        Ok(())
    }

    /// Number of grid cells along each side of the square.
    ///
    /// A jittered cell diagonal is at most `sqrt(2) * (1 + 2 * jitter) * s`
    /// long, and every other edge is shorter than that.
    pub fn cells_per_side(&self) -> usize {
        if self.h_max >= SQRT_2 {
            return 1;
        }
        let reach = SQRT_2 * (1.0 + 2.0 * self.jitter);
        let mut cells = libm::ceil(reach / self.h_max).max(1.0) as usize;
        while reach / cells as f64 > self.h_max {
            cells += 1;
        }
        cells
    }
}

/// A conforming triangulation of `[0, 1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_vertices: Vec<usize>,
    h_actual: f64,
    seed: u64,
}

impl Mesh {
    /// Builds a mesh from explicit data. Triangles must be counterclockwise
    /// with positive area; boundary vertices are detected from coordinates.
    pub fn from_raw(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        seed: u64,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Invalid("no triangles"));
        }
        let mut h_actual = 0.0f64;
        for tri in &triangles {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::Invalid("vertex index out of range"));
            }
            let p = tri.map(|v| vertices[v]);
            if signed_area(p[0], p[1], p[2]) <= 0.0 {
                return Err(MeshError::Invalid("triangle with non-positive signed area"));
            }
            h_actual = h_actual.max(triangle_diameter(p));
        }
        let boundary_vertices = vertices
            .iter()
            .enumerate()
            .filter(|(_, p)| on_boundary(**p))
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            vertices,
            triangles,
            boundary_vertices,
            h_actual,
            seed,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Sorted indices of the vertices lying on the boundary of the square.
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    /// Realized maximum element diameter.
    pub fn h_actual(&self) -> f64 {
        self.h_actual
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }
}

/// Summary quality figures of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub num_triangles: usize,
    pub h_actual: f64,
    /// Smallest interior angle over all triangles, in degrees.
    pub min_angle_deg: f64,
    /// Largest `diameter / (2 sqrt(3) inradius)`; 1 for an equilateral triangle.
    pub max_aspect_ratio: f64,
}

pub fn mesh_statistics(mesh: &Mesh) -> MeshStats {
    let mut min_angle_deg = f64::INFINITY;
    let mut max_aspect_ratio = 0.0f64;
    for t in 0..mesh.num_triangles() {
        let p = mesh.triangle_points(t);
        min_angle_deg = min_angle_deg.min(min_angle(p));
        max_aspect_ratio = max_aspect_ratio.max(aspect_ratio(p));
    }
    MeshStats {
        num_triangles: mesh.num_triangles(),
        h_actual: mesh.h_actual,
        min_angle_deg,
        max_aspect_ratio,
    }
}

/// Generates a randomized mesh. See the module documentation for the scheme.
pub fn generate_mesh(params: &MeshParams) -> Result<Mesh, MeshError> {
    params.validate()?;
    let cells = params.cells_per_side();
    let grid = Grid { cells };
    let nv = grid.num_vertices();

    let mut attempts = vec![0u32; nv];
    let mut vertices: Vec<[f64; 2]> = (0..nv)
        .map(|v| grid.position(v, params, 0))
        .collect();
    let mut marked = vec![false; nv];

    for round in 0..=MAX_REPAIR_ROUNDS {
        let triangles = grid.triangulate(&vertices);
        let mut worst = f64::INFINITY;
        let mut any_bad = false;
        for tri in &triangles {
            let p = tri.map(|v| vertices[v]);
            let angle = if signed_area(p[0], p[1], p[2]) > 0.0 {
                min_angle(p)
            } else {
                0.0
            };
            if angle < params.min_angle_deg {
                any_bad = true;
                worst = worst.min(angle);
                for &v in tri {
                    if grid.is_movable(v) {
                        marked[v] = true;
                    }
                }
            }
        }

        if !any_bad {
            let h_actual = triangles
                .iter()
                .map(|tri| triangle_diameter(tri.map(|v| vertices[v])))
                .fold(0.0, f64::max);
            if cells > 1 && h_actual > params.h_max {
                return Err(MeshError::Invalid("realized mesh size exceeds h_max"));
            }
            let boundary_vertices = (0..nv).filter(|&v| grid.is_boundary(v)).collect();
            return Ok(Mesh {
                vertices,
                triangles,
                boundary_vertices,
                h_actual,
                seed: params.seed,
            });
        }

        let movable = params.jitter > 0.0 && marked.iter().any(|&m| m);
        if round == MAX_REPAIR_ROUNDS || !movable {
            return Err(MeshError::Quality {
                rounds: round,
                worst_angle_deg: worst,
                required_deg: params.min_angle_deg,
            });
        }
        for v in 0..nv {
            if marked[v] {
                marked[v] = false;
                attempts[v] += 1;
                vertices[v] = grid.position(v, params, attempts[v]);
            }
        }
    }
    unreachable!("repair loop returns on its last round")
}

/// Index arithmetic for the `(cells + 1)^2` vertex lattice.
struct Grid {
    cells: usize,
}

impl Grid {
    fn num_vertices(&self) -> usize {
        (self.cells + 1) * (self.cells + 1)
    }

    fn ij(&self, v: usize) -> (usize, usize) {
        (v % (self.cells + 1), v / (self.cells + 1))
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * (self.cells + 1) + i
    }

    fn is_boundary(&self, v: usize) -> bool {
        let (i, j) = self.ij(v);
        i == 0 || j == 0 || i == self.cells || j == self.cells
    }

    fn is_corner(&self, v: usize) -> bool {
        let (i, j) = self.ij(v);
        (i == 0 || i == self.cells) && (j == 0 || j == self.cells)
    }

    fn is_movable(&self, v: usize) -> bool {
        !self.is_corner(v)
    }

    fn position(&self, v: usize, params: &MeshParams, attempt: u32) -> [f64; 2] {
        let (i, j) = self.ij(v);
        let c = self.cells as f64;
        let base = [i as f64 / c, j as f64 / c];
        if params.jitter == 0.0 || self.is_corner(v) {
            return base;
        }
        let amplitude = params.jitter / c;
        let offset = |component: u64| {
            let u = seed::unit_f64(params.seed, &[v as u64, component, attempt as u64]);
            amplitude * (2.0 * u - 1.0)
        };
        let on_vertical_side = i == 0 || i == self.cells;
        let on_horizontal_side = j == 0 || j == self.cells;
        match (on_vertical_side, on_horizontal_side) {
            (false, false) => [base[0] + offset(0), base[1] + offset(1)],
            (false, true) => [base[0] + offset(0), base[1]],
            (true, false) => [base[0], base[1] + offset(1)],
            (true, true) => base,
        }
    }

    fn triangulate(&self, vertices: &[[f64; 2]]) -> Vec<[usize; 3]> {
        let mut triangles = Vec::with_capacity(2 * self.cells * self.cells);
        for j in 0..self.cells {
            for i in 0..self.cells {
                let a = self.index(i, j);
                let b = self.index(i + 1, j);
                let c = self.index(i + 1, j + 1);
                let d = self.index(i, j + 1);
                if dist2(vertices[a], vertices[c]) <= dist2(vertices[b], vertices[d]) {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                } else {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
            }
        }
        triangles
    }
}

pub(crate) fn on_boundary(p: [f64; 2]) -> bool {
    p.iter()
        .any(|&x| x.abs() <= BOUNDARY_TOL || (x - 1.0).abs() <= BOUNDARY_TOL)
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Twice the signed area is `cross(b - a, c - a)`; this returns the area.
pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Longest edge of a triangle.
pub fn triangle_diameter(p: [[f64; 2]; 3]) -> f64 {
    libm::sqrt(
        dist2(p[0], p[1])
            .max(dist2(p[1], p[2]))
            .max(dist2(p[2], p[0])),
    )
}

/// Smallest interior angle in degrees.
pub fn min_angle(p: [[f64; 2]; 3]) -> f64 {
    let mut smallest = f64::INFINITY;
    for corner in 0..3 {
        let o = p[corner];
        let a = p[(corner + 1) % 3];
        let b = p[(corner + 2) % 3];
        let u = [a[0] - o[0], a[1] - o[1]];
        let w = [b[0] - o[0], b[1] - o[1]];
        let cross = u[0] * w[1] - u[1] * w[0];
        let dot = u[0] * w[0] + u[1] * w[1];
        smallest = smallest.min(libm::atan2(cross.abs(), dot));
    }
    smallest.to_degrees()
}

fn aspect_ratio(p: [[f64; 2]; 3]) -> f64 {
    let perimeter = libm::sqrt(dist2(p[0], p[1]))
        + libm::sqrt(dist2(p[1], p[2]))
        + libm::sqrt(dist2(p[2], p[0]));
    let inradius = 2.0 * signed_area(p[0], p[1], p[2]).abs() / perimeter;
    triangle_diameter(p) / (2.0 * libm::sqrt(3.0) * inradius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_mesh_is_two_triangles() {
        let mesh = generate_mesh(&MeshParams::new(1.5, 0)).unwrap();
        assert_eq!(mesh.num_triangles(), 2);
        assert_eq!(mesh.num_vertices(), 4);
        assert!((mesh.h_actual() - SQRT_2).abs() < 1e-15);
        assert_eq!(mesh.boundary_vertices(), &[0, 1, 2, 3]);
        let stats = mesh_statistics(&mesh);
        assert!((stats.min_angle_deg - 45.0).abs() < 1e-12);
        // right isoceles triangle with unit legs
        let expected = SQRT_2 / (2.0 * libm::sqrt(3.0) / (2.0 + SQRT_2));
        assert!((stats.max_aspect_ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn coarse_mesh_ignores_jitter() {
        let a = generate_mesh(&MeshParams::new(2.0, 3).with_jitter(0.3)).unwrap();
        let b = generate_mesh(&MeshParams::new(2.0, 4).with_jitter(0.3)).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.num_triangles(), 2);
    }

    #[test]
    fn structured_half_mesh_respects_size_bound() {
        let mesh = generate_mesh(&MeshParams::new(0.5, 7)).unwrap();
        // three cells per side: a spacing of 1/2 would give diagonals of 0.707
        assert_eq!(mesh.num_vertices(), 16);
        assert_eq!(mesh.num_triangles(), 18);
        assert!(mesh.h_actual() <= 0.5);
        assert!((mesh.h_actual() - SQRT_2 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_params() {
        assert_eq!(
            generate_mesh(&MeshParams::new(0.0, 0)),
            Err(MeshError::InvalidMeshSize(0.0))
        );
        assert!(matches!(
            generate_mesh(&MeshParams::new(0.1, 0).with_jitter(0.5)),
            Err(MeshError::InvalidJitter { .. })
        ));
        assert!(matches!(
            generate_mesh(&MeshParams::new(0.1, 0).with_min_angle(60.0)),
            Err(MeshError::InvalidMinAngle(_))
        ));
        assert!(generate_mesh(&MeshParams::new(f64::NAN, 0)).is_err());
    }

    #[test]
    fn structured_mesh_fails_an_unreachable_angle_floor() {
        let err = generate_mesh(&MeshParams::new(0.3, 0).with_min_angle(50.0)).unwrap_err();
        assert!(matches!(err, MeshError::Quality { .. }));
    }

    #[test]
    fn seeds_change_jittered_meshes() {
        let p = MeshParams::new(0.2, 1).with_jitter(0.3);
        let a = generate_mesh(&p).unwrap();
        let b = generate_mesh(&MeshParams { seed: 2, ..p }).unwrap();
        assert_eq!(a, generate_mesh(&p).unwrap());
        assert_ne!(a.vertices(), b.vertices());
    }

    #[test]
    fn from_raw_rejects_clockwise_triangles() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(Mesh::from_raw(v.clone(), vec![[0, 2, 1]], 0).is_err());
        let m = Mesh::from_raw(v, vec![[0, 1, 2]], 0).unwrap();
        assert!((m.h_actual() - SQRT_2).abs() < 1e-15);
    }
}
