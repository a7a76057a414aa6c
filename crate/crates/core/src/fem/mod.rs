//! Lagrange `P_k` (`k = 1..=4`) finite elements for `-Δu = q` with Dirichlet
//! data on triangulations of the unit square.
//!
//! Dirichlet conditions are imposed by interpolating `g` at the boundary
//! nodes and eliminating those unknowns, so the assembled system only covers
//! interior DOFs. Each triangle is mapped affinely from the reference
//! triangle and gradients are pulled back with the constant inverse-transpose
//! Jacobian.

mod dofmap;
mod quadrature;
mod reference;

use alloc::vec;
use alloc::vec::Vec;

pub use dofmap::{build_dof_map, DofMap};
pub use quadrature::{gauss_legendre_unit, QuadratureRule};
pub use reference::{ReferenceElement, Tabulation};

use crate::linalg::{cg_solve, CgOptions, CsrMatrix, LinalgError, SolveReport};
use crate::meshgen::Mesh;
use crate::problems::ProblemCase;

pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("element degree must be in 1..={max}, got {0}", max = MAX_DEGREE)]
    InvalidDegree(usize),
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(
        "CG did not converge: {} iterations, relative residual {:e}",
        .0.iterations,
        .0.relative_residual
    )]
    NotConverged(SolveReport),
}

/// Which quantity [`error_norm`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormKind {
    /// `sqrt(∫ e² + |∇e|²)`.
    #[default]
    Full,
    /// `sqrt(∫ |∇e|²)`.
    Seminorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemOptions {
    /// Assembly quadrature degree; defaults to `max(2k - 2, k + 6)`.
    pub quad_degree: Option<usize>,
    pub cg: CgOptions,
}

impl Default for FemOptions {
    fn default() -> Self {
        Self {
            quad_degree: None,
            cg: CgOptions::default(),
        }
    }
}

impl FemOptions {
    pub fn assembly_degree(&self, k: usize) -> usize {
        self.quad_degree
            .unwrap_or_else(|| (2 * k).saturating_sub(2).max(k + 6))
    }
}

/// Default degree of the rule used to measure errors: `2k + 4`, but never
/// below 10 so that coarse meshes are integrated to about 1e-12 relative.
pub fn error_quad_degree(k: usize) -> usize {
    (2 * k + 4).max(10)
}

/// Affine map of one triangle.
#[derive(Debug, Clone, Copy)]
struct AffineMap {
    origin: [f64; 2],
    jac: [[f64; 2]; 2],
    det: f64,
}

impl AffineMap {
    fn new(p: [[f64; 2]; 3]) -> Self {
        let jac = [
            [p[1][0] - p[0][0], p[2][0] - p[0][0]],
            [p[1][1] - p[0][1], p[2][1] - p[0][1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        Self {
            origin: p[0],
            jac,
            det,
        }
    }

    fn apply(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    /// `J^{-T} g`.
    fn pull_grad(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / self.det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det,
        ]
    }

    /// Symmetric `J^{-1} J^{-T}`, the metric contracting reference gradients.
    fn metric(&self) -> [f64; 3] {
        let j = &self.jac;
        let d2 = self.det * self.det;
        [
            (j[1][1] * j[1][1] + j[0][1] * j[0][1]) / d2,
            -(j[1][1] * j[1][0] + j[0][1] * j[0][0]) / d2,
            (j[1][0] * j[1][0] + j[0][0] * j[0][0]) / d2,
        ]
    }
}

/// Reference stiffness blocks `∫ ∂_a φ_i ∂_b φ_j` for one degree.
#[derive(Debug, Clone)]
struct ReferenceStiffness {
    n: usize,
    xx: Vec<f64>,
    xy_sym: Vec<f64>,
    yy: Vec<f64>,
}

impl ReferenceStiffness {
    fn new(element: &ReferenceElement) -> Self {
        let n = element.num_nodes();
        // gradients are degree k - 1, so 2k - 2 is exact
        let rule = QuadratureRule::triangle(2 * element.degree() - 2);
        let tab = element.tabulate(&rule);
        let mut xx = vec![0.0; n * n];
        let mut xy = vec![0.0; n * n];
        let mut yy = vec![0.0; n * n];
        for (q, &w) in rule.weights().iter().enumerate() {
            let g = tab.grads_at(q);
            for i in 0..n {
                for j in 0..n {
                    xx[i * n + j] += w * g[i][0] * g[j][0];
                    xy[i * n + j] += w * g[i][0] * g[j][1];
                    yy[i * n + j] += w * g[i][1] * g[j][1];
                }
            }
        }
        let mut xy_sym = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                xy_sym[i * n + j] = xy[i * n + j] + xy[j * n + i];
            }
        }
        for i in 0..n {
            for j in 0..i {
                xx[i * n + j] = xx[j * n + i];
                yy[i * n + j] = yy[j * n + i];
            }
        }
        Self { n, xx, xy_sym, yy }
    }

    /// Local stiffness, bitwise symmetric.
    fn local(&self, map: &AffineMap, out: &mut [f64]) {
        let [m00, m01, m11] = map.metric();
        let area = map.det.abs();
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                let idx = i * n + j;
                let v = area * (m00 * self.xx[idx] + m01 * self.xy_sym[idx] + m11 * self.yy[idx]);
                out[idx] = v;
                out[j * n + i] = v;
            }
        }
    }
}

/// Element stiffness matrix (row-major) of one triangle.
pub fn local_stiffness(points: [[f64; 2]; 3], k: usize) -> Result<Vec<f64>, FemError> {
    let element = ReferenceElement::new(k)?;
    let map = AffineMap::new(points);
    if !(map.det.abs() > 0.0) {
        return Err(FemError::DegenerateTriangle(0));
    }
    let stiff = ReferenceStiffness::new(&element);
    let mut out = vec![0.0; element.num_nodes() * element.num_nodes()];
    stiff.local(&map, &mut out);
    Ok(out)
}

/// Per-triangle stiffness and load contributions, in mesh order.
struct ElementLoop<'a> {
    mesh: &'a Mesh,
    stiffness: ReferenceStiffness,
    rule: QuadratureRule,
    tab: Tabulation,
    n: usize,
}

impl<'a> ElementLoop<'a> {
    fn new(mesh: &'a Mesh, k: usize, options: &FemOptions) -> Result<Self, FemError> {
        let element = ReferenceElement::new(k)?;
        let rule = QuadratureRule::triangle(options.assembly_degree(k));
        let tab = element.tabulate(&rule);
        Ok(Self {
            mesh,
            stiffness: ReferenceStiffness::new(&element),
            n: element.num_nodes(),
            rule,
            tab,
        })
    }

    fn for_each<F>(&self, case: &ProblemCase, mut visit: F) -> Result<(), FemError>
    where
        F: FnMut(usize, &[f64], &[f64]),
    {
        let n = self.n;
        let mut k_local = vec![0.0; n * n];
        let mut f_local = vec![0.0; n];
        for t in 0..self.mesh.num_triangles() {
            let map = AffineMap::new(self.mesh.triangle_points(t));
            if !(map.det > 0.0) {
                return Err(FemError::DegenerateTriangle(t));
            }
            self.stiffness.local(&map, &mut k_local);
            f_local.iter_mut().for_each(|v| *v = 0.0);
            for (q, (&r, &w)) in self.rule.points().iter().zip(self.rule.weights()).enumerate() {
                let x = map.apply(r);
                let wq = w * map.det * case.q(x[0], x[1]);
                for (fi, phi) in f_local.iter_mut().zip(self.tab.values_at(q)) {
                    *fi += wq * phi;
                }
            }
            visit(t, &k_local, &f_local);
        }
        Ok(())
    }
}

/// Stiffness matrix and load vector over all DOFs, before any boundary
/// condition is applied.
pub fn assemble_full(
    mesh: &Mesh,
    dofmap: &DofMap,
    case: &ProblemCase,
    options: &FemOptions,
) -> Result<(CsrMatrix, Vec<f64>), FemError> {
    let elements = ElementLoop::new(mesh, dofmap.degree(), options)?;
    let n = elements.n;
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * n * n);
    let mut load = vec![0.0; dofmap.num_dofs()];
    elements.for_each(case, |t, k_local, f_local| {
        let dofs = dofmap.cell(t);
        for (i, &gi) in dofs.iter().enumerate() {
            load[gi] += f_local[i];
            for (j, &gj) in dofs.iter().enumerate() {
                triplets.push((gi, gj, k_local[i * n + j]));
            }
        }
    })?;
    Ok((CsrMatrix::from_triplets(dofmap.num_dofs(), &triplets)?, load))
}

/// Linear system over the interior DOFs after Dirichlet elimination.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofmap: DofMap,
    /// Global DOF of each unknown.
    pub free_dofs: Vec<usize>,
    /// `g` at boundary DOFs, 0 elsewhere; indexed by global DOF.
    pub boundary_values: Vec<f64>,
}

impl LinearSystem {
    /// Scatters interior unknowns and boundary values into one global vector.
    pub fn expand(&self, interior: &[f64]) -> Vec<f64> {
        let mut full = self.boundary_values.clone();
        for (&g, &v) in self.free_dofs.iter().zip(interior) {
            full[g] = v;
        }
        full
    }
}

/// Assembles the reduced system for `-Δu = q`, `u = g` on the boundary.
///
/// The load holds `∫ q φ_i - a(g_h, φ_i)`, `g_h` interpolating `g` at the
/// boundary nodes.
pub fn assemble(
    mesh: &Mesh,
    k: usize,
    case: &ProblemCase,
    options: &FemOptions,
) -> Result<LinearSystem, FemError> {
    let dofmap = build_dof_map(mesh, k)?;
    let num_dofs = dofmap.num_dofs();
    let mut free_index = vec![usize::MAX; num_dofs];
    let mut free_dofs = Vec::with_capacity(num_dofs - dofmap.boundary_dofs().len());
    let mut boundary_values = vec![0.0; num_dofs];
    for d in 0..num_dofs {
        if dofmap.is_boundary(d) {
            let [x, y] = dofmap.coord(d);
            boundary_values[d] = case.g(x, y);
        } else {
            free_index[d] = free_dofs.len();
            free_dofs.push(d);
        }
    }

    let elements = ElementLoop::new(mesh, k, options)?;
    let n = elements.n;
    let mut triplets = Vec::with_capacity(mesh.num_triangles() * n * n);
    let mut rhs = vec![0.0; free_dofs.len()];
    elements.for_each(case, |t, k_local, f_local| {
        let dofs = dofmap.cell(t);
        for (i, &gi) in dofs.iter().enumerate() {
            let fi = free_index[gi];
            if fi == usize::MAX {
                continue;
            }
            rhs[fi] += f_local[i];
            for (j, &gj) in dofs.iter().enumerate() {
                let fj = free_index[gj];
                let kij = k_local[i * n + j];
                if fj == usize::MAX {
                    rhs[fi] -= kij * boundary_values[gj];
                } else {
                    triplets.push((fi, fj, kij));
                }
            }
        }
    })?;
    let matrix = CsrMatrix::from_triplets(free_dofs.len(), &triplets)?;
    Ok(LinearSystem {
        matrix,
        rhs,
        dofmap,
        free_dofs,
        boundary_values,
    })
}

/// A discrete solution: coefficients of `u_h` on the DOFs of a mesh.
#[derive(Debug, Clone)]
pub struct FemSolution<'m> {
    mesh: &'m Mesh,
    dofmap: DofMap,
    coefficients: Vec<f64>,
    report: Option<SolveReport>,
}

impl<'m> FemSolution<'m> {
    /// Nodal interpolant of `f`, no solve involved.
    pub fn interpolate<F>(mesh: &'m Mesh, k: usize, f: F) -> Result<Self, FemError>
    where
        F: Fn(f64, f64) -> f64,
    {
        let dofmap = build_dof_map(mesh, k)?;
        let coefficients = dofmap.coords().iter().map(|&[x, y]| f(x, y)).collect();
        Ok(Self {
            mesh,
            dofmap,
            coefficients,
            report: None,
        })
    }

    pub fn from_coefficients(
        mesh: &'m Mesh,
        dofmap: DofMap,
        coefficients: Vec<f64>,
    ) -> Result<Self, FemError> {
        if coefficients.len() != dofmap.num_dofs() {
            return Err(LinalgError::DimensionMismatch {
                expected: dofmap.num_dofs(),
                got: coefficients.len(),
            }
            .into());
        }
        Ok(Self {
            mesh,
            dofmap,
            coefficients,
            report: None,
        })
    }

    pub fn degree(&self) -> usize {
        self.dofmap.degree()
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// CG report when the solution came from [`solve_poisson`].
    pub fn report(&self) -> Option<&SolveReport> {
        self.report.as_ref()
    }
}

/// Solves the Poisson problem with `P_k` elements on `mesh`.
pub fn solve_poisson<'m>(
    mesh: &'m Mesh,
    k: usize,
    case: &ProblemCase,
    options: &FemOptions,
) -> Result<FemSolution<'m>, FemError> {
    let system = assemble(mesh, k, case, options)?;
    let (x, report) = cg_solve(&system.matrix, &system.rhs, &options.cg)?;
    if !report.converged {
        return Err(FemError::NotConverged(report));
    }
    let coefficients = system.expand(&x);
    Ok(FemSolution {
        mesh,
        dofmap: system.dofmap,
        coefficients,
        report: Some(report),
    })
}

/// Full H1 error `sqrt(∫ (u_h - u)² + |∇u_h - ∇u|²)` with the default rule.
pub fn h1_error(sol: &FemSolution<'_>, case: &ProblemCase) -> f64 {
    error_norm(sol, case, NormKind::Full, &QuadratureRule::triangle(error_quad_degree(sol.degree())))
}

/// Error of `sol` against the exact solution of `case`, measured with `rule`.
pub fn error_norm(
    sol: &FemSolution<'_>,
    case: &ProblemCase,
    norm: NormKind,
    rule: &QuadratureRule,
) -> f64 {
    let element = ReferenceElement::new(sol.degree()).expect("solution degree is valid");
    let tab = element.tabulate(rule);
    let mesh = sol.mesh;
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let map = AffineMap::new(mesh.triangle_points(t));
        let dofs = sol.dofmap.cell(t);
        let mut local = 0.0;
        for (q, (&r, &w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let x = map.apply(r);
            let mut uh = 0.0;
            let mut grad_ref = [0.0; 2];
            for ((&d, &phi), g) in dofs.iter().zip(tab.values_at(q)).zip(tab.grads_at(q)) {
                let c = sol.coefficients[d];
                uh += c * phi;
                grad_ref[0] += c * g[0];
                grad_ref[1] += c * g[1];
            }
            let grad_uh = map.pull_grad(grad_ref);
            let grad_u = case.grad_u(x[0], x[1]);
            let gx = grad_uh[0] - grad_u[0];
            let gy = grad_uh[1] - grad_u[1];
            let mut density = gx * gx + gy * gy;
            if norm == NormKind::Full {
                let e = uh - case.u(x[0], x[1]);
                density += e * e;
            }
            local += w * density;
        }
        total += local * map.det.abs();
    }
    libm::sqrt(total)
}
