//! Global numbering of Lagrange degrees of freedom.
//!
//! Vertex DOFs come first and reuse the vertex index. Edge-interior DOFs
//! follow, `k - 1` per edge, enumerated from the lower-indexed vertex of the
//! edge towards the higher one so that both neighbours of an edge agree.
//! Cell-interior DOFs come last.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::reference::ReferenceElement;
use super::FemError;
use crate::meshgen::Mesh;

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    degree: usize,
    num_local: usize,
    cell_dofs: Vec<usize>,
    coords: Vec<[f64; 2]>,
    is_boundary: Vec<bool>,
    boundary_dofs: Vec<usize>,
    num_edges: usize,
}

impl DofMap {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_dofs(&self) -> usize {
        self.coords.len()
    }

    pub fn num_local(&self) -> usize {
        self.num_local
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Global DOFs of triangle `t`, in the node order of [`ReferenceElement`].
    pub fn cell(&self, t: usize) -> &[usize] {
        &self.cell_dofs[t * self.num_local..(t + 1) * self.num_local]
    }

    /// Physical coordinates of a DOF's node.
    pub fn coord(&self, dof: usize) -> [f64; 2] {
        self.coords[dof]
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.is_boundary[dof]
    }

    /// Sorted boundary DOF indices.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }
}

pub fn build_dof_map(mesh: &Mesh, k: usize) -> Result<DofMap, FemError> {
    let element = ReferenceElement::new(k)?;
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();

    let mut edges: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for tri in mesh.triangles() {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let next_id = edges.len();
            edges.entry(key).or_insert((next_id, 0)).1 += 1;
        }
    }
    let num_edges = edges.len();
    let per_edge = k - 1;
    let per_cell = if k >= 3 { (k - 1) * (k - 2) / 2 } else { 0 };
    let num_dofs = nv + num_edges * per_edge + nt * per_cell;

    let mut coords = vec![[f64::NAN; 2]; num_dofs];
    let mut is_boundary = vec![false; num_dofs];
    for &v in mesh.boundary_vertices() {
        is_boundary[v] = true;
    }
    let num_local = element.num_nodes();
    let mut cell_dofs = Vec::with_capacity(nt * num_local);
    let kf = k as f64;

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let points = mesh.triangle_points(t);
        let mut interior = 0;
        for a in element.multi_indices() {
            let zeros = a.iter().filter(|&&x| x == 0).count();
            let dof = match zeros {
                2 => tri[a.iter().position(|&x| x == k).unwrap()],
                1 => {
                    let z = a.iter().position(|&x| x == 0).unwrap();
                    let (p, q) = ((z + 1) % 3, (z + 2) % 3);
                    let (gp, gq) = (tri[p], tri[q]);
                    let (id, count) = edges[&(gp.min(gq), gp.max(gq))];
                    // steps from the lower-indexed endpoint
                    let steps = if gp < gq { a[q] } else { a[p] };
                    let dof = nv + id * per_edge + steps - 1;
                    if count == 1 {
                        is_boundary[dof] = true;
                    }
                    dof
                }
                _ => {
                    let dof = nv + num_edges * per_edge + t * per_cell + interior;
                    interior += 1;
                    dof
                }
            };
            if coords[dof][0].is_nan() {
                // barycentric combination keeps edge nodes exactly on straight sides
                let mut c = [0.0; 2];
                for (vert, &ai) in points.iter().zip(a) {
                    if ai > 0 {
                        let w = ai as f64 / kf;
                        c[0] += w * vert[0];
                        c[1] += w * vert[1];
                    }
                }
                coords[dof] = c;
            }
            cell_dofs.push(dof);
        }
    }

    let boundary_dofs = (0..num_dofs).filter(|&d| is_boundary[d]).collect();
    Ok(DofMap {
        degree: k,
        num_local,
        cell_dofs,
        coords,
        is_boundary,
        boundary_dofs,
        num_edges,
    })
}
