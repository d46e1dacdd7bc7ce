//! Conforming triangulations of two-subdomain geometries.
//!
//! Every edge of the triangulation is a *facet*. Facets carry a dense tag
//! (boundary part, interface or interior) fixed at construction time, so
//! refinement never re-classifies boundaries geometrically.

mod builders;
mod io;

use std::collections::HashMap;
use std::fmt;

pub use builders::{build_enclosed_disk, build_split_square, build_unit_square};
pub use io::{read_mesh, write_mesh};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    Fluid,
    Porous,
}

/// Facet labels. The boundary part names follow the boundary conditions
/// they carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FacetTag {
    /// Fluid boundary with no-slip velocity.
    FluidNoSlip,
    /// Fluid boundary with prescribed (by default zero) normal stress.
    FluidTraction,
    /// Clamped porous boundary with no-flux pressure.
    PorousClamped,
    /// Traction-free porous boundary with prescribed pore pressure.
    PorousPressure,
    /// Porous boundary where both displacement and pore pressure are fixed.
    PorousDagger,
    Interface,
    Interior,
}

impl FacetTag {
    pub const ALL: [FacetTag; 7] = [
        FacetTag::FluidNoSlip,
        FacetTag::FluidTraction,
        FacetTag::PorousClamped,
        FacetTag::PorousPressure,
        FacetTag::PorousDagger,
        FacetTag::Interface,
        FacetTag::Interior,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FacetTag::FluidNoSlip => "GAMMA_F_U",
            FacetTag::FluidTraction => "GAMMA_F_SIGMA",
            FacetTag::PorousClamped => "GAMMA_P_D",
            FacetTag::PorousPressure => "GAMMA_P_P",
            FacetTag::PorousDagger => "GAMMA_P_DAGGER",
            FacetTag::Interface => "SIGMA",
            FacetTag::Interior => "INTERIOR",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }

    pub fn is_fluid_boundary(self) -> bool {
        matches!(self, FacetTag::FluidNoSlip | FacetTag::FluidTraction)
    }

    pub fn is_porous_boundary(self) -> bool {
        matches!(self, FacetTag::PorousClamped | FacetTag::PorousPressure | FacetTag::PorousDagger)
    }
}

impl fmt::Display for FacetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Boundary layouts of the split unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcConfig {
    /// The interface meets the no-slip and clamped boundaries (top and
    /// bottom); the fluid is driven through its left edge and the porous
    /// right edge carries the pressure condition.
    VelDisp,
    /// Left fluid edge no-slip, top/bottom fluid edges traction; right porous
    /// edge clamped, top/bottom porous edges traction-free with fixed pressure.
    StressPressure,
    /// As `VelDisp` on the fluid side, but the porous boundary incident to the
    /// interface fixes both displacement and pressure.
    DirichletDagger,
}

impl BcConfig {
    pub fn name(self) -> &'static str {
        match self {
            BcConfig::VelDisp => "vel-disp",
            BcConfig::StressPressure => "stress-pressure",
            BcConfig::DirichletDagger => "dirichlet-dagger",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    cell_tags: Vec<Subdomain>,
    /// Vertex pairs with `v0 < v1`.
    facets: Vec<[usize; 2]>,
    facet_tags: Vec<FacetTag>,
    /// Local facet `k` of a cell is the edge opposite its local vertex `k`.
    cell_facets: Vec<[usize; 3]>,
    facet_cells: Vec<[Option<usize>; 2]>,
    /// Unit normal on interface facets pointing from the fluid into the
    /// porous subdomain; zero elsewhere.
    normals: Vec<[f64; 2]>,
}

/// An interface facet together with its two neighbouring cells.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceFacet {
    pub facet: usize,
    pub fluid_cell: usize,
    pub porous_cell: usize,
    pub normal: [f64; 2],
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Mesh {
    /// Builds the facet structure of a triangulation. Cells are reoriented
    /// counter-clockwise. `boundary_tag(v0, v1)` classifies each boundary
    /// edge; interior edges are classified from the cell tags.
    pub fn from_cells<F>(vertices: Vec<[f64; 2]>, mut cells: Vec<[usize; 3]>, cell_tags: Vec<Subdomain>, mut boundary_tag: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Option<FacetTag>,
    {
        if cells.len() != cell_tags.len() {
            return Err(Error::InvalidMesh("cell and tag counts differ".into()));
        }
        for c in cells.iter_mut() {
            if c.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh("cell references missing vertex".into()));
            }
            let area = signed_area(vertices[c[0]], vertices[c[1]], vertices[c[2]]);
            if area.abs() < 1e-300 {
                return Err(Error::InvalidMesh("degenerate triangle".into()));
            }
            if area < 0.0 {
                c.swap(1, 2);
            }
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(cells.len() * 2);
        let mut facets = Vec::new();
        let mut facet_cells: Vec<[Option<usize>; 2]> = Vec::new();
        let mut cell_facets = Vec::with_capacity(cells.len());
        for (ci, c) in cells.iter().enumerate() {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let (a, b) = key(c[(k + 1) % 3], c[(k + 2) % 3]);
                let fi = *index.entry((a, b)).or_insert_with(|| {
                    facets.push([a, b]);
                    facet_cells.push([None, None]);
                    facets.len() - 1
                });
                let fc = &mut facet_cells[fi];
                if fc[0].is_none() {
                    fc[0] = Some(ci);
                } else if fc[1].is_none() {
                    fc[1] = Some(ci);
                } else {
                    return Err(Error::InvalidMesh(format!("edge ({a},{b}) shared by more than two cells")));
                }
                *slot = fi;
            }
            cell_facets.push(local);
        }
        let mut facet_tags = Vec::with_capacity(facets.len());
        let mut normals = vec![[0.0; 2]; facets.len()];
        for (fi, f) in facets.iter().enumerate() {
            let tag = match facet_cells[fi] {
                [Some(a), Some(b)] => {
                    if cell_tags[a] == cell_tags[b] {
                        FacetTag::Interior
                    } else {
                        FacetTag::Interface
                    }
                }
                _ => boundary_tag(f[0], f[1]).ok_or_else(|| Error::InvalidMesh(format!("boundary facet ({},{}) has no tag", f[0], f[1])))?,
            };
            if tag == FacetTag::Interior && facet_cells[fi][1].is_none() {
                return Err(Error::InvalidMesh("boundary facet tagged INTERIOR".into()));
            }
            if tag == FacetTag::Interface {
                let fluid = facet_cells[fi]
                    .iter()
                    .flatten()
                    .copied()
                    .find(|&c| cell_tags[c] == Subdomain::Fluid)
                    .expect("interface facet has a fluid neighbour");
                normals[fi] = outward_normal(&vertices, &cells[fluid], *f);
            }
            facet_tags.push(tag);
        }
        let mesh = Self {
            vertices,
            cells,
            cell_tags,
            facets,
            facet_tags,
            cell_facets,
            facet_cells,
            normals,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn cell_tags(&self) -> &[Subdomain] {
        &self.cell_tags
    }

    pub fn facets(&self) -> &[[usize; 2]] {
        &self.facets
    }

    pub fn facet_tags(&self) -> &[FacetTag] {
        &self.facet_tags
    }

    pub fn cell_facets(&self) -> &[[usize; 3]] {
        &self.cell_facets
    }

    pub fn facet_cells(&self) -> &[[Option<usize>; 2]] {
        &self.facet_cells
    }

    pub fn normal(&self, facet: usize) -> [f64; 2] {
        self.normals[facet]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn cell_vertices(&self, cell: usize) -> [[f64; 2]; 3] {
        let c = self.cells[cell];
        [self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]]
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_vertices(cell);
        signed_area(a, b, c)
    }

    pub fn facet_length(&self, facet: usize) -> f64 {
        let [a, b] = self.facets[facet];
        let (p, q) = (self.vertices[a], self.vertices[b]);
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    }

    pub fn subdomain_area(&self, sd: Subdomain) -> f64 {
        (0..self.num_cells()).filter(|&c| self.cell_tags[c] == sd).map(|c| self.cell_area(c)).sum()
    }

    pub fn count_cells(&self, sd: Subdomain) -> usize {
        self.cell_tags.iter().filter(|&&t| t == sd).count()
    }

    pub fn facets_with_tag(&self, tag: FacetTag) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_facets()).filter(move |&f| self.facet_tags[f] == tag)
    }

    /// Interface facets in facet order with their fluid/porous neighbours.
    pub fn interface_facets(&self) -> Vec<InterfaceFacet> {
        self.facets_with_tag(FacetTag::Interface)
            .map(|f| {
                let [a, b] = self.facet_cells[f];
                let (a, b) = (a.unwrap(), b.unwrap());
                let (fluid_cell, porous_cell) = if self.cell_tags[a] == Subdomain::Fluid { (a, b) } else { (b, a) };
                InterfaceFacet {
                    facet: f,
                    fluid_cell,
                    porous_cell,
                    normal: self.normals[f],
                }
            })
            .collect()
    }

    /// Smallest and largest edge length.
    pub fn edge_length_range(&self) -> (f64, f64) {
        (0..self.num_facets())
            .map(|f| self.facet_length(f))
            .fold((f64::INFINITY, 0.0), |(lo, hi), l| (lo.min(l), hi.max(l)))
    }

    /// Checks the structural invariants every constructor guarantees.
    pub fn validate(&self) -> Result<()> {
        for c in 0..self.num_cells() {
            if self.cell_area(c) <= 0.0 {
                return Err(Error::InvalidMesh(format!("cell {c} is not positively oriented")));
            }
        }
        let mut sorted: Vec<_> = self.vertices.iter().map(|p| (p[0], p[1])).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| (w[0].0 - w[1].0).abs() < 1e-13 && (w[0].1 - w[1].1).abs() < 1e-13) {
            return Err(Error::InvalidMesh("duplicate vertices".into()));
        }
        for f in 0..self.num_facets() {
            let tag = self.facet_tags[f];
            match (tag, self.facet_cells[f]) {
                (FacetTag::Interface, [Some(a), Some(b)]) => {
                    if self.cell_tags[a] == self.cell_tags[b] {
                        return Err(Error::InvalidMesh(format!("interface facet {f} inside one subdomain")));
                    }
                    let fluid = if self.cell_tags[a] == Subdomain::Fluid { a } else { b };
                    let n = outward_normal(&self.vertices, &self.cells[fluid], self.facets[f]);
                    let m = self.normals[f];
                    if (n[0] * m[0] + n[1] * m[1]) < 1.0 - 1e-12 {
                        return Err(Error::InvalidMesh(format!(
                            "interface normal of facet {f} does not point into the porous region"
                        )));
                    }
                }
                (FacetTag::Interior, [Some(a), Some(b)]) if self.cell_tags[a] == self.cell_tags[b] => {}
                (t, [Some(c), None]) if t.is_fluid_boundary() && self.cell_tags[c] == Subdomain::Fluid => {}
                (t, [Some(c), None]) if t.is_porous_boundary() && self.cell_tags[c] == Subdomain::Porous => {}
                _ => {
                    return Err(Error::InvalidMesh(format!("facet {f} has inconsistent tag {tag}")));
                }
            }
        }
        Ok(())
    }

    /// Splits every triangle into four through its edge midpoints. Facet tags
    /// and interface orientation are inherited from the parent facets.
    pub fn refine_uniform(&self) -> Mesh {
        let nv = self.num_vertices();
        let mut vertices = self.vertices.clone();
        for f in &self.facets {
            let (p, q) = (self.vertices[f[0]], self.vertices[f[1]]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        }
        let mut cells = Vec::with_capacity(4 * self.num_cells());
        let mut cell_tags = Vec::with_capacity(4 * self.num_cells());
        for (ci, c) in self.cells.iter().enumerate() {
            let m = self.cell_facets[ci].map(|f| nv + f);
            cells.push([c[0], m[2], m[1]]);
            cells.push([m[2], c[1], m[0]]);
            cells.push([m[1], m[0], c[2]]);
            cells.push([m[0], m[1], m[2]]);
            cell_tags.extend([self.cell_tags[ci]; 4]);
        }
        let mut inherited: HashMap<(usize, usize), FacetTag> = HashMap::new();
        for (fi, f) in self.facets.iter().enumerate() {
            let tag = self.facet_tags[fi];
            if tag != FacetTag::Interior && tag != FacetTag::Interface {
                inherited.insert(key(f[0], nv + fi), tag);
                inherited.insert(key(f[1], nv + fi), tag);
            }
        }
        Mesh::from_cells(vertices, cells, cell_tags, |a, b| inherited.get(&key(a, b)).copied()).expect("refinement preserves mesh invariants")
    }

    /// Copy of the mesh with every interface normal negated. Only useful for
    /// checking sign conventions; the result violates the orientation
    /// invariant and is not validated.
    pub fn with_flipped_interface_orientation(&self) -> Mesh {
        let mut m = self.clone();
        for n in m.normals.iter_mut() {
            n[0] = -n[0];
            n[1] = -n[1];
        }
        m
    }
}

/// Unit normal of edge `f` pointing out of `cell`.
fn outward_normal(vertices: &[[f64; 2]], cell: &[usize; 3], f: [usize; 2]) -> [f64; 2] {
    let (p, q) = (vertices[f[0]], vertices[f[1]]);
    let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
    let len = (ex * ex + ey * ey).sqrt();
    let mut n = [ey / len, -ex / len];
    let opposite = cell.iter().copied().find(|v| *v != f[0] && *v != f[1]).unwrap();
    let o = vertices[opposite];
    if (o[0] - p[0]) * n[0] + (o[1] - p[1]) * n[1] > 0.0 {
        n = [-n[0], -n[1]];
    }
    n
}
