//! Continuous Lagrange spaces restricted to one subdomain.

use std::collections::BTreeMap;
use std::fmt;

use super::element::{CellGeometry, Element};
use crate::mesh::{FacetTag, Mesh, Subdomain};
use crate::{Error, Result};

/// Scalar or vector Lagrange space on the cells of one subdomain. Vector
/// dofs are interleaved: `dof = node * components + component`.
#[derive(Debug, Clone)]
pub struct FieldSpace {
    element: Element,
    subdomain: Subdomain,
    components: usize,
    cell_nodes: Vec<Option<[usize; 6]>>,
    node_coords: Vec<[f64; 2]>,
    vertex_node: Vec<Option<usize>>,
    facet_node: Vec<Option<usize>>,
}

impl FieldSpace {
    pub fn new(mesh: &Mesh, element: Element, subdomain: Subdomain, components: usize) -> Result<Self> {
        if !(1..=2).contains(&components) {
            return Err(Error::SpaceMismatch(format!("{components} components")));
        }
        let mut vertex_node = vec![None; mesh.num_vertices()];
        let mut facet_node = vec![None; mesh.num_facets()];
        let mut node_coords = Vec::new();
        let in_sd: Vec<usize> = (0..mesh.num_cells()).filter(|&c| mesh.cell_tags()[c] == subdomain).collect();
        if in_sd.is_empty() {
            return Err(Error::SpaceMismatch(format!("subdomain {subdomain:?} has no cells")));
        }
        let mut used_v = vec![false; mesh.num_vertices()];
        for &c in &in_sd {
            for v in mesh.cells()[c] {
                used_v[v] = true;
            }
        }
        for (v, used) in used_v.iter().enumerate() {
            if *used {
                vertex_node[v] = Some(node_coords.len());
                node_coords.push(mesh.vertices()[v]);
            }
        }
        if element == Element::P2 {
            let mut used_f = vec![false; mesh.num_facets()];
            for &c in &in_sd {
                for f in mesh.cell_facets()[c] {
                    used_f[f] = true;
                }
            }
            for (f, used) in used_f.iter().enumerate() {
                if *used {
                    let [a, b] = mesh.facets()[f];
                    let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
                    facet_node[f] = Some(node_coords.len());
                    node_coords.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                }
            }
        }
        let mut cell_nodes = vec![None; mesh.num_cells()];
        for &c in &in_sd {
            let mut nodes = [usize::MAX; 6];
            for (k, v) in mesh.cells()[c].into_iter().enumerate() {
                nodes[k] = vertex_node[v].unwrap();
            }
            if element == Element::P2 {
                for (k, f) in mesh.cell_facets()[c].into_iter().enumerate() {
                    nodes[3 + k] = facet_node[f].unwrap();
                }
            }
            cell_nodes[c] = Some(nodes);
        }
        Ok(Self {
            element,
            subdomain,
            components,
            cell_nodes,
            node_coords,
            vertex_node,
            facet_node,
        })
    }

    pub fn element(&self) -> Element {
        self.element
    }

    pub fn subdomain(&self) -> Subdomain {
        self.subdomain
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn num_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn ndofs(&self) -> usize {
        self.num_nodes() * self.components
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.components + component
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    /// Local-to-global node map of `cell`, or `None` outside the subdomain.
    pub fn cell_nodes(&self, cell: usize) -> Option<&[usize]> {
        self.cell_nodes[cell].as_ref().map(|n| &n[..self.element.local_dofs()])
    }

    /// Nodes on facet `f` (vertices, then the midpoint for P2), empty if the
    /// facet is not in the space.
    pub fn facet_nodes(&self, mesh: &Mesh, f: usize) -> Vec<usize> {
        let [a, b] = mesh.facets()[f];
        let mut out: Vec<usize> = [self.vertex_node[a], self.vertex_node[b]].into_iter().flatten().collect();
        if out.len() < 2 {
            return Vec::new();
        }
        if let Some(m) = self.facet_node[f] {
            out.push(m);
        }
        out
    }

    /// Sorted node indices on facets carrying any of `tags`.
    pub fn nodes_on_tags(&self, mesh: &Mesh, tags: &[FacetTag]) -> Vec<usize> {
        let mut nodes: Vec<usize> = (0..mesh.num_facets())
            .filter(|&f| tags.contains(&mesh.facet_tags()[f]))
            .flat_map(|f| self.facet_nodes(mesh, f))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Nodal interpolant of `f`; only the first `components` entries of the
    /// returned value are used.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.ndofs()];
        for (n, x) in self.node_coords.iter().enumerate() {
            let v = f(*x);
            for c in 0..self.components {
                out[self.dof(n, c)] = v[c];
            }
        }
        out
    }

    /// Value and gradient (`grad[c][dir]`) of a discrete function at
    /// barycentric point `l` of `cell`.
    pub fn evaluate(&self, coeffs: &[f64], cell: usize, geom: &CellGeometry, l: [f64; 3]) -> ([f64; 2], [[f64; 2]; 2]) {
        let nodes = self.cell_nodes(cell).expect("cell belongs to the space");
        let vals = self.element.values(l);
        let grads = self.element.gradients(l, &geom.grad_lambda);
        let mut v = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for (i, &n) in nodes.iter().enumerate() {
            for c in 0..self.components {
                let a = coeffs[self.dof(n, c)];
                v[c] += a * vals[i];
                g[c][0] += a * grads[i][0];
                g[c][1] += a * grads[i][1];
            }
        }
        (v, g)
    }
}

/// The five unknown fields, in monolithic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    /// Fluid velocity.
    U,
    /// Porous displacement.
    D,
    /// Fluid pressure.
    PF,
    /// Total pressure.
    Phi,
    /// Pore pressure.
    PP,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::U, Field::D, Field::PF, Field::Phi, Field::PP];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::U => "u",
            Field::D => "d",
            Field::PF => "p_F",
            Field::Phi => "phi",
            Field::PP => "p_P",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Generalized Taylor-Hood spaces: P2 velocity and displacement, P1 fluid
/// and total pressure, P2 pore pressure.
#[derive(Debug, Clone)]
pub struct TaylorHood {
    pub u: FieldSpace,
    pub d: FieldSpace,
    pub pf: FieldSpace,
    pub phi: FieldSpace,
    pub pp: FieldSpace,
}

impl TaylorHood {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        Ok(Self {
            u: FieldSpace::new(mesh, Element::P2, Subdomain::Fluid, 2)?,
            d: FieldSpace::new(mesh, Element::P2, Subdomain::Porous, 2)?,
            pf: FieldSpace::new(mesh, Element::P1, Subdomain::Fluid, 1)?,
            phi: FieldSpace::new(mesh, Element::P1, Subdomain::Porous, 1)?,
            pp: FieldSpace::new(mesh, Element::P2, Subdomain::Porous, 1)?,
        })
    }

    pub fn field(&self, f: Field) -> &FieldSpace {
        match f {
            Field::U => &self.u,
            Field::D => &self.d,
            Field::PF => &self.pf,
            Field::Phi => &self.phi,
            Field::PP => &self.pp,
        }
    }

    pub fn sizes(&self) -> [usize; 5] {
        Field::ALL.map(|f| self.field(f).ndofs())
    }

    /// Block offsets, length six.
    pub fn offsets(&self) -> Vec<usize> {
        crate::linalg::offsets(&self.sizes())
    }

    pub fn total_dofs(&self) -> usize {
        self.sizes().iter().sum()
    }
}

/// Dirichlet values keyed by global dof. Constraining a dof twice with
/// different values is an error.
#[derive(Debug, Clone, Default)]
pub struct DirichletSet {
    values: BTreeMap<usize, f64>,
}

impl DirichletSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dof: usize, value: f64) -> Result<()> {
        if let Some(&old) = self.values.get(&dof) {
            if (old - value).abs() > 1e-12 * (1.0 + old.abs().max(value.abs())) {
                return Err(Error::ConflictingDirichlet {
                    dof,
                    first: old,
                    second: value,
                });
            }
            return Ok(());
        }
        self.values.insert(dof, value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.values.contains_key(&dof)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &d in self.values.keys() {
            m[d] = true;
        }
        m
    }

    /// Same dofs with all values set to zero.
    pub fn homogeneous(&self) -> Self {
        Self {
            values: self.values.keys().map(|&k| (k, 0.0)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_split_square, BcConfig};

    #[test]
    fn taylor_hood_dimensions() {
        let n = 4;
        let mesh = build_split_square(n, BcConfig::VelDisp).unwrap();
        let th = TaylorHood::new(&mesh).unwrap();
        // each half is a (n/2 × n) grid; P2 nodes form a (n+1 × 2n+1) lattice
        let p1 = (n / 2 + 1) * (n + 1);
        let p2 = (n + 1) * (2 * n + 1);
        assert_eq!(th.sizes(), [2 * p2, 2 * p2, p1, p1, p2]);
        assert_eq!(th.offsets()[5], th.total_dofs());
    }

    #[test]
    fn interpolation_reproduces_quadratics() {
        let mesh = build_split_square(2, BcConfig::VelDisp).unwrap();
        let th = TaylorHood::new(&mesh).unwrap();
        let f = |x: [f64; 2]| [x[0] * x[1] + x[1] * x[1], 1.0 - x[0] * x[0]];
        let coeffs = th.u.interpolate(f);
        for c in 0..mesh.num_cells() {
            if th.u.cell_nodes(c).is_none() {
                continue;
            }
            let geom = CellGeometry::new(mesh.cell_vertices(c));
            let l = [0.2, 0.5, 0.3];
            let (v, g) = th.u.evaluate(&coeffs, c, &geom, l);
            let x = geom.point(l);
            let e = f(x);
            assert!((v[0] - e[0]).abs() < 1e-14 && (v[1] - e[1]).abs() < 1e-14);
            assert!((g[0][0] - x[1]).abs() < 1e-13);
            assert!((g[1][0] + 2.0 * x[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_conflicts_are_detected() {
        let mut set = DirichletSet::new();
        set.insert(3, 1.0).unwrap();
        set.insert(3, 1.0).unwrap();
        assert!(matches!(set.insert(3, 2.0), Err(Error::ConflictingDirichlet { dof: 3, .. })));
        assert_eq!(set.len(), 1);
    }
}
