//! Bilinear forms and load functionals.
//!
//! Cell integrals use a generic kernel interface: for every quadrature point
//! the kernel receives the row and column shape functions and accumulates
//! into a dense local matrix indexed by `local_node * components + c`.
//! Facet integrals work the same way on interface or boundary facets.

use super::element::CellGeometry;
use super::quadrature::{LineRule, TriangleRule};
use super::space::FieldSpace;
use crate::exec::{self, Execution};
use crate::linalg::CsrMatrix;
use crate::mesh::{FacetTag, Mesh, Subdomain};
use crate::{Error, Result};

/// Degree used for products of P2 functions.
pub const MATRIX_DEGREE: usize = 4;
/// Degree used for loads and errors involving smooth non-polynomial data.
pub const LOAD_DEGREE: usize = 8;

const CELL_CHUNK: usize = 256;

/// Shape functions of one space at one point.
#[derive(Debug, Clone, Copy)]
pub struct Basis {
    pub n: usize,
    pub values: [f64; 6],
    pub grads: [[f64; 2]; 6],
}

impl Basis {
    fn eval(space: &FieldSpace, geom: &CellGeometry, l: [f64; 3]) -> Self {
        let el = space.element();
        Self {
            n: el.local_dofs(),
            values: el.values(l),
            grads: el.gradients(l, &geom.grad_lambda),
        }
    }
}

/// Dense local matrix with row-major storage.
pub struct Local {
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Local {
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }
}

fn cells_in(mesh: &Mesh, sd: Subdomain) -> Vec<usize> {
    (0..mesh.num_cells()).filter(|&c| mesh.cell_tags()[c] == sd).collect()
}

fn scatter(rows: &FieldSpace, rn: &[usize], cols: &FieldSpace, cn: &[usize], local: &Local, out: &mut Vec<(usize, usize, f64)>) {
    let (rc, cc) = (rows.components(), cols.components());
    for (i, &ni) in rn.iter().enumerate() {
        for a in 0..rc {
            let li = i * rc + a;
            for (j, &nj) in cn.iter().enumerate() {
                for b in 0..cc {
                    let v = local.data[li * local.cols + j * cc + b];
                    if v != 0.0 {
                        out.push((rows.dof(ni, a), cols.dof(nj, b), v));
                    }
                }
            }
        }
    }
}

/// Assembles `Σ_cells Σ_q kernel(row basis, col basis, x, w)` over the
/// common subdomain of `rows` and `cols`.
pub fn assemble_cells<K>(mesh: &Mesh, rows: &FieldSpace, cols: &FieldSpace, degree: usize, exec: Execution, kernel: K) -> Result<CsrMatrix>
where
    K: Fn(&Basis, &Basis, [f64; 2], f64, &mut Local) + Sync + Send,
{
    if rows.subdomain() != cols.subdomain() {
        return Err(Error::SpaceMismatch("cell forms need spaces on the same subdomain".into()));
    }
    let cells = cells_in(mesh, rows.subdomain());
    let rule = TriangleRule::with_degree(degree);
    let trips = exec::flat_map_chunks(exec, cells.len(), CELL_CHUNK, |range| {
        let mut out = Vec::new();
        for &c in &cells[range] {
            let geom = CellGeometry::new(mesh.cell_vertices(c));
            let rn = rows.cell_nodes(c).unwrap();
            let cn = cols.cell_nodes(c).unwrap();
            let ncols = cn.len() * cols.components();
            let mut local = Local {
                cols: ncols,
                data: vec![0.0; rn.len() * rows.components() * ncols],
            };
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let rb = Basis::eval(rows, &geom, *l);
                let cb = Basis::eval(cols, &geom, *l);
                kernel(&rb, &cb, geom.point(*l), w * geom.area, &mut local);
            }
            scatter(rows, rn, cols, cn, &local, &mut out);
        }
        out
    });
    Ok(CsrMatrix::from_triplets(rows.ndofs(), cols.ndofs(), &trips))
}

/// `(ε(u), ε(v))` on a vector space.
pub fn strain_strain(mesh: &Mesh, v: &FieldSpace, exec: Execution) -> Result<CsrMatrix> {
    expect_components(v, 2)?;
    assemble_cells(mesh, v, v, MATRIX_DEGREE, exec, |r, c, _, w, loc| {
        for i in 0..r.n {
            let gi = r.grads[i];
            for j in 0..c.n {
                let gj = c.grads[j];
                let dot = gi[0] * gj[0] + gi[1] * gj[1];
                for a in 0..2 {
                    for b in 0..2 {
                        let delta = if a == b { dot } else { 0.0 };
                        loc.add(2 * i + a, 2 * j + b, w * 0.5 * (delta + gi[b] * gj[a]));
                    }
                }
            }
        }
    })
}

/// `(q, div v)` with rows on the scalar space `q` and columns on `v`.
pub fn divergence(mesh: &Mesh, q: &FieldSpace, v: &FieldSpace, exec: Execution) -> Result<CsrMatrix> {
    expect_components(q, 1)?;
    expect_components(v, 2)?;
    assemble_cells(mesh, q, v, MATRIX_DEGREE, exec, |r, c, _, w, loc| {
        for i in 0..r.n {
            for j in 0..c.n {
                for b in 0..2 {
                    loc.add(i, 2 * j + b, w * r.values[i] * c.grads[j][b]);
                }
            }
        }
    })
}

/// `(p, q)` between two scalar spaces on the same subdomain.
pub fn mass(mesh: &Mesh, rows: &FieldSpace, cols: &FieldSpace, exec: Execution) -> Result<CsrMatrix> {
    expect_components(rows, 1)?;
    expect_components(cols, 1)?;
    assemble_cells(mesh, rows, cols, MATRIX_DEGREE, exec, |r, c, _, w, loc| {
        for i in 0..r.n {
            for j in 0..c.n {
                loc.add(i, j, w * r.values[i] * c.values[j]);
            }
        }
    })
}

/// `(∇p, ∇q)` on a scalar space.
pub fn stiffness(mesh: &Mesh, q: &FieldSpace, exec: Execution) -> Result<CsrMatrix> {
    expect_components(q, 1)?;
    assemble_cells(mesh, q, q, MATRIX_DEGREE, exec, |r, c, _, w, loc| {
        for i in 0..r.n {
            for j in 0..c.n {
                loc.add(i, j, w * (r.grads[i][0] * c.grads[j][0] + r.grads[i][1] * c.grads[j][1]));
            }
        }
    })
}

/// Vector mass matrix `(u, v)`.
pub fn vector_mass(mesh: &Mesh, v: &FieldSpace, exec: Execution) -> Result<CsrMatrix> {
    expect_components(v, 2)?;
    assemble_cells(mesh, v, v, MATRIX_DEGREE, exec, |r, c, _, w, loc| {
        for i in 0..r.n {
            for j in 0..c.n {
                let m = w * r.values[i] * c.values[j];
                loc.add(2 * i, 2 * j, m);
                loc.add(2 * i + 1, 2 * j + 1, m);
            }
        }
    })
}

fn expect_components(s: &FieldSpace, n: usize) -> Result<()> {
    if s.components() != n {
        return Err(Error::SpaceMismatch(format!("expected {n} components, found {}", s.components())));
    }
    Ok(())
}

/// Geometry passed to facet kernels.
#[derive(Debug, Clone, Copy)]
pub struct FacetPoint {
    pub x: [f64; 2],
    /// Interface normal (fluid to porous) or outward boundary normal.
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
    pub weight: f64,
}

struct FacetCell {
    facet: usize,
    normal: [f64; 2],
    fluid: Option<usize>,
    porous: Option<usize>,
}

fn cell_for(space: &FieldSpace, fc: &FacetCell) -> Option<usize> {
    match space.subdomain() {
        Subdomain::Fluid => fc.fluid,
        Subdomain::Porous => fc.porous,
    }
}

fn facet_cells(mesh: &Mesh, tags: &[FacetTag]) -> Vec<FacetCell> {
    let mut out = Vec::new();
    for f in 0..mesh.num_facets() {
        let tag = mesh.facet_tags()[f];
        if !tags.contains(&tag) {
            continue;
        }
        if tag == FacetTag::Interface {
            let [a, b] = mesh.facet_cells()[f];
            let (a, b) = (a.unwrap(), b.unwrap());
            let (fl, po) = if mesh.cell_tags()[a] == Subdomain::Fluid { (a, b) } else { (b, a) };
            out.push(FacetCell {
                facet: f,
                normal: mesh.normal(f),
                fluid: Some(fl),
                porous: Some(po),
            });
        } else if let [Some(c), None] = mesh.facet_cells()[f] {
            let sd = mesh.cell_tags()[c];
            let verts = mesh.cell_vertices(c);
            let [p, q] = mesh.facets()[f].map(|v| mesh.vertices()[v]);
            let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            let mut n = [(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
            let centroid = [(verts[0][0] + verts[1][0] + verts[2][0]) / 3.0, (verts[0][1] + verts[1][1] + verts[2][1]) / 3.0];
            if (centroid[0] - p[0]) * n[0] + (centroid[1] - p[1]) * n[1] > 0.0 {
                n = [-n[0], -n[1]];
            }
            out.push(FacetCell {
                facet: f,
                normal: n,
                fluid: (sd == Subdomain::Fluid).then_some(c),
                porous: (sd == Subdomain::Porous).then_some(c),
            });
        }
    }
    out
}

fn facet_points(mesh: &Mesh, fc: &FacetCell, rule: &LineRule) -> Vec<FacetPoint> {
    let [p, q] = mesh.facets()[fc.facet].map(|v| mesh.vertices()[v]);
    let len = mesh.facet_length(fc.facet);
    let tangent = [-fc.normal[1], fc.normal[0]];
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(s, w)| FacetPoint {
            x: [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])],
            normal: fc.normal,
            tangent,
            weight: w * len,
        })
        .collect()
}

/// Assembles a facet form over all facets carrying one of `tags`. Each
/// space is evaluated from its own side of the facet.
pub fn assemble_facets<K>(mesh: &Mesh, rows: &FieldSpace, cols: &FieldSpace, tags: &[FacetTag], degree: usize, kernel: K) -> Result<CsrMatrix>
where
    K: Fn(&Basis, &Basis, &FacetPoint, &mut Local),
{
    let rule = LineRule::with_degree(degree);
    let mut out = Vec::new();
    for fc in facet_cells(mesh, tags) {
        let (Some(rc), Some(cc)) = (cell_for(rows, &fc), cell_for(cols, &fc)) else {
            continue;
        };
        let (rgeom, cgeom) = (CellGeometry::new(mesh.cell_vertices(rc)), CellGeometry::new(mesh.cell_vertices(cc)));
        let rn = rows.cell_nodes(rc).unwrap();
        let cn = cols.cell_nodes(cc).unwrap();
        let ncols = cn.len() * cols.components();
        let mut local = Local {
            cols: ncols,
            data: vec![0.0; rn.len() * rows.components() * ncols],
        };
        for pt in facet_points(mesh, &fc, &rule) {
            let rb = Basis::eval(rows, &rgeom, rgeom.barycentric(pt.x));
            let cb = Basis::eval(cols, &cgeom, cgeom.barycentric(pt.x));
            kernel(&rb, &cb, &pt, &mut local);
        }
        scatter(rows, rn, cols, cn, &local, &mut out);
    }
    Ok(CsrMatrix::from_triplets(rows.ndofs(), cols.ndofs(), &out))
}

/// `⟨v·τ, w·τ⟩_Σ` between two vector spaces.
pub fn interface_tangential(mesh: &Mesh, rows: &FieldSpace, cols: &FieldSpace) -> Result<CsrMatrix> {
    expect_components(rows, 2)?;
    expect_components(cols, 2)?;
    assemble_facets(mesh, rows, cols, &[FacetTag::Interface], LineRule::with_degree(5).degree, |r, c, pt, loc| {
        let t = pt.tangent;
        for i in 0..r.n {
            for j in 0..c.n {
                let m = pt.weight * r.values[i] * c.values[j];
                for a in 0..2 {
                    for b in 0..2 {
                        loc.add(2 * i + a, 2 * j + b, m * t[a] * t[b]);
                    }
                }
            }
        }
    })
}

/// `⟨q, v·n⟩_Σ` with rows on the scalar space and columns on the vector space.
pub fn interface_normal(mesh: &Mesh, q: &FieldSpace, v: &FieldSpace) -> Result<CsrMatrix> {
    expect_components(q, 1)?;
    expect_components(v, 2)?;
    assemble_facets(mesh, q, v, &[FacetTag::Interface], 5, |r, c, pt, loc| {
        for i in 0..r.n {
            for j in 0..c.n {
                let m = pt.weight * r.values[i] * c.values[j];
                loc.add(i, 2 * j, m * pt.normal[0]);
                loc.add(i, 2 * j + 1, m * pt.normal[1]);
            }
        }
    })
}

/// Assembles `Σ_cells Σ_q f(basis, x, w, local)` into a vector.
pub fn cell_functional<F>(mesh: &Mesh, space: &FieldSpace, degree: usize, exec: Execution, f: F) -> Vec<f64>
where
    F: Fn(&Basis, [f64; 2], f64, &mut [f64]) + Sync + Send,
{
    let cells = cells_in(mesh, space.subdomain());
    let rule = TriangleRule::with_degree(degree);
    let nc = space.components();
    let entries = exec::flat_map_chunks(exec, cells.len(), CELL_CHUNK, |range| {
        let mut out = Vec::new();
        for &c in &cells[range] {
            let geom = CellGeometry::new(mesh.cell_vertices(c));
            let nodes = space.cell_nodes(c).unwrap();
            let mut local = vec![0.0; nodes.len() * nc];
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                f(&Basis::eval(space, &geom, *l), geom.point(*l), w * geom.area, &mut local);
            }
            for (i, &n) in nodes.iter().enumerate() {
                for a in 0..nc {
                    out.push((space.dof(n, a), local[i * nc + a]));
                }
            }
        }
        out
    });
    let mut out = vec![0.0; space.ndofs()];
    for (i, v) in entries {
        out[i] += v;
    }
    out
}

/// Facet analogue of [`cell_functional`].
pub fn facet_functional<F>(mesh: &Mesh, space: &FieldSpace, tags: &[FacetTag], degree: usize, f: F) -> Vec<f64>
where
    F: Fn(&Basis, &FacetPoint, &mut [f64]),
{
    let rule = LineRule::with_degree(degree);
    let nc = space.components();
    let mut out = vec![0.0; space.ndofs()];
    for fc in facet_cells(mesh, tags) {
        let Some(c) = cell_for(space, &fc) else { continue };
        let geom = CellGeometry::new(mesh.cell_vertices(c));
        let nodes = space.cell_nodes(c).unwrap();
        let mut local = vec![0.0; nodes.len() * nc];
        for pt in facet_points(mesh, &fc, &rule) {
            f(&Basis::eval(space, &geom, geom.barycentric(pt.x)), &pt, &mut local);
        }
        for (i, &n) in nodes.iter().enumerate() {
            for a in 0..nc {
                out[space.dof(n, a)] += local[i * nc + a];
            }
        }
    }
    out
}

/// `∫ f · v` for a vector (or, using the first component, scalar) field.
pub fn source(mesh: &Mesh, space: &FieldSpace, exec: Execution, f: impl Fn([f64; 2]) -> [f64; 2] + Sync + Send) -> Vec<f64> {
    let nc = space.components();
    cell_functional(mesh, space, LOAD_DEGREE, exec, |b, x, w, loc| {
        let v = f(x);
        for i in 0..b.n {
            for a in 0..nc {
                loc[i * nc + a] += w * v[a] * b.values[i];
            }
        }
    })
}

/// Per-cell quadrature of `f(x, cell, geometry, l)` summed over a subdomain.
/// Used for error norms.
pub fn integrate<F>(mesh: &Mesh, sd: Subdomain, degree: usize, exec: Execution, f: F) -> f64
where
    F: Fn([f64; 2], usize, &CellGeometry, [f64; 3]) -> f64 + Sync + Send,
{
    let cells = cells_in(mesh, sd);
    let rule = TriangleRule::with_degree(degree);
    let parts = exec::flat_map_chunks(exec, cells.len(), CELL_CHUNK, |range| {
        let mut s = 0.0;
        for &c in &cells[range] {
            let geom = CellGeometry::new(mesh.cell_vertices(c));
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                s += w * geom.area * f(geom.point(*l), c, &geom, *l);
            }
        }
        vec![s]
    });
    parts.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::element::Element;
    use crate::fem::space::TaylorHood;
    use crate::mesh::{build_split_square, build_unit_square, BcConfig};

    fn setup(n: usize) -> (Mesh, TaylorHood) {
        let mesh = build_split_square(n, BcConfig::VelDisp).unwrap();
        let th = TaylorHood::new(&mesh).unwrap();
        (mesh, th)
    }

    #[test]
    fn mass_integrates_constants_to_area() {
        let (mesh, th) = setup(4);
        for space in [&th.pf, &th.phi, &th.pp] {
            let m = mass(&mesh, space, space, Execution::Sequential).unwrap();
            let ones = vec![1.0; space.ndofs()];
            assert!((m.bilinear(&ones, &ones) - 0.5).abs() < 1e-14);
            assert!(m.asymmetry() < 1e-15);
        }
        let mixed = mass(&mesh, &th.phi, &th.pp, Execution::Sequential).unwrap();
        let x = th.pp.interpolate(|x| [x[0] * x[1], 0.0]);
        let one = vec![1.0; th.phi.ndofs()];
        // ∫_{(1/2,1)×(0,1)} xy = 3/16
        assert!((mixed.bilinear(&one, &x) - 3.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn stiffness_annihilates_constants_and_is_exact_on_quadratics() {
        let (mesh, th) = setup(4);
        let k = stiffness(&mesh, &th.pp, Execution::Sequential).unwrap();
        let ones = vec![1.0; th.pp.ndofs()];
        assert!(norm_inf(&k.mul_vec(&ones)) < 1e-12);
        let q = th.pp.interpolate(|x| [x[0] * x[0], 0.0]);
        // ∫ |∇x²|² over the porous half = ∫ 4x² = 7/6
        assert!((k.bilinear(&q, &q) - 7.0 / 6.0).abs() < 1e-13);
    }

    fn norm_inf(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn strain_form_kernel_is_rigid_motions() {
        let (mesh, th) = setup(4);
        let a = strain_strain(&mesh, &th.u, Execution::Sequential).unwrap();
        assert!(a.asymmetry() < 1e-14);
        for rigid in [|_: [f64; 2]| [1.0, 0.0], |_: [f64; 2]| [0.0, 1.0], |x: [f64; 2]| [-x[1], x[0]]] {
            let v = th.u.interpolate(rigid);
            assert!(norm_inf(&a.mul_vec(&v)) < 1e-12);
        }
        // ε((x, 0)) = e1⊗e1 has ε:ε = 1 over an area of 1/2
        let v = th.u.interpolate(|x| [x[0], 0.0]);
        assert!((a.bilinear(&v, &v) - 0.5).abs() < 1e-13);
        // shear (y, x): ε = [[0,1],[1,0]], ε:ε = 2
        let v = th.u.interpolate(|x| [x[1], x[0]]);
        assert!((a.bilinear(&v, &v) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn divergence_matches_green_identity() {
        let (mesh, th) = setup(4);
        let b = divergence(&mesh, &th.pf, &th.u, Execution::Sequential).unwrap();
        let v = th.u.interpolate(|x| [x[0] * x[0], x[0] * x[1]]);
        let q = vec![1.0; th.pf.ndofs()];
        // div = 3x; ∫_{(0,1/2)×(0,1)} 3x = 3/8
        assert!((b.bilinear(&q, &v) - 3.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn interface_forms_on_straight_interface() {
        let (mesh, th) = setup(4);
        let t = interface_tangential(&mesh, &th.u, &th.d).unwrap();
        let u = th.u.interpolate(|x| [0.0, x[1]]);
        let d = th.d.interpolate(|_| [5.0, 1.0]);
        // ∫_0^1 y · 1 dy along x = 1/2
        assert!((t.bilinear(&u, &d) - 0.5).abs() < 1e-14);
        let nf = interface_normal(&mesh, &th.pp, &th.u).unwrap();
        let p = th.pp.interpolate(|x| [x[1] * x[1], 0.0]);
        let v = th.u.interpolate(|_| [2.0, 7.0]);
        // n = (1, 0): ∫ y² · 2 = 2/3
        assert!((nf.bilinear(&p, &v) - 2.0 / 3.0).abs() < 1e-14);
        let nd = interface_normal(&mesh, &th.pp, &th.d).unwrap();
        let w = th.d.interpolate(|_| [2.0, 7.0]);
        assert!((nd.bilinear(&p, &w) - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_functional_uses_outward_normal() {
        let mesh = build_unit_square(3).unwrap();
        let s = FieldSpace::new(&mesh, Element::P2, Subdomain::Fluid, 2).unwrap();
        let ones = s.interpolate(|x| [x[0], x[1]]);
        let f = facet_functional(&mesh, &s, &[FacetTag::FluidNoSlip], 5, |b, pt, loc| {
            for i in 0..b.n {
                loc[2 * i] += pt.weight * pt.normal[0] * b.values[i];
                loc[2 * i + 1] += pt.weight * pt.normal[1] * b.values[i];
            }
        });
        // ∮ x·n = ∫ div x = 2
        let s2: f64 = f.iter().zip(&ones).map(|(a, b)| a * b).sum();
        assert!((s2 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn parallel_and_sequential_assembly_agree() {
        let (mesh, th) = setup(8);
        let a = strain_strain(&mesh, &th.d, Execution::Sequential).unwrap();
        let b = strain_strain(&mesh, &th.d, Execution::Parallel).unwrap();
        assert_eq!(a.indices(), b.indices());
        assert_eq!(a.data(), b.data());
    }
}
