//! Trace space on the interface and the fractional interface operator.
//!
//! The trace space is the restriction of the P2 pore-pressure space to the
//! interface polyline. On it `H` realizes the weighted `H^{-1/2}` inner
//! product through the generalized eigenpairs `K u_i = λ_i M u_i`:
//! `H = (wM) U Λ^{-1/2} Uᵀ (wM)` with `Uᵀ (wM) U = I`, which is linear in
//! the weight `w`.

use std::collections::HashMap;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::fem::quadrature::LineRule;
use crate::fem::FieldSpace;
use crate::linalg::{generalized_sym_eig, CsrMatrix, GeneralizedEigen};
use crate::mesh::{FacetTag, Mesh};
use crate::{Error, Result};

/// How the interface operator treats the endpoints of an open interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FractionalVariant {
    /// Endpoint dofs removed from the eigenproblem (homogeneous Dirichlet).
    DirichletStrong,
    /// Dirichlet conditions imposed weakly by Nitsche's method.
    DirichletNitsche,
    /// Neumann Laplacian shifted by the mass matrix, `K + M`.
    NeumannPlusI,
}

impl FractionalVariant {
    pub fn name(self) -> &'static str {
        match self {
            FractionalVariant::DirichletStrong => "dirichlet-strong",
            FractionalVariant::DirichletNitsche => "dirichlet-nitsche",
            FractionalVariant::NeumannPlusI => "neumann-plus-i",
        }
    }
}

/// Treatment of eliminated endpoint dofs in [`FractionalVariant::DirichletStrong`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrongElimination {
    /// Eliminated rows and columns of `K` and `M` are replaced by unit
    /// diagonals, which leaves spurious unit eigenpairs on the endpoints.
    #[default]
    UnitDiagonal,
    /// The operator is computed on the interior dofs and extended by zero.
    ZeroExtension,
}

/// Default Nitsche penalty (`β/h` with `β = 20 k²`, `k` the polynomial
/// order of the trace space).
pub const NITSCHE_BETA: f64 = 80.0;

/// P2 trace of a scalar space on the interface.
#[derive(Debug, Clone)]
pub struct TraceSpace {
    /// Bulk node of each trace dof.
    bulk_nodes: Vec<usize>,
    bulk_size: usize,
    /// Per interface facet: trace dofs of (vertex a, vertex b, midpoint).
    facets: Vec<([usize; 3], f64)>,
    endpoints: Vec<usize>,
    /// Local trace dof of each endpoint inside its facet and that facet.
    endpoint_facets: Vec<(usize, usize, usize)>,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
}

fn line_p2(s: f64) -> ([f64; 3], [f64; 3]) {
    (
        [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)],
        [4.0 * s - 3.0, 4.0 * s - 1.0, 4.0 - 8.0 * s],
    )
}

impl TraceSpace {
    pub fn new(mesh: &Mesh, bulk: &FieldSpace) -> Result<Self> {
        let facets_iface: Vec<usize> = mesh.facets_with_tag(FacetTag::Interface).collect();
        if facets_iface.is_empty() {
            return Err(Error::EmptyInterface);
        }
        if bulk.element().order() != 2 || bulk.components() != 1 {
            return Err(Error::SpaceMismatch("trace space needs a scalar P2 space".into()));
        }
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut bulk_nodes = Vec::new();
        let mut facets = Vec::new();
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for &f in &facets_iface {
            let nodes = bulk.facet_nodes(mesh, f);
            if nodes.len() != 3 {
                return Err(Error::SpaceMismatch("interface facet outside the trace's bulk space".into()));
            }
            let local: [usize; 3] = std::array::from_fn(|k| {
                *index.entry(nodes[k]).or_insert_with(|| {
                    bulk_nodes.push(nodes[k]);
                    bulk_nodes.len() - 1
                })
            });
            *degree.entry(local[0]).or_default() += 1;
            *degree.entry(local[1]).or_default() += 1;
            facets.push((local, mesh.facet_length(f)));
        }
        let mut endpoints: Vec<usize> = degree.iter().filter(|(_, d)| **d == 1).map(|(v, _)| *v).collect();
        endpoints.sort_unstable();
        let endpoint_facets = endpoints
            .iter()
            .map(|&e| {
                let (fi, (loc, _)) = facets.iter().enumerate().find(|(_, (l, _))| l[0] == e || l[1] == e).unwrap();
                (e, fi, if loc[0] == e { 0 } else { 1 })
            })
            .collect();
        let n = bulk_nodes.len();
        let rule = LineRule::with_degree(5);
        let mut mt = Vec::new();
        let mut kt = Vec::new();
        for (loc, len) in &facets {
            for (s, w) in rule.points.iter().zip(&rule.weights) {
                let (v, d) = line_p2(*s);
                for i in 0..3 {
                    for j in 0..3 {
                        mt.push((loc[i], loc[j], w * len * v[i] * v[j]));
                        kt.push((loc[i], loc[j], w / len * d[i] * d[j]));
                    }
                }
            }
        }
        Ok(Self {
            bulk_nodes,
            bulk_size: bulk.ndofs(),
            facets,
            endpoints,
            endpoint_facets,
            mass: CsrMatrix::from_triplets(n, n, &mt),
            stiffness: CsrMatrix::from_triplets(n, n, &kt),
        })
    }

    pub fn dim(&self) -> usize {
        self.bulk_nodes.len()
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Trace dofs at the ends of an open interface; empty for a closed one.
    pub fn endpoints(&self) -> &[usize] {
        &self.endpoints
    }

    pub fn bulk_nodes(&self) -> &[usize] {
        &self.bulk_nodes
    }

    /// Restriction `R` from the bulk space to the trace space. The trace mesh
    /// matches the bulk facets, so the L² projection is the injection of the
    /// interface nodal values.
    pub fn restriction(&self) -> CsrMatrix {
        let t: Vec<_> = self.bulk_nodes.iter().enumerate().map(|(k, &b)| (k, b, 1.0)).collect();
        CsrMatrix::from_triplets(self.dim(), self.bulk_size, &t)
    }

    /// `∫_Σ φ_i ψ_j` between trace basis functions and bulk basis functions.
    pub fn trace_bulk_mass(&self) -> CsrMatrix {
        let t: Vec<_> = self.mass.triplets().into_iter().map(|(i, j, v)| (i, self.bulk_nodes[j], v)).collect();
        CsrMatrix::from_triplets(self.dim(), self.bulk_size, &t)
    }

    /// Nitsche-modified stiffness for weakly imposed homogeneous Dirichlet
    /// conditions at the endpoints.
    pub fn nitsche_stiffness(&self, beta: f64) -> CsrMatrix {
        let mut t = self.stiffness.triplets();
        for &(e, fi, side) in &self.endpoint_facets {
            let (loc, len) = self.facets[fi];
            let s = if side == 0 { 0.0 } else { 1.0 };
            // outward derivative: −d/dx at s = 0, +d/dx at s = 1
            let sign = if side == 0 { -1.0 } else { 1.0 };
            let (_, d) = line_p2(s);
            for j in 0..3 {
                let dn = sign * d[j] / len;
                t.push((e, loc[j], -dn));
                t.push((loc[j], e, -dn));
            }
            t.push((e, e, beta / len));
        }
        CsrMatrix::from_triplets(self.dim(), self.dim(), &t)
    }
}

/// Dense fractional operator on the trace space.
#[derive(Debug, Clone)]
pub struct FractionalOperator {
    pub variant: FractionalVariant,
    pub weight: f64,
    /// Eigenvalues `λ_i` of the underlying pencil (interior ones only for
    /// the zero-extended strong variant).
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors normalized so that `Uᵀ (wM) U = I`, full trace length.
    pub vectors: Mat<f64>,
    /// The operator `H` on the trace space.
    pub matrix: Mat<f64>,
}

impl FractionalOperator {
    pub fn new(trace: &TraceSpace, variant: FractionalVariant, weight: f64) -> Result<Self> {
        Self::with_options(trace, variant, weight, StrongElimination::default(), NITSCHE_BETA)
    }

    pub fn with_options(trace: &TraceSpace, variant: FractionalVariant, weight: f64, strong: StrongElimination, beta: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidParameter {
                name: "weight",
                value: weight,
                reason: "must be finite and positive",
            });
        }
        let n = trace.dim();
        let m = trace.mass();
        let (k, m, keep): (CsrMatrix, CsrMatrix, Vec<usize>) = match variant {
            FractionalVariant::NeumannPlusI => (trace.stiffness().add_scaled(m, 1.0), m.clone(), (0..n).collect()),
            FractionalVariant::DirichletNitsche => (trace.nitsche_stiffness(beta), m.clone(), (0..n).collect()),
            FractionalVariant::DirichletStrong => {
                let mut mask = vec![false; n];
                for &e in trace.endpoints() {
                    mask[e] = true;
                }
                match strong {
                    StrongElimination::UnitDiagonal => (
                        trace.stiffness().constrained(&mask, &mask, true),
                        m.constrained(&mask, &mask, true),
                        (0..n).collect(),
                    ),
                    StrongElimination::ZeroExtension => {
                        let keep: Vec<usize> = (0..n).filter(|i| !mask[*i]).collect();
                        (trace.stiffness().submatrix(&keep, &keep), m.submatrix(&keep, &keep), keep)
                    }
                }
            }
        };
        let md = m.to_dense();
        let GeneralizedEigen { values, vectors } = generalized_sym_eig(&k.to_dense(), &md)?;
        if let Some(v) = values.iter().find(|v| **v <= 0.0) {
            return Err(Error::NotSpd(format!("interface operator has eigenvalue {v:e}")));
        }
        let r = keep.len();
        let scale = 1.0 / weight.sqrt();
        // wM U Λ^{-1/2} on the kept dofs
        let u = Mat::<f64>::from_fn(r, r, |i, j| vectors[(i, j)] * scale);
        let wmu = &md * &u * weight;
        let scaled = Mat::<f64>::from_fn(r, r, |i, j| wmu[(i, j)] / values[j].sqrt());
        let h_small = &scaled * wmu.transpose();
        let mut matrix = Mat::<f64>::zeros(n, n);
        let mut full_u = Mat::<f64>::zeros(n, r);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                matrix[(i, j)] = 0.5 * (h_small[(a, b)] + h_small[(b, a)]);
            }
            for b in 0..r {
                full_u[(i, b)] = u[(a, b)];
            }
        }
        Ok(Self {
            variant,
            weight,
            eigenvalues: values,
            vectors: full_u,
            matrix,
        })
    }

    /// `Rᵀ H R` as a sparse matrix on the bulk space.
    pub fn lifted(&self, trace: &TraceSpace) -> CsrMatrix {
        let nodes = trace.bulk_nodes();
        let n = nodes.len();
        let mut t = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    t.push((nodes[i], nodes[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(trace.bulk_size, trace.bulk_size, &t)
    }
}
