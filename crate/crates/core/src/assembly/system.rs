use super::params::Params;
use crate::exec::Execution;
use crate::fem::forms::{self, LOAD_DEGREE};
use crate::fem::{DirichletSet, Field, TaylorHood};
use crate::linalg::{CsrMatrix, SparseLu};
use crate::mesh::{FacetTag, Mesh};
use crate::Result;

/// Parameter-independent matrices of the coupled problem on one mesh.
/// A single instance serves every parameter combination of a sweep.
#[derive(Debug, Clone)]
pub struct Operators {
    pub spaces: TaylorHood,
    /// `(ε(u), ε(v))` on the fluid velocity space.
    pub strain_u: CsrMatrix,
    /// `(ε(d), ε(w))` on the displacement space.
    pub strain_d: CsrMatrix,
    pub tangential_uu: CsrMatrix,
    pub tangential_ud: CsrMatrix,
    pub tangential_dd: CsrMatrix,
    /// `(q, div v)`, fluid pressure by velocity.
    pub div_u: CsrMatrix,
    /// `(ψ, div w)`, total pressure by displacement.
    pub div_d: CsrMatrix,
    /// `⟨r, v·n⟩_Σ`, pore pressure by velocity.
    pub normal_u: CsrMatrix,
    /// `⟨r, w·n⟩_Σ`, pore pressure by displacement.
    pub normal_d: CsrMatrix,
    pub mass_pf: CsrMatrix,
    pub mass_phi: CsrMatrix,
    pub mass_pp: CsrMatrix,
    pub stiffness_pp: CsrMatrix,
    /// `(ψ, r)`, total pressure by pore pressure.
    pub mass_mixed: CsrMatrix,
}

impl Operators {
    pub fn assemble(mesh: &Mesh, exec: Execution) -> Result<Self> {
        let s = TaylorHood::new(mesh)?;
        Ok(Self {
            strain_u: forms::strain_strain(mesh, &s.u, exec)?,
            strain_d: forms::strain_strain(mesh, &s.d, exec)?,
            tangential_uu: forms::interface_tangential(mesh, &s.u, &s.u)?,
            tangential_ud: forms::interface_tangential(mesh, &s.u, &s.d)?,
            tangential_dd: forms::interface_tangential(mesh, &s.d, &s.d)?,
            div_u: forms::divergence(mesh, &s.pf, &s.u, exec)?,
            div_d: forms::divergence(mesh, &s.phi, &s.d, exec)?,
            normal_u: forms::interface_normal(mesh, &s.pp, &s.u)?,
            normal_d: forms::interface_normal(mesh, &s.pp, &s.d)?,
            mass_pf: forms::mass(mesh, &s.pf, &s.pf, exec)?,
            mass_phi: forms::mass(mesh, &s.phi, &s.phi, exec)?,
            mass_pp: forms::mass(mesh, &s.pp, &s.pp, exec)?,
            stiffness_pp: forms::stiffness(mesh, &s.pp, exec)?,
            mass_mixed: forms::mass(mesh, &s.phi, &s.pp, exec)?,
            spaces: s,
        })
    }

    /// Fluid momentum block `2μ_f ε:ε + c TᵀT`.
    pub fn fluid_elasticity(&self, p: &Params) -> CsrMatrix {
        self.strain_u.scaled(2.0 * p.mu_f).add_scaled(&self.tangential_uu, p.slip())
    }

    /// Solid momentum block `2μ_s ε:ε + c TᵀT`.
    pub fn solid_elasticity(&self, p: &Params) -> CsrMatrix {
        self.strain_d.scaled(2.0 * p.mu_s).add_scaled(&self.tangential_dd, p.slip())
    }

    /// Pore-pressure block (sign flipped): `(C0 + α²/λ) M + (κ/μ_f) K`.
    pub fn pressure_operator(&self, p: &Params) -> CsrMatrix {
        self.mass_pp
            .scaled(p.c0 + p.alpha * p.alpha / p.lambda)
            .add_scaled(&self.stiffness_pp, p.kappa / p.mu_f)
    }

    /// The 5×5 block operator before boundary conditions. Absent blocks are
    /// structurally zero.
    pub fn blocks(&self, p: &Params) -> Blocks {
        let c = p.slip();
        let mut b: Blocks = Default::default();
        let set = |b: &mut Blocks, i: Field, j: Field, m: CsrMatrix| {
            let t = m.transpose();
            b[i.index()][j.index()] = Some(m);
            if i != j {
                b[j.index()][i.index()] = Some(t);
            }
        };
        use Field::*;
        set(&mut b, U, U, self.fluid_elasticity(p));
        set(&mut b, U, D, self.tangential_ud.scaled(-c));
        set(&mut b, D, D, self.solid_elasticity(p));
        set(&mut b, PF, U, self.div_u.scaled(-1.0));
        set(&mut b, Phi, D, self.div_d.scaled(-1.0));
        set(&mut b, PP, U, self.normal_u.clone());
        set(&mut b, PP, D, self.normal_d.scaled(-1.0));
        set(&mut b, Phi, Phi, self.mass_phi.scaled(-1.0 / p.lambda));
        set(&mut b, Phi, PP, self.mass_mixed.scaled(p.alpha / p.lambda));
        set(&mut b, PP, PP, self.pressure_operator(p).scaled(-1.0));
        b
    }
}

pub type Blocks = [[Option<CsrMatrix>; 5]; 5];

/// Number of structurally nonzero blocks.
pub fn nonzero_blocks(b: &Blocks) -> usize {
    b.iter().flatten().filter(|m| m.as_ref().is_some_and(|m| m.nnz() > 0)).count()
}

pub fn monolithic(spaces: &TaylorHood, b: &Blocks) -> CsrMatrix {
    let sizes = spaces.sizes();
    let refs: Vec<Vec<Option<&CsrMatrix>>> = b.iter().map(|row| row.iter().map(|m| m.as_ref()).collect()).collect();
    CsrMatrix::from_blocks(&sizes, &sizes, &refs)
}

/// Facet tags on which each field carries an essential condition.
pub fn dirichlet_tags(field: Field) -> &'static [FacetTag] {
    match field {
        Field::U => &[FacetTag::FluidNoSlip],
        Field::D => &[FacetTag::PorousClamped, FacetTag::PorousDagger],
        Field::PP => &[FacetTag::PorousPressure, FacetTag::PorousDagger],
        Field::PF | Field::Phi => &[],
    }
}

/// Global (monolithic) Dirichlet dofs with values from `g(field, x)`.
pub fn dirichlet_set(mesh: &Mesh, spaces: &TaylorHood, g: impl Fn(Field, [f64; 2]) -> [f64; 2]) -> Result<DirichletSet> {
    let off = spaces.offsets();
    let mut set = DirichletSet::new();
    for field in Field::ALL {
        let space = spaces.field(field);
        for node in space.nodes_on_tags(mesh, dirichlet_tags(field)) {
            let v = g(field, space.node_coords()[node]);
            for c in 0..space.components() {
                set.insert(off[field.index()] + space.dof(node, c), v[c])?;
            }
        }
    }
    Ok(set)
}

/// Local (per-field) Dirichlet mask.
pub fn field_mask(spaces: &TaylorHood, dirichlet: &DirichletSet, field: Field) -> Vec<bool> {
    let off = spaces.offsets();
    let (lo, hi) = (off[field.index()], off[field.index() + 1]);
    let mut mask = vec![false; hi - lo];
    for (d, _) in dirichlet.iter() {
        if (lo..hi).contains(&d) {
            mask[d - lo] = true;
        }
    }
    mask
}

/// The assembled monolithic system with essential conditions eliminated
/// symmetrically (constrained rows and columns zeroed, unit diagonal).
#[derive(Debug, Clone)]
pub struct System {
    pub params: Params,
    pub matrix: CsrMatrix,
    pub unconstrained: CsrMatrix,
    pub dirichlet: DirichletSet,
}

impl System {
    pub fn new(ops: &Operators, params: &Params, dirichlet: DirichletSet) -> Result<Self> {
        params.validate()?;
        let unconstrained = monolithic(&ops.spaces, &ops.blocks(params));
        let mask = dirichlet.mask(unconstrained.nrows());
        let matrix = unconstrained.constrained(&mask, &mask, true);
        Ok(Self {
            params: *params,
            matrix,
            unconstrained,
            dirichlet,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Moves the Dirichlet data to the right-hand side and overwrites the
    /// constrained entries with their prescribed values.
    pub fn apply_dirichlet(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut g = vec![0.0; n];
        for (d, v) in self.dirichlet.iter() {
            g[d] = v;
        }
        let ag = self.unconstrained.mul_vec(&g);
        let mut b: Vec<f64> = rhs.iter().zip(&ag).map(|(r, a)| r - a).collect();
        for (d, v) in self.dirichlet.iter() {
            b[d] = v;
        }
        b
    }

    pub fn solve_direct(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(SparseLu::new(&self.matrix, "monolithic system")?.solve(rhs))
    }
}

/// Volume and boundary data of the coupled problem.
pub struct Forcing<'a> {
    pub gravity: [f64; 2],
    pub solid_force: Option<&'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync)>,
    pub mass_source: Option<&'a (dyn Fn([f64; 2]) -> f64 + Sync)>,
    /// Prescribed traction `t(x, n)` on fluid traction facets, `n` the
    /// outward normal.
    pub traction: Option<&'a (dyn Fn([f64; 2], [f64; 2]) -> [f64; 2] + Sync)>,
}

impl Default for Forcing<'_> {
    fn default() -> Self {
        Self {
            gravity: [0.0, 0.0],
            solid_force: None,
            mass_source: None,
            traction: None,
        }
    }
}

/// Right-hand side before essential conditions:
/// `ρ_f(g, v) + ⟨t, v⟩`, `ρ_s(f, w)`, and
/// `−(m_P, r) − ρ_f(g, ∇r) + ρ_f⟨g·n, r⟩_Σ` for the pore pressure.
pub fn assemble_load(mesh: &Mesh, ops: &Operators, p: &Params, forcing: &Forcing, exec: Execution) -> Vec<f64> {
    let s = &ops.spaces;
    let g = forcing.gravity;
    let mut u = forms::source(mesh, &s.u, exec, |_| [p.rho_f * g[0], p.rho_f * g[1]]);
    if let Some(t) = forcing.traction {
        let tl = forms::facet_functional(mesh, &s.u, &[FacetTag::FluidTraction], 9, |b, pt, loc| {
            let tv = t(pt.x, pt.normal);
            for i in 0..b.n {
                loc[2 * i] += pt.weight * tv[0] * b.values[i];
                loc[2 * i + 1] += pt.weight * tv[1] * b.values[i];
            }
        });
        u.iter_mut().zip(tl).for_each(|(a, b)| *a += b);
    }
    let d = match forcing.solid_force {
        Some(f) => forms::source(mesh, &s.d, exec, |x| {
            let v = f(x);
            [p.rho_s * v[0], p.rho_s * v[1]]
        }),
        None => vec![0.0; s.d.ndofs()],
    };
    let mut pp = forms::cell_functional(mesh, &s.pp, LOAD_DEGREE, exec, |b, x, w, loc| {
        let m = forcing.mass_source.map_or(0.0, |m| m(x));
        for i in 0..b.n {
            loc[i] -= w * (m * b.values[i] + p.rho_f * (g[0] * b.grads[i][0] + g[1] * b.grads[i][1]));
        }
    });
    if g != [0.0, 0.0] {
        let gamma = forms::facet_functional(mesh, &s.pp, &[FacetTag::Interface], 5, |b, pt, loc| {
            let gn = g[0] * pt.normal[0] + g[1] * pt.normal[1];
            for i in 0..b.n {
                loc[i] += pt.weight * p.rho_f * gn * b.values[i];
            }
        });
        pp.iter_mut().zip(gamma).for_each(|(a, b)| *a += b);
    }
    let mut out = u;
    out.extend(d);
    out.extend(vec![0.0; s.pf.ndofs() + s.phi.ndofs()]);
    out.extend(pp);
    out
}
