//! Lagrange P1 and P2 shape functions on affine triangles.
//!
//! Local P2 dofs are the three vertices followed by the three edges, where
//! local edge `k` is opposite local vertex `k`.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Element {
    P1,
    P2,
}

impl Element {
    pub fn order(self) -> usize {
        match self {
            Element::P1 => 1,
            Element::P2 => 2,
        }
    }

    pub fn local_dofs(self) -> usize {
        match self {
            Element::P1 => 3,
            Element::P2 => 6,
        }
    }

    /// Shape function values at barycentric point `l`.
    pub fn values(self, l: [f64; 3]) -> [f64; 6] {
        let mut v = [0.0; 6];
        match self {
            Element::P1 => v[..3].copy_from_slice(&l),
            Element::P2 => {
                for i in 0..3 {
                    v[i] = l[i] * (2.0 * l[i] - 1.0);
                }
                v[3] = 4.0 * l[1] * l[2];
                v[4] = 4.0 * l[2] * l[0];
                v[5] = 4.0 * l[0] * l[1];
            }
        }
        v
    }

    /// Physical gradients at barycentric point `l` of a cell with
    /// barycentric gradients `g`.
    pub fn gradients(self, l: [f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
        let mut out = [[0.0; 2]; 6];
        match self {
            Element::P1 => out[..3].copy_from_slice(g),
            Element::P2 => {
                for i in 0..3 {
                    let s = 4.0 * l[i] - 1.0;
                    out[i] = [s * g[i][0], s * g[i][1]];
                }
                for (k, (a, b)) in [(1, 2), (2, 0), (0, 1)].into_iter().enumerate() {
                    out[3 + k] = [4.0 * (l[a] * g[b][0] + l[b] * g[a][0]), 4.0 * (l[a] * g[b][1] + l[b] * g[a][1])];
                }
            }
        }
        out
    }
}

/// Affine cell geometry.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub vertices: [[f64; 2]; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl CellGeometry {
    pub fn new(vertices: [[f64; 2]; 3]) -> Self {
        let [a, b, c] = vertices;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let area = 0.5 * det.abs();
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            let p = vertices[(i + 1) % 3];
            let q = vertices[(i + 2) % 3];
            g[i] = [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
        }
        Self {
            vertices,
            area,
            grad_lambda: g,
        }
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let v = &self.vertices;
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    }

    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let v0 = self.vertices[0];
        let g = &self.grad_lambda;
        let l1 = g[1][0] * (x[0] - v0[0]) + g[1][1] * (x[1] - v0[1]);
        let l2 = g[2][0] * (x[0] - v0[0]) + g[2][1] * (x[1] - v0[1]);
        [1.0 - l1 - l2, l1, l2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::quadrature::TriangleRule;

    fn cell() -> CellGeometry {
        CellGeometry::new([[0.1, 0.2], [0.9, 0.3], [0.4, 1.1]])
    }

    #[test]
    fn nodal_basis_is_kronecker() {
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
        ];
        for (j, l) in nodes.iter().enumerate() {
            let v = Element::P2.values(*l);
            for (i, vi) in v.iter().enumerate() {
                assert!((vi - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partition_of_unity_and_zero_gradient_sum() {
        let g = cell();
        for el in [Element::P1, Element::P2] {
            for l in TriangleRule::with_degree(4).points {
                let n = el.local_dofs();
                let s: f64 = el.values(l)[..n].iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
                let grads = el.gradients(l, &g.grad_lambda);
                let gx: f64 = grads[..n].iter().map(|d| d[0]).sum();
                let gy: f64 = grads[..n].iter().map(|d| d[1]).sum();
                assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let g = cell();
        let l = [0.2, 0.3, 0.5];
        let x = g.point(l);
        let h = 1e-6;
        let grads = Element::P2.gradients(l, &g.grad_lambda);
        for dir in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += h;
            xm[dir] -= h;
            let vp = Element::P2.values(g.barycentric(xp));
            let vm = Element::P2.values(g.barycentric(xm));
            for i in 0..6 {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - grads[i][dir]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn barycentric_round_trip() {
        let g = cell();
        let l = [0.6, 0.1, 0.3];
        let back = g.barycentric(g.point(l));
        for i in 0..3 {
            assert!((back[i] - l[i]).abs() < 1e-14);
        }
        assert!((g.area - 0.5 * (0.8 * 0.9 - 0.3 * 0.1)).abs() < 1e-15);
    }
}
