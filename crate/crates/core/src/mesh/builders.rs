use std::f64::consts::PI;

use super::{BcConfig, FacetTag, Mesh, Subdomain};
use crate::{Error, Result};

/// Structured triangulation of `(0,1)²` with `n` cells per unit in each
/// direction; every square is cut along its rising diagonal. The fluid
/// occupies `x < 1/2`, the porous medium `x > 1/2`, and the interface is the
/// segment `{1/2} × (0,1)`.
pub fn build_split_square(n: usize, bc: BcConfig) -> Result<Mesh> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::OddResolution(n));
    }
    let (vertices, cells) = structured_square(n);
    let cell_tags: Vec<_> = cells
        .iter()
        .map(|c| {
            let cx = (vertices[c[0]][0] + vertices[c[1]][0] + vertices[c[2]][0]) / 3.0;
            if cx < 0.5 {
                Subdomain::Fluid
            } else {
                Subdomain::Porous
            }
        })
        .collect();
    let verts = vertices.clone();
    Mesh::from_cells(vertices, cells, cell_tags, |a, b| {
        let (p, q) = (verts[a], verts[b]);
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        Some(classify_square_edge(mid, bc))
    })
}

fn classify_square_edge(mid: [f64; 2], bc: BcConfig) -> FacetTag {
    let eps = 1e-12;
    let fluid = mid[0] < 0.5;
    let vertical = mid[0] < eps || mid[0] > 1.0 - eps;
    use FacetTag::*;
    match (bc, fluid, vertical) {
        (BcConfig::StressPressure, true, true) => FluidNoSlip,
        (BcConfig::StressPressure, true, false) => FluidTraction,
        (BcConfig::StressPressure, false, true) => PorousClamped,
        (BcConfig::StressPressure, false, false) => PorousPressure,
        (BcConfig::VelDisp | BcConfig::DirichletDagger, true, true) => FluidTraction,
        (BcConfig::VelDisp | BcConfig::DirichletDagger, true, false) => FluidNoSlip,
        (BcConfig::VelDisp | BcConfig::DirichletDagger, false, true) => PorousPressure,
        (BcConfig::VelDisp, false, false) => PorousClamped,
        (BcConfig::DirichletDagger, false, false) => PorousDagger,
    }
}

fn structured_square(n: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            cells.push([v00, v10, v11]);
            cells.push([v00, v11, v01]);
        }
    }
    (vertices, cells)
}

/// Single-subdomain fluid square with no-slip walls everywhere. Used for
/// Stokes-only checks.
pub fn build_unit_square(n: usize) -> Result<Mesh> {
    if n < 1 {
        return Err(Error::InvalidMesh("need at least one cell per unit".into()));
    }
    let (vertices, cells) = structured_square(n);
    let tags = vec![Subdomain::Fluid; cells.len()];
    Mesh::from_cells(vertices, cells, tags, |_, _| Some(FacetTag::FluidNoSlip))
}

/// A polygonal porous disk (radius 1/4, `4n` interface facets) centred in the
/// fluid-filled unit square. The interface is a closed polyline. The outer
/// boundary is no-slip except near the bottom-left and top-right corners,
/// where traction segments drive the flow.
pub fn build_enclosed_disk(n: usize) -> Result<Mesh> {
    if n < 4 {
        return Err(Error::InvalidMesh(format!("enclosed disk needs n >= 4 (got {n})")));
    }
    let center = [0.5, 0.5];
    let radius = 0.25;
    let core = 0.125;
    let m = 4 * n;
    let inner_layers = n.div_ceil(4).max(1);
    let outer_layers = (n / 2).max(2);

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut cells: Vec<[usize; 3]> = Vec::new();
    let mut tags: Vec<Subdomain> = Vec::new();

    // Core: structured (n × n) grid of the square of half-width `core`.
    let gidx = |i: usize, j: usize| j * (n + 1) + i;
    for j in 0..=n {
        for i in 0..=n {
            let x = -core + 2.0 * core * i as f64 / n as f64;
            let y = -core + 2.0 * core * j as f64 / n as f64;
            vertices.push([center[0] + x, center[1] + y]);
        }
    }
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (gidx(i, j), gidx(i + 1, j), gidx(i, j + 1), gidx(i + 1, j + 1));
            // alternate diagonals by quadrant to keep the core symmetric
            if (i < n / 2) == (j < n / 2) {
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            } else {
                cells.push([v00, v10, v01]);
                cells.push([v10, v11, v01]);
            }
            tags.extend([Subdomain::Porous; 2]);
        }
    }
    // Perimeter index k of the core grid, counter-clockwise from (-c,-c).
    let core_ring: Vec<usize> = (0..m)
        .map(|k| {
            let (side, t) = (k / n, k % n);
            match side {
                0 => gidx(t, 0),
                1 => gidx(n, t),
                2 => gidx(n - t, n),
                _ => gidx(0, n - t),
            }
        })
        .collect();

    let square_point = |k: usize, half: f64| -> [f64; 2] {
        let (side, t) = (k / n, (k % n) as f64 / n as f64);
        let s = 2.0 * half * t;
        let p = match side {
            0 => [-half + s, -half],
            1 => [half, -half + s],
            2 => [half - s, half],
            _ => [-half, half - s],
        };
        [center[0] + p[0], center[1] + p[1]]
    };
    let circle_point = |k: usize| -> [f64; 2] {
        let theta = -0.75 * PI + 2.0 * PI * k as f64 / m as f64;
        [center[0] + radius * theta.cos(), center[1] + radius * theta.sin()]
    };

    let mut ring = |inner: &[usize], outer_pts: &dyn Fn(usize) -> [f64; 2], layers: usize, sd: Subdomain, vertices: &mut Vec<[f64; 2]>| -> Vec<usize> {
        let inner_pts: Vec<[f64; 2]> = inner.iter().map(|&v| vertices[v]).collect();
        let mut prev = inner.to_vec();
        for layer in 1..=layers {
            let s = layer as f64 / layers as f64;
            let next: Vec<usize> = (0..m)
                .map(|k| {
                    let o = outer_pts(k);
                    let p = inner_pts[k];
                    vertices.push([(1.0 - s) * p[0] + s * o[0], (1.0 - s) * p[1] + s * o[1]]);
                    vertices.len() - 1
                })
                .collect();
            for k in 0..m {
                let k1 = (k + 1) % m;
                let (a, b, c, d) = (prev[k], prev[k1], next[k1], next[k]);
                if k % 2 == 0 {
                    cells.push([a, b, c]);
                    cells.push([a, c, d]);
                } else {
                    cells.push([a, b, d]);
                    cells.push([b, c, d]);
                }
                tags.extend([sd; 2]);
            }
            prev = next;
        }
        prev
    };

    let interface_ring = ring(&core_ring, &circle_point, inner_layers, Subdomain::Porous, &mut vertices);
    let outer_ring = ring(&interface_ring, &|k| square_point(k, 0.5), outer_layers, Subdomain::Fluid, &mut vertices);
    let _ = outer_ring;

    let verts = vertices.clone();
    Mesh::from_cells(vertices, cells, tags, |a, b| {
        let (p, q) = (verts[a], verts[b]);
        let s = 0.5 * (p[0] + q[0]) + 0.5 * (p[1] + q[1]);
        Some(if !(0.25..=1.75).contains(&s) {
            FacetTag::FluidTraction
        } else {
            FacetTag::FluidNoSlip
        })
    })
}
