//! Plain-text mesh format.
//!
//! ```text
//! nv nc nf
//! x y                 (nv lines)
//! v0 v1 v2 F|P        (nc lines)
//! v0 v1 TAG           (nf lines, boundary facets only)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{FacetTag, Mesh, Subdomain};
use crate::{Error, Result};

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    mesh_from_str(&std::fs::read_to_string(path)?)
}

pub(crate) fn mesh_to_string(mesh: &Mesh) -> String {
    let boundary: Vec<usize> = (0..mesh.num_facets()).filter(|&f| mesh.facet_cells()[f][1].is_none()).collect();
    let mut s = String::new();
    writeln!(s, "{} {} {}", mesh.num_vertices(), mesh.num_cells(), boundary.len()).unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{:.17e} {:.17e}", p[0], p[1]).unwrap();
    }
    for (c, t) in mesh.cells().iter().zip(mesh.cell_tags()) {
        let t = match t {
            Subdomain::Fluid => 'F',
            Subdomain::Porous => 'P',
        };
        writeln!(s, "{} {} {} {t}", c[0], c[1], c[2]).unwrap();
    }
    for f in boundary {
        let [a, b] = mesh.facets()[f];
        writeln!(s, "{a} {b} {}", mesh.facet_tags()[f]).unwrap();
    }
    s
}

pub(crate) fn mesh_from_str(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse(format!("unexpected end of file while reading {what}")));
    let header: Vec<usize> = next("header")?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token {t:?}"))))
        .collect::<Result<_>>()?;
    let [nv, nc, nf] = header[..] else {
        return Err(Error::Parse("header must hold three counts".into()));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}")));
    let idx = |t: &str| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad index {t:?}")));

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let tok: Vec<&str> = next("vertex")?.split_whitespace().collect();
        if tok.len() != 2 {
            return Err(Error::Parse("vertex line needs two coordinates".into()));
        }
        vertices.push([num(tok[0])?, num(tok[1])?]);
    }
    let mut cells = Vec::with_capacity(nc);
    let mut tags = Vec::with_capacity(nc);
    for _ in 0..nc {
        let tok: Vec<&str> = next("cell")?.split_whitespace().collect();
        if tok.len() != 4 {
            return Err(Error::Parse("cell line needs three vertices and a tag".into()));
        }
        cells.push([idx(tok[0])?, idx(tok[1])?, idx(tok[2])?]);
        tags.push(match tok[3] {
            "F" => Subdomain::Fluid,
            "P" => Subdomain::Porous,
            t => return Err(Error::Parse(format!("unknown subdomain {t:?}"))),
        });
    }
    let mut boundary = HashMap::with_capacity(nf);
    for _ in 0..nf {
        let tok: Vec<&str> = next("facet")?.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(Error::Parse("facet line needs two vertices and a tag".into()));
        }
        let (a, b) = (idx(tok[0])?, idx(tok[1])?);
        let tag = FacetTag::from_name(tok[2]).ok_or_else(|| Error::Parse(format!("unknown facet tag {:?}", tok[2])))?;
        boundary.insert((a.min(b), a.max(b)), tag);
    }
    Mesh::from_cells(vertices, cells, tags, |a, b| boundary.get(&(a.min(b), a.max(b))).copied())
}
