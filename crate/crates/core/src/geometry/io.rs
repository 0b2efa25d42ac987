//! Mesh file input: OFF (ASCII) and binary STL, plus an OFF writer.
//!
//! Both readers return a [`TriMesh`] with shared vertices so the closed-mesh
//! validation can see the true topology. STL stores per-triangle corner
//! coordinates, so the reader welds vertices by exact bit-pattern equality —
//! sufficient for files produced by exact duplication (the usual case) and
//! conservative otherwise: an unwelded mesh simply fails the closure check
//! with a named edge instead of being silently accepted.

use super::{GeometryError, TriMesh};
use nalgebra::Vector3;
use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

/// Read a mesh from a file, dispatching on the (case-insensitive) extension:
/// `.off` → OFF, `.stl` → binary STL.
pub fn read_mesh(path: &Path) -> Result<TriMesh, GeometryError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "off" => read_off(path),
        "stl" => read_stl_binary(path),
        other => Err(GeometryError::MeshIo(format!(
            "unsupported mesh extension '{other}' for {}; expected .off or .stl",
            path.display()
        ))),
    }
}

/// Read an ASCII OFF file (triangles only; `#` comments allowed).
pub fn read_off(path: &Path) -> Result<TriMesh, GeometryError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GeometryError::MeshIo(format!("{}: {e}", path.display())))?;
    parse_off(&text).map_err(|msg| GeometryError::MeshIo(format!("{}: {msg}", path.display())))
}

/// Parse OFF text: header `OFF`, counts `nv nf ne`, `nv` vertex lines,
/// `nf` face lines `3 i j k`.
pub fn parse_off(text: &str) -> Result<TriMesh, String> {
    let tokens: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .collect();
    let mut pos = 0usize;
    let next = |what: &str, pos: &mut usize| -> Result<&str, String> {
        let token = tokens.get(*pos).ok_or_else(|| format!("missing {what}"))?;
        *pos += 1;
        Ok(token)
    };

    let header = next("OFF header", &mut pos)?;
    if header != "OFF" {
        return Err(format!("expected OFF header, found '{header}'"));
    }
    let nv: usize = next("vertex count", &mut pos)?
        .parse()
        .map_err(|e| format!("bad vertex count: {e}"))?;
    let nf: usize = next("face count", &mut pos)?
        .parse()
        .map_err(|e| format!("bad face count: {e}"))?;
    let _ne: usize = next("edge count", &mut pos)?
        .parse()
        .map_err(|e| format!("bad edge count: {e}"))?;

    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut coord = [0.0f64; 3];
        for c in &mut coord {
            *c = next(&format!("vertex {i} coordinate"), &mut pos)?
                .parse()
                .map_err(|e| format!("vertex {i}: {e}"))?;
        }
        vertices.push(Vector3::new(coord[0], coord[1], coord[2]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for f in 0..nf {
        let arity: usize = next(&format!("face {f} arity"), &mut pos)?
            .parse()
            .map_err(|e| format!("face {f}: {e}"))?;
        if arity != 3 {
            return Err(format!(
                "face {f} has {arity} vertices; only triangles supported"
            ));
        }
        let mut tri = [0usize; 3];
        for t in &mut tri {
            *t = next(&format!("face {f} index"), &mut pos)?
                .parse()
                .map_err(|e| format!("face {f}: {e}"))?;
        }
        triangles.push(tri);
    }
    Ok(TriMesh::new(vertices, triangles))
}

/// Write a mesh as ASCII OFF.
pub fn write_off(mesh: &TriMesh, path: &Path) -> Result<(), GeometryError> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "OFF");
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        0
    );
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    std::fs::write(path, out).map_err(|e| GeometryError::MeshIo(format!("{}: {e}", path.display())))
}

/// Read a binary STL file: 80-byte header, u32 triangle count, then
/// 50-byte records (normal 3×f32, vertices 9×f32, u16 attribute).
/// Vertices are welded by exact f32 bit patterns.
pub fn read_stl_binary(path: &Path) -> Result<TriMesh, GeometryError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| GeometryError::MeshIo(format!("{}: {e}", path.display())))?;
    parse_stl_binary(&bytes)
        .map_err(|msg| GeometryError::MeshIo(format!("{}: {msg}", path.display())))
}

/// Parse binary STL bytes (see [`read_stl_binary`]).
pub fn parse_stl_binary(bytes: &[u8]) -> Result<TriMesh, String> {
    if bytes.len() < 84 {
        return Err(format!(
            "file too short for binary STL ({} bytes)",
            bytes.len()
        ));
    }
    let count = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    let expected = 84 + 50 * count;
    if bytes.len() != expected {
        if bytes.starts_with(b"solid") {
            return Err("ASCII STL is not supported; convert to binary STL or OFF".to_string());
        }
        return Err(format!(
            "binary STL size mismatch: header declares {count} triangles ({expected} bytes), file \
             has {}",
            bytes.len()
        ));
    }

    let mut weld: HashMap<[u32; 3], usize> = HashMap::new();
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut triangles = Vec::with_capacity(count);
    let f32_at = |offset: usize| {
        f32::from_le_bytes([
            bytes[offset],
            bytes[offset + 1],
            bytes[offset + 2],
            bytes[offset + 3],
        ])
    };
    for t in 0..count {
        let base = 84 + 50 * t + 12; // skip the stored normal
        let mut tri = [0usize; 3];
        for (corner, slot) in tri.iter_mut().enumerate() {
            let off = base + 12 * corner;
            let coords = [f32_at(off), f32_at(off + 4), f32_at(off + 8)];
            let key = [
                coords[0].to_bits(),
                coords[1].to_bits(),
                coords[2].to_bits(),
            ];
            *slot = *weld.entry(key).or_insert_with(|| {
                vertices.push(Vector3::new(
                    coords[0] as f64,
                    coords[1] as f64,
                    coords[2] as f64,
                ));
                vertices.len() - 1
            });
        }
        triangles.push(tri);
    }
    Ok(TriMesh::new(vertices, triangles))
}

/// Serialize a mesh as binary STL bytes (used by tests and fixture tooling).
pub fn stl_binary_bytes(mesh: &TriMesh) -> Vec<u8> {
    let mut out = vec![0u8; 80];
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for tri in &mesh.triangles {
        let (a, b, c) = (
            mesh.vertices[tri[0]],
            mesh.vertices[tri[1]],
            mesh.vertices[tri[2]],
        );
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n / n.norm() } else { n };
        for v in [n, a, b, c] {
            for comp in [v.x, v.y, v.z] {
                out.extend_from_slice(&(comp as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}
