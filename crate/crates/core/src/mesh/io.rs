use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DomainTag, Mesh, MeshError, Point};

/// Write the plain-text mesh format. The domain tag travels in a comment line
/// (`# domain: <tag>`), which readers that ignore comments skip harmlessly.
pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "nodes {}", mesh.num_vertices())?;
    writeln!(out, "# domain: {}", mesh.domain())?;
    for (p, &b) in mesh.vertices().iter().zip(mesh.boundary_flags()) {
        writeln!(out, "{:.17e} {:.17e} {}", p[0], p[1], u8::from(b))?;
    }
    writeln!(out, "triangles {}", mesh.num_triangles())?;
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Parse the mesh text format and validate the result.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut domain = DomainTag::Custom;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(tag) = comment.trim().strip_prefix("domain:") {
                domain = tag
                    .trim()
                    .parse()
                    .map_err(|msg| MeshError::Parse { line: i + 1, msg })?;
            }
            continue;
        }
        if !line.is_empty() {
            lines.push((i + 1, line));
        }
    }
    let mut it = lines.into_iter();
    let last_line = text.lines().count();

    let (n_nodes, _) = header(it.next(), "nodes", last_line)?;
    let mut vertices: Vec<Point> = Vec::with_capacity(n_nodes);
    let mut boundary = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, line) = it.next().ok_or_else(|| MeshError::Parse {
            line: last_line,
            msg: format!("expected {n_nodes} node lines"),
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(MeshError::Parse {
                line: ln,
                msg: format!("node line needs 'x y b', got {} fields", fields.len()),
            });
        }
        let x = parse_f64(fields[0], ln)?;
        let y = parse_f64(fields[1], ln)?;
        let b = match fields[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(MeshError::Parse {
                    line: ln,
                    msg: format!("boundary flag must be 0 or 1, got '{other}'"),
                })
            }
        };
        vertices.push([x, y]);
        boundary.push(b);
    }

    let (n_tri, _) = header(it.next(), "triangles", last_line)?;
    let mut triangles = Vec::with_capacity(n_tri);
    for _ in 0..n_tri {
        let (ln, line) = it.next().ok_or_else(|| MeshError::Parse {
            line: last_line,
            msg: format!("expected {n_tri} triangle lines"),
        })?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>().map_err(|e| MeshError::Parse {
                    line: ln,
                    msg: format!("bad vertex index '{s}': {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if idx.len() != 3 {
            return Err(MeshError::Parse {
                line: ln,
                msg: format!("triangle line needs 3 indices, got {}", idx.len()),
            });
        }
        triangles.push([idx[0], idx[1], idx[2]]);
    }
    if let Some((ln, _)) = it.next() {
        return Err(MeshError::Parse {
            line: ln,
            msg: "trailing content after triangle block".into(),
        });
    }
    Mesh::new(vertices, triangles, boundary, domain)
}

fn header(entry: Option<(usize, &str)>, keyword: &str, last_line: usize) -> Result<(usize, usize), MeshError> {
    let (ln, line) = entry.ok_or_else(|| MeshError::Parse {
        line: last_line,
        msg: format!("missing '{keyword} <count>' header"),
    })?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(keyword) {
        return Err(MeshError::Parse {
            line: ln,
            msg: format!("expected '{keyword} <count>', got '{line}'"),
        });
    }
    let count = parts
        .next()
        .and_then(|s| s.parse().ok())
        .filter(|_| parts.next().is_none())
        .ok_or_else(|| MeshError::Parse {
            line: ln,
            msg: format!("malformed '{keyword}' header"),
        })?;
    Ok((count, ln))
}

fn parse_f64(s: &str, line: usize) -> Result<f64, MeshError> {
    s.parse().map_err(|e| MeshError::Parse {
        line,
        msg: format!("bad coordinate '{s}': {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_lshape_mesh, generate_square_mesh};

    #[test]
    fn round_trip() {
        for m in [generate_square_mesh(3).unwrap(), generate_lshape_mesh(4).unwrap()] {
            let mut buf = Vec::new();
            write_mesh(&m, &mut buf).unwrap();
            let back = parse_mesh(std::str::from_utf8(&buf).unwrap()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.msh");
        let m = generate_square_mesh(2).unwrap();
        save_mesh(&m, &path).unwrap();
        assert_eq!(load_mesh(&path).unwrap(), m);
    }

    #[test]
    fn rejects_flat_triangle() {
        let text = "nodes 3\n0 0 1\n1 0 1\n2 0 1\ntriangles 1\n0 1 2\n";
        assert!(matches!(parse_mesh(text), Err(MeshError::NonPositiveArea { .. })));
    }

    #[test]
    fn missing_boundary_flag_reports_line() {
        let text = "# header comment\nnodes 3\n0 0 1\n1 0\n0 1 1\ntriangles 1\n0 1 2\n";
        match parse_mesh(text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_triangles_header() {
        let text = "nodes 3\n0 0 1\n1 0 1\n0 1 1\n0 1 2\n";
        assert!(matches!(parse_mesh(text), Err(MeshError::Parse { line: 5, .. })));
    }
}
