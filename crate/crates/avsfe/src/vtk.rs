//! Legacy ASCII VTK output of triangle meshes with point and cell data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use avsfe_core::mesh::Mesh;
use avsfe_core::space::Field;

use crate::error::{Error, Result};

/// Named scalar data attached to the mesh.
pub enum VtkData<'a> {
    /// One value per mesh vertex.
    Point(&'a str, Vec<f64>),
    /// One value per triangle.
    Cell(&'a str, Vec<f64>),
}

/// Vertex values of a field (first component), taken from the element that
/// owns each vertex last; continuous fields give the same value everywhere.
pub fn vertex_values(mesh: &Mesh, field: &Field, component: usize) -> Vec<f64> {
    let refs = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut out = vec![0.0; mesh.n_vertices()];
    for (tri, verts) in mesh.triangles().iter().enumerate() {
        for (k, &v) in verts.iter().enumerate() {
            out[v] = field.eval(tri, refs[k])[component];
        }
    }
    out
}

pub fn render(mesh: &Mesh, title: &str, data: &[VtkData<'_>]) -> Result<String> {
    let mut s = String::new();
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let _ = writeln!(
        s,
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} 0", v[0], v[1]);
    }
    let nt = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let points: Vec<_> = data
        .iter()
        .filter_map(|d| match d {
            VtkData::Point(n, v) => Some((n, v)),
            _ => None,
        })
        .collect();
    let cells: Vec<_> = data
        .iter()
        .filter_map(|d| match d {
            VtkData::Cell(n, v) => Some((n, v)),
            _ => None,
        })
        .collect();
    for (section, count, arrays) in [
        ("POINT_DATA", mesh.n_vertices(), &points),
        ("CELL_DATA", nt, &cells),
    ] {
        if arrays.is_empty() {
            continue;
        }
        let _ = writeln!(s, "{section} {count}");
        for (name, values) in arrays.iter() {
            if values.len() != count {
                return Err(Error::Format(format!(
                    "{section} array '{name}' has {} values, expected {count}",
                    values.len()
                )));
            }
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::Format(format!("invalid VTK array name '{name}'")));
            }
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in values.iter() {
                let _ = writeln!(s, "{v:e}");
            }
        }
    }
    Ok(s)
}

pub fn write_vtk(path: &Path, mesh: &Mesh, title: &str, data: &[VtkData<'_>]) -> Result<()> {
    let text = render(mesh, title, data)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Mesh and arrays read back from a file written by [`write_vtk`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkContents {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub point_data: Vec<(String, Vec<f64>)>,
    pub cell_data: Vec<(String, Vec<f64>)>,
}

/// Reads the subset of the legacy format produced by [`write_vtk`].
pub fn read_vtk(path: &Path) -> Result<VtkContents> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<VtkContents> {
    let bad = |m: &str| Error::Format(format!("VTK parse error: {m}"));
    let mut tok = text.lines().skip(4).flat_map(str::split_whitespace);
    let mut next = || tok.next().ok_or_else(|| bad("unexpected end of file"));
    let mut out = VtkContents::default();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(&format!("bad number '{s}'")))
    };
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| bad(&format!("bad integer '{s}'")))
    };
    if next()? != "POINTS" {
        return Err(bad("expected POINTS"));
    }
    let np = int(next()?)?;
    next()?;
    for _ in 0..np {
        let (x, y) = (num(next()?)?, num(next()?)?);
        next()?;
        out.points.push([x, y]);
    }
    if next()? != "CELLS" {
        return Err(bad("expected CELLS"));
    }
    let nc = int(next()?)?;
    next()?;
    for _ in 0..nc {
        if int(next()?)? != 3 {
            return Err(bad("only triangles are supported"));
        }
        out.triangles
            .push([int(next()?)?, int(next()?)?, int(next()?)?]);
    }
    if next()? != "CELL_TYPES" {
        return Err(bad("expected CELL_TYPES"));
    }
    for _ in 0..int(next()?)? {
        next()?;
    }
    let mut section = "";
    let mut count = 0;
    while let Ok(word) = next() {
        match word {
            "POINT_DATA" | "CELL_DATA" => {
                section = if word == "POINT_DATA" { "p" } else { "c" };
                count = int(next()?)?;
            }
            "SCALARS" => {
                let name = next()?.to_string();
                next()?;
                next()?;
                if next()? != "LOOKUP_TABLE" {
                    return Err(bad("expected LOOKUP_TABLE"));
                }
                next()?;
                let values = (0..count)
                    .map(|_| num(next()?))
                    .collect::<Result<Vec<_>>>()?;
                match section {
                    "p" => out.point_data.push((name, values)),
                    "c" => out.cell_data.push((name, values)),
                    _ => return Err(bad("SCALARS outside a data section")),
                }
            }
            w => return Err(bad(&format!("unexpected token '{w}'"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use avsfe_core::mesh::BoundaryRoles;

    fn two_triangles() -> Mesh {
        Mesh::rectangle([[0.0, 1.0], [0.0, 1.0]], 1, 1, BoundaryRoles::dirichlet()).unwrap()
    }

    #[test]
    fn two_triangle_file() {
        let mesh = two_triangles();
        let text = render(&mesh, "t", &[VtkData::Point("u", vec![0.0, 1.0, 2.0, 3.0])]).unwrap();
        assert!(text.contains("POINTS 4 double"));
        assert!(text.contains("CELLS 2 8"));
        assert_eq!(text.matches("POINT_DATA").count(), 1);
        assert_eq!(text.matches("SCALARS").count(), 1);
        let back = parse(&text).unwrap();
        assert_eq!(back.points.len(), 4);
        assert_eq!(back.triangles, mesh.triangles());
        assert_eq!(
            back.point_data,
            vec![("u".to_string(), vec![0.0, 1.0, 2.0, 3.0])]
        );
    }

    #[test]
    fn round_trip_through_file() {
        let mesh = two_triangles().refine_uniform().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vtk");
        write_vtk(
            &path,
            &mesh,
            "mesh",
            &[VtkData::Cell("eta", vec![0.5; mesh.n_triangles()])],
        )
        .unwrap();
        let back = read_vtk(&path).unwrap();
        assert_eq!(back.points.len(), mesh.n_vertices());
        assert_eq!(back.triangles.len(), mesh.n_triangles());
        assert_eq!(back.cell_data[0].1.len(), mesh.n_triangles());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let mesh = two_triangles();
        assert!(render(&mesh, "t", &[VtkData::Point("u", vec![1.0])]).is_err());
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let mesh = two_triangles();
        let err = write_vtk(Path::new("/nonexistent/dir/m.vtk"), &mesh, "t", &[]).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/m.vtk"));
    }
}
