//! PLY reader/writer for `ascii 1.0` and `binary_little_endian 1.0`.
//!
//! Only `element vertex` (x/y/z) and `element face` (a list property named
//! `vertex_indices` or `vertex_index`) are interpreted; other elements and
//! properties are parsed and discarded so binary offsets stay correct.

use log::warn;
use nalgebra::Point3;

use super::mesh::TriMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar { name, .. } | Property::List { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    body_offset: usize,
    body_line: usize,
}

fn parse_header(bytes: &[u8], source: &str) -> Result<Header> {
    let mut offset = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let rest = &bytes[offset..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(source, "PLY header is missing `end_header`"))?;
        line_no += 1;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::parse(format!("{source}:{line_no}"), "header is not UTF-8"))?
            .trim();
        offset += end + 1;
        let location = || format!("{source}:{line_no}");
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["ply"] if line_no == 1 => {}
            _ if line_no == 1 => return Err(Error::parse(location(), "missing `ply` magic")),
            ["format", fmt, _version] => {
                encoding = Some(match *fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLe,
                    other => {
                        return Err(Error::UnsupportedFormat(format!(
                            "{}: PLY encoding `{other}`",
                            location()
                        )))
                    }
                });
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::parse(location(), format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count, item, name] => {
                let (count, item) = match (Scalar::parse(count), Scalar::parse(item)) {
                    (Some(c), Some(i)) => (c, i),
                    _ => return Err(Error::parse(location(), "unknown list property type")),
                };
                let element = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(location(), "property before any element"))?;
                element.properties.push(Property::List {
                    name: name.to_string(),
                    count,
                    item,
                });
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| Error::parse(location(), format!("unknown property type `{ty}`")))?;
                let element = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(location(), "property before any element"))?;
                element.properties.push(Property::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            ["end_header"] => break,
            [] => {}
            _ => return Err(Error::parse(location(), format!("unrecognised header line `{line}`"))),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse(source, "PLY header has no `format` line"))?;
    Ok(Header {
        encoding,
        elements,
        body_offset: offset,
        body_line: line_no,
    })
}

/// One decoded element record: scalar values in property order, list
/// values flattened per property.
type Record = Vec<Vec<f64>>;

trait RecordSource {
    fn next_record(&mut self, element: &Element) -> Result<Record>;
}

struct AsciiBody<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    first_line: usize,
    source: &'a str,
}

impl RecordSource for AsciiBody<'_> {
    fn next_record(&mut self, element: &Element) -> Result<Record> {
        let (n, line) = loop {
            match self.lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some(x) => break x,
                None => {
                    return Err(Error::parse(
                        self.source,
                        format!("unexpected end of file in element `{}`", element.name),
                    ))
                }
            }
        };
        let location = format!("{}:{}", self.source, self.first_line + n + 1);
        let mut tokens = line.split_whitespace();
        let mut next = |what: &str| -> Result<f64> {
            let t = tokens
                .next()
                .ok_or_else(|| Error::parse(&location, format!("missing value for `{what}`")))?;
            t.parse()
                .map_err(|_| Error::parse(&location, format!("`{t}` is not a number")))
        };
        let mut record = Vec::with_capacity(element.properties.len());
        for p in &element.properties {
            match p {
                Property::Scalar { name, .. } => record.push(vec![next(name)?]),
                Property::List { name, .. } => {
                    let len = next(name)?;
                    if len < 0.0 || len.fract() != 0.0 {
                        return Err(Error::parse(&location, format!("bad list length {len}")));
                    }
                    let items = (0..len as usize).map(|_| next(name)).collect::<Result<Vec<_>>>()?;
                    record.push(items);
                }
            }
        }
        Ok(record)
    }
}

struct BinaryBody<'a> {
    bytes: &'a [u8],
    offset: usize,
    source: &'a str,
}

impl BinaryBody<'_> {
    fn take(&mut self, ty: Scalar) -> Result<f64> {
        let size = ty.size();
        if self.offset + size > self.bytes.len() {
            return Err(Error::parse(
                format!("{}@{}", self.source, self.offset),
                "unexpected end of binary data",
            ));
        }
        let v = ty.read_le(&self.bytes[self.offset..self.offset + size]);
        self.offset += size;
        Ok(v)
    }
}

impl RecordSource for BinaryBody<'_> {
    fn next_record(&mut self, element: &Element) -> Result<Record> {
        let mut record = Vec::with_capacity(element.properties.len());
        for p in &element.properties {
            match p {
                Property::Scalar { ty, .. } => record.push(vec![self.take(*ty)?]),
                Property::List { count, item, .. } => {
                    let at = self.offset;
                    let len = self.take(*count)?;
                    if len < 0.0 {
                        return Err(Error::parse(format!("{}@{at}", self.source), "negative list length"));
                    }
                    let items = (0..len as usize).map(|_| self.take(*item)).collect::<Result<Vec<_>>>()?;
                    record.push(items);
                }
            }
        }
        Ok(record)
    }
}

pub fn parse_ply(bytes: &[u8], source: &str) -> Result<TriMesh> {
    let header = parse_header(bytes, source)?;
    let body = &bytes[header.body_offset..];
    let text;
    let mut reader: Box<dyn RecordSource + '_> = match header.encoding {
        Encoding::Ascii => {
            text = std::str::from_utf8(body).map_err(|_| Error::parse(source, "ASCII PLY body is not UTF-8"))?;
            Box::new(AsciiBody {
                lines: text.lines().enumerate(),
                first_line: header.body_line,
                source,
            })
        }
        Encoding::BinaryLe => Box::new(BinaryBody {
            bytes: body,
            offset: 0,
            source,
        }),
    };

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut fanned = 0usize;
    let mut saw_vertex = false;
    for element in &header.elements {
        match element.name.as_str() {
            "vertex" => {
                saw_vertex = true;
                let pos = |axis: &str| {
                    element
                        .properties
                        .iter()
                        .position(|p| p.name() == axis && matches!(p, Property::Scalar { .. }))
                        .ok_or_else(|| Error::parse(source, format!("vertex element has no `{axis}` property")))
                };
                let (ix, iy, iz) = (pos("x")?, pos("y")?, pos("z")?);
                vertices.reserve(element.count);
                for _ in 0..element.count {
                    let r = reader.next_record(element)?;
                    vertices.push(Point3::new(r[ix][0], r[iy][0], r[iz][0]));
                }
            }
            "face" => {
                let idx = element
                    .properties
                    .iter()
                    .position(|p| {
                        matches!(p, Property::List { .. })
                            && (p.name() == "vertex_indices" || p.name() == "vertex_index")
                    })
                    .ok_or_else(|| Error::parse(source, "face element has no `vertex_indices` list"))?;
                for f in 0..element.count {
                    let r = reader.next_record(element)?;
                    let corners = &r[idx];
                    if corners.len() < 3 {
                        return Err(Error::parse(source, format!("face {f} has {} vertices", corners.len())));
                    }
                    if corners.iter().any(|&c| c < 0.0 || c.fract() != 0.0) {
                        return Err(Error::parse(source, format!("face {f} has an invalid vertex index")));
                    }
                    if corners.len() > 3 {
                        fanned += 1;
                    }
                    for k in 1..corners.len() - 1 {
                        triangles.push([corners[0] as usize, corners[k] as usize, corners[k + 1] as usize]);
                    }
                }
            }
            _ => {
                for _ in 0..element.count {
                    reader.next_record(element)?;
                }
            }
        }
    }
    if !saw_vertex {
        return Err(Error::parse(source, "PLY has no vertex element"));
    }
    if fanned > 0 {
        warn!("{source}: fan-triangulated {fanned} polygon(s) with more than 3 vertices");
    }
    TriMesh::new(vertices, triangles).map_err(|e| match e {
        Error::IndexOutOfRange { .. } | Error::InvalidMesh(_) => Error::parse(source, e.to_string()),
        other => other,
    })
}

fn header_text(mesh: &TriMesh, format: &str, coord: &str) -> String {
    format!(
        "ply\nformat {format} 1.0\nelement vertex {}\nproperty {coord} x\nproperty {coord} y\nproperty {coord} z\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertex_count(),
        mesh.triangle_count()
    )
}

pub fn to_ply_ascii(mesh: &TriMesh) -> String {
    use std::fmt::Write as _;
    let mut out = header_text(mesh, "ascii", "double");
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    out
}

pub fn to_ply_binary(mesh: &TriMesh) -> Vec<u8> {
    let mut out = header_text(mesh, "binary_little_endian", "double").into_bytes();
    for v in mesh.vertices() {
        for c in [v.x, v.y, v.z] {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    for tri in mesh.triangles() {
        out.push(3);
        for &i in tri {
            out.extend_from_slice(&(i as i32).to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: &str = "ply\nformat ascii 1.0\ncomment hi\nelement vertex 3\nproperty float x\nproperty float y\n\
        property float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\n\
        element edge 1\nproperty int a\nproperty int b\nend_header\n0 0 0 255\n1 0 0 0\n0 1 0 0\n3 0 1 2\n0 1\n";

    #[test]
    fn ascii_with_extra_properties_and_elements() {
        let mesh = parse_ply(TRI.as_bytes(), "t").unwrap();
        assert_eq!(mesh.vertex_count(), 3);
        assert_eq!(mesh.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn binary_round_trip() {
        let mesh = parse_ply(TRI.as_bytes(), "t").unwrap();
        let bytes = to_ply_binary(&mesh);
        assert_eq!(parse_ply(&bytes, "t").unwrap(), mesh);
        assert_eq!(parse_ply(to_ply_ascii(&mesh).as_bytes(), "t").unwrap(), mesh);
    }

    #[test]
    fn truncated_binary_reports_offset() {
        let mesh = parse_ply(TRI.as_bytes(), "t").unwrap();
        let mut bytes = to_ply_binary(&mesh);
        bytes.truncate(bytes.len() - 3);
        let err = parse_ply(&bytes, "t").unwrap_err().to_string();
        assert!(err.starts_with("t@"), "{err}");
    }

    #[test]
    fn big_endian_is_unsupported() {
        let text = TRI.replace("ascii", "binary_big_endian");
        assert!(matches!(parse_ply(text.as_bytes(), "t"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn out_of_range_index() {
        let text = TRI.replace("3 0 1 2", "3 0 1 7");
        assert!(parse_ply(text.as_bytes(), "t").unwrap_err().to_string().contains("vertex 7"));
    }
}
