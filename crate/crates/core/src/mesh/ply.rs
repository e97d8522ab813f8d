use std::io::Write;

use super::{Mesh, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

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
    fn parse(name: &str) -> Option<Self> {
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

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    body_offset: usize,
    body_line: usize,
}

fn parse_header(data: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut lineno = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = data[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(format!("line {}", lineno + 1), "unterminated PLY header"))?;
        let line = std::str::from_utf8(&data[pos..pos + end])
            .map_err(|_| Error::parse(format!("line {}", lineno + 1), "header is not UTF-8"))?
            .trim();
        pos += end + 1;
        lineno += 1;
        let loc = format!("line {lineno}");
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["ply"] if lineno == 1 => {}
            _ if lineno == 1 => return Err(Error::parse(loc, "missing `ply` magic")),
            ["format", "ascii", _] => encoding = Some(PlyEncoding::Ascii),
            ["format", "binary_little_endian", _] => {
                encoding = Some(PlyEncoding::BinaryLittleEndian)
            }
            ["format", other, ..] => {
                return Err(Error::parse(loc, format!("unsupported PLY format `{other}`")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::parse(&loc, format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            ["property", "list", count, item, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(&loc, "property before element"))?;
                let (count, item) = Scalar::parse(count)
                    .zip(Scalar::parse(item))
                    .ok_or_else(|| Error::parse(&loc, "unknown list property type"))?;
                el.props.push(Property::List {
                    name: name.to_string(),
                    count,
                    item,
                });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(&loc, "property before element"))?;
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| Error::parse(&loc, format!("unknown property type `{ty}`")))?;
                el.props.push(Property::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            ["end_header"] => break,
            _ => return Err(Error::parse(loc, format!("unexpected header line `{line}`"))),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse("header", "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body_offset: pos,
        body_line: lineno,
    })
}

/// One parsed element record: scalar values and list values in property order.
enum Value {
    Scalar(f64),
    List(Vec<f64>),
}

trait RecordSource {
    fn read_record(&mut self, el: &Element) -> Result<Vec<Value>>;
}

struct AsciiSource<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    first_line: usize,
}

impl RecordSource for AsciiSource<'_> {
    fn read_record(&mut self, el: &Element) -> Result<Vec<Value>> {
        let (i, line) = loop {
            match self.lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some(x) => break x,
                None => {
                    return Err(Error::parse(
                        format!("line {}", self.first_line + 1),
                        format!("unexpected end of {} data", el.name),
                    ))
                }
            }
        };
        let loc = format!("line {}", self.first_line + i + 1);
        let mut toks = line.split_whitespace();
        let mut next = |what: &str| -> Result<f64> {
            let t = toks
                .next()
                .ok_or_else(|| Error::parse(&loc, format!("missing {what}")))?;
            t.parse()
                .map_err(|_| Error::parse(&loc, format!("bad number `{t}`")))
        };
        let mut out = Vec::with_capacity(el.props.len());
        for p in &el.props {
            match p {
                Property::Scalar { name, .. } => out.push(Value::Scalar(next(name)?)),
                Property::List { name, .. } => {
                    let n = next(name)? as usize;
                    let items = (0..n).map(|_| next(name)).collect::<Result<_>>()?;
                    out.push(Value::List(items));
                }
            }
        }
        Ok(out)
    }
}

struct BinarySource<'a> {
    data: &'a [u8],
    pos: usize,
}

impl BinarySource<'_> {
    fn take(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        if self.pos + n > self.data.len() {
            return Err(Error::parse(format!("byte {}", self.pos), "unexpected end of PLY body"));
        }
        let v = ty.read_le(&self.data[self.pos..self.pos + n]);
        self.pos += n;
        Ok(v)
    }
}

impl RecordSource for BinarySource<'_> {
    fn read_record(&mut self, el: &Element) -> Result<Vec<Value>> {
        let mut out = Vec::with_capacity(el.props.len());
        for p in &el.props {
            match p {
                Property::Scalar { ty, .. } => out.push(Value::Scalar(self.take(*ty)?)),
                Property::List { count, item, .. } => {
                    let n = self.take(*count)? as usize;
                    let items = (0..n).map(|_| self.take(*item)).collect::<Result<_>>()?;
                    out.push(Value::List(items));
                }
            }
        }
        Ok(out)
    }
}

/// Parses ASCII or binary little-endian PLY with a `vertex` element carrying
/// `x`,`y`,`z` and an optional `face` element with a triangle index list.
pub fn read_ply(data: &[u8]) -> Result<Mesh> {
    let header = parse_header(data)?;
    let body = &data[header.body_offset..];
    let mut source: Box<dyn RecordSource> = match header.encoding {
        PlyEncoding::Ascii => {
            let text = std::str::from_utf8(body)
                .map_err(|_| Error::parse("body", "ASCII PLY body is not UTF-8"))?;
            Box::new(AsciiSource {
                lines: text.lines().enumerate(),
                first_line: header.body_line,
            })
        }
        PlyEncoding::BinaryLittleEndian => Box::new(BinarySource {
            data,
            pos: header.body_offset,
        }),
    };

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for el in &header.elements {
        let prop_index = |wanted: &str| {
            el.props.iter().position(|p| match p {
                Property::Scalar { name, .. } | Property::List { name, .. } => name == wanted,
            })
        };
        match el.name.as_str() {
            "vertex" => {
                let idx = ["x", "y", "z"].map(prop_index);
                let [Some(ix), Some(iy), Some(iz)] = idx else {
                    return Err(Error::parse("header", "vertex element lacks x/y/z"));
                };
                vertices.reserve(el.count);
                for _ in 0..el.count {
                    let rec = source.read_record(el)?;
                    let get = |i: usize| match &rec[i] {
                        Value::Scalar(v) => Ok(*v),
                        Value::List(_) => Err(Error::parse("header", "coordinate is a list")),
                    };
                    vertices.push(Vec3::new(get(ix)?, get(iy)?, get(iz)?));
                }
            }
            "face" => {
                let li = prop_index("vertex_indices")
                    .or_else(|| prop_index("vertex_index"))
                    .ok_or_else(|| Error::parse("header", "face element lacks vertex_indices"))?;
                faces.reserve(el.count);
                for fi in 0..el.count {
                    let rec = source.read_record(el)?;
                    let Value::List(items) = &rec[li] else {
                        return Err(Error::parse("header", "vertex_indices is not a list"));
                    };
                    if items.len() != 3 {
                        return Err(Error::parse(
                            format!("face {fi}"),
                            format!("face has {} vertices, only triangles are supported", items.len()),
                        ));
                    }
                    let mut f = [0usize; 3];
                    for (slot, &v) in f.iter_mut().zip(items) {
                        if v < 0.0 {
                            return Err(Error::parse(format!("face {fi}"), "negative vertex index"));
                        }
                        *slot = v as usize;
                    }
                    faces.push(f);
                }
            }
            _ => {
                for _ in 0..el.count {
                    source.read_record(el)?;
                }
            }
        }
    }
    let mesh = Mesh { vertices, faces };
    mesh.validate()?;
    Ok(mesh)
}

pub fn write_ply(mesh: &Mesh, encoding: PlyEncoding, out: &mut impl Write) -> std::io::Result<()> {
    let format = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        out,
        "ply\nformat {format} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.faces.len()
    )?;
    match encoding {
        PlyEncoding::Ascii => {
            for v in &mesh.vertices {
                writeln!(out, "{} {} {}", v.x, v.y, v.z)?;
            }
            for f in &mesh.faces {
                writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
        PlyEncoding::BinaryLittleEndian => {
            for v in &mesh.vertices {
                for c in v.iter() {
                    out.write_all(&c.to_le_bytes())?;
                }
            }
            for f in &mesh.faces {
                out.write_all(&[3])?;
                for &i in f {
                    out.write_all(&(i as i32).to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}
