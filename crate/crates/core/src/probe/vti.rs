//! VTK XML ImageData (`.vti`) header and point-data reader.
//!
//! Supported: little-endian, uncompressed; `ascii` and `binary` (base64)
//! inline arrays; `appended` arrays in raw or base64 encoding; UInt32 or
//! UInt64 block headers.

use super::{check_size, Accum, DataKind, DataType, DatasetMeta, ProbeError, VariableDesc};
use base64::Engine;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scalar {
    Int8,
    UInt8,
    Int16,
    UInt16,
    Int32,
    UInt32,
    Int64,
    UInt64,
    Float32,
    Float64,
}

impl Scalar {
    pub fn from_name(name: &str) -> Option<Scalar> {
        Some(match name {
            "Int8" | "Char" => Scalar::Int8,
            "UInt8" | "UnsignedChar" => Scalar::UInt8,
            "Int16" => Scalar::Int16,
            "UInt16" => Scalar::UInt16,
            "Int32" => Scalar::Int32,
            "UInt32" => Scalar::UInt32,
            "Int64" => Scalar::Int64,
            "UInt64" => Scalar::UInt64,
            "Float32" => Scalar::Float32,
            "Float64" => Scalar::Float64,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Scalar::Int8 => "Int8",
            Scalar::UInt8 => "UInt8",
            Scalar::Int16 => "Int16",
            Scalar::UInt16 => "UInt16",
            Scalar::Int32 => "Int32",
            Scalar::UInt32 => "UInt32",
            Scalar::Int64 => "Int64",
            Scalar::UInt64 => "UInt64",
            Scalar::Float32 => "Float32",
            Scalar::Float64 => "Float64",
        }
    }

    pub fn size(self) -> usize {
        match self {
            Scalar::Int8 | Scalar::UInt8 => 1,
            Scalar::Int16 | Scalar::UInt16 => 2,
            Scalar::Int32 | Scalar::UInt32 | Scalar::Float32 => 4,
            Scalar::Int64 | Scalar::UInt64 | Scalar::Float64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::Int8 => b[0] as i8 as f64,
            Scalar::UInt8 => b[0] as f64,
            Scalar::Int16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::UInt16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::Int32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::UInt32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::Int64 => i64::from_le_bytes(b[..8].try_into().unwrap()) as f64,
            Scalar::UInt64 => u64::from_le_bytes(b[..8].try_into().unwrap()) as f64,
            Scalar::Float32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::Float64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    Binary,
    Appended,
}

#[derive(Debug)]
struct ArrayHeader {
    name: String,
    scalar: Scalar,
    components: usize,
    format: Format,
    offset: usize,
    text: String,
}

#[derive(Debug)]
struct Document {
    header_size: usize,
    extent: [i64; 6],
    arrays: Vec<ArrayHeader>,
    appended_base64: bool,
}

fn xml_err(e: impl std::fmt::Display) -> ProbeError {
    ProbeError::Xml(e.to_string())
}

fn attr(e: &BytesStart, key: &str) -> Result<Option<String>, ProbeError> {
    for a in e.attributes() {
        let a = a.map_err(xml_err)?;
        if a.key.as_ref() == key.as_bytes() {
            return Ok(Some(a.unescape_value().map_err(xml_err)?.into_owned()));
        }
    }
    Ok(None)
}

/// Splits off the `<AppendedData>` payload, which may be arbitrary bytes,
/// so the remainder can go through the XML parser.
fn split_appended(bytes: &[u8]) -> Result<(Vec<u8>, Option<&[u8]>), ProbeError> {
    let Some(tag) = find(bytes, b"<AppendedData") else {
        return Ok((bytes.to_vec(), None));
    };
    let gt = find(&bytes[tag..], b">")
        .map(|i| tag + i)
        .ok_or_else(|| ProbeError::Xml("unterminated <AppendedData> tag".into()))?;
    let underscore = bytes[gt + 1..]
        .iter()
        .position(|&b| b == b'_')
        .map(|i| gt + 1 + i)
        .ok_or_else(|| ProbeError::Xml("<AppendedData> without `_` marker".into()))?;
    let close = rfind(bytes, b"</AppendedData>")
        .filter(|&c| c > underscore)
        .ok_or_else(|| ProbeError::Xml("missing </AppendedData>".into()))?;
    let mut xml = bytes[..gt + 1].to_vec();
    xml.extend_from_slice(&bytes[close..]);
    Ok((xml, Some(&bytes[underscore + 1..close])))
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

fn rfind(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).rposition(|w| w == needle)
}

fn parse_document(xml: &[u8]) -> Result<Document, ProbeError> {
    let mut reader = Reader::from_reader(xml);
    let mut buf = Vec::new();
    let mut doc = Document {
        header_size: 4,
        extent: [0; 6],
        arrays: Vec::new(),
        appended_base64: false,
    };
    let mut seen_root = false;
    let mut seen_image = false;
    let mut in_point_data = false;
    let mut current: Option<ArrayHeader> = None;
    loop {
        let event = reader.read_event_into(&mut buf).map_err(xml_err)?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                match e.name().as_ref() {
                    b"VTKFile" => {
                        seen_root = true;
                        if attr(e, "type")?.as_deref() != Some("ImageData") {
                            return Err(ProbeError::Unsupported(
                                "VTKFile type must be ImageData".into(),
                            ));
                        }
                        if let Some(order) = attr(e, "byte_order")? {
                            if order != "LittleEndian" {
                                return Err(ProbeError::Unsupported(format!("byte order {order}")));
                            }
                        }
                        if attr(e, "compressor")?.is_some_and(|c| !c.is_empty()) {
                            return Err(ProbeError::Unsupported("compressed VTI data".into()));
                        }
                        doc.header_size = match attr(e, "header_type")?.as_deref() {
                            None | Some("UInt32") => 4,
                            Some("UInt64") => 8,
                            Some(other) => {
                                return Err(ProbeError::Unsupported(format!("header type {other}")))
                            }
                        };
                    }
                    b"ImageData" => {
                        seen_image = true;
                        let text = attr(e, "WholeExtent")?.ok_or_else(|| {
                            ProbeError::Invalid("ImageData without WholeExtent".into())
                        })?;
                        doc.extent = parse_extent(&text)?;
                    }
                    b"PointData" => in_point_data = !is_empty,
                    b"DataArray" if in_point_data => {
                        let header = array_header(e)?;
                        if is_empty {
                            doc.arrays.push(header);
                        } else {
                            current = Some(header);
                        }
                    }
                    b"AppendedData" => {
                        let enc = attr(e, "encoding")?.unwrap_or_else(|| "raw".into());
                        doc.appended_base64 = match enc.as_str() {
                            "raw" => false,
                            "base64" => true,
                            other => {
                                return Err(ProbeError::Unsupported(format!(
                                    "appended encoding {other}"
                                )))
                            }
                        };
                    }
                    _ => {}
                }
            }
            Event::Text(t) => {
                if let Some(cur) = current.as_mut() {
                    cur.text.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"DataArray" => {
                    if let Some(cur) = current.take() {
                        doc.arrays.push(cur);
                    }
                }
                b"PointData" => in_point_data = false,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !seen_root {
        return Err(ProbeError::Invalid("not a VTKFile document".into()));
    }
    if !seen_image {
        return Err(ProbeError::Invalid("missing ImageData element".into()));
    }
    Ok(doc)
}

fn parse_extent(text: &str) -> Result<[i64; 6], ProbeError> {
    let parts: Vec<i64> = text
        .split_whitespace()
        .map(|p| p.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| ProbeError::Invalid(format!("bad WholeExtent `{text}`")))?;
    let extent: [i64; 6] = parts
        .try_into()
        .map_err(|_| ProbeError::Invalid(format!("WholeExtent needs 6 integers, got `{text}`")))?;
    for axis in 0..3 {
        if extent[2 * axis + 1] < extent[2 * axis] {
            return Err(ProbeError::Invalid(format!(
                "WholeExtent `{text}` has hi < lo"
            )));
        }
    }
    Ok(extent)
}

fn array_header(e: &BytesStart) -> Result<ArrayHeader, ProbeError> {
    let name =
        attr(e, "Name")?.ok_or_else(|| ProbeError::Invalid("DataArray without Name".into()))?;
    let ty = attr(e, "type")?.unwrap_or_default();
    let scalar = Scalar::from_name(&ty)
        .ok_or_else(|| ProbeError::Unsupported(format!("scalar type `{ty}` of array {name}")))?;
    let components = match attr(e, "NumberOfComponents")? {
        Some(n) => n
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| ProbeError::Invalid(format!("bad NumberOfComponents for {name}")))?,
        None => 1,
    };
    let format = match attr(e, "format")?.as_deref() {
        Some("ascii") => Format::Ascii,
        Some("binary") => Format::Binary,
        Some("appended") => Format::Appended,
        other => {
            return Err(ProbeError::Unsupported(format!(
                "array format {:?} of {name}",
                other.unwrap_or("<missing>")
            )))
        }
    };
    let offset = match attr(e, "offset")? {
        Some(o) => o
            .trim()
            .parse()
            .map_err(|_| ProbeError::Invalid(format!("bad offset for {name}")))?,
        None => 0,
    };
    Ok(ArrayHeader {
        name,
        scalar,
        components,
        format,
        offset,
        text: String::new(),
    })
}

fn read_header_len(bytes: &[u8], header_size: usize) -> Result<usize, ProbeError> {
    if bytes.len() < header_size {
        return Err(ProbeError::Invalid("truncated block header".into()));
    }
    Ok(if header_size == 8 {
        u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize
    } else {
        u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize
    })
}

/// Decodes a base64 block that starts with a byte-count header. The
/// header may be encoded together with the data or as its own base64
/// chunk; a padded first chunk means the latter.
fn decode_base64_block(text: &str, header_size: usize) -> Result<Vec<u8>, ProbeError> {
    let engine = base64::engine::general_purpose::STANDARD;
    let clean: String = text.chars().filter(|c| !c.is_ascii_whitespace()).collect();
    let head_chars = header_size.div_ceil(3) * 4;
    let bad = |e: base64::DecodeError| ProbeError::Invalid(format!("bad base64 data: {e}"));
    if clean.len() < head_chars {
        return Err(ProbeError::Invalid("truncated base64 block".into()));
    }
    let (data, len) = if clean[..head_chars].contains('=') {
        let head = engine.decode(&clean[..head_chars]).map_err(bad)?;
        let len = read_header_len(&head, header_size)?;
        (engine.decode(&clean[head_chars..]).map_err(bad)?, len)
    } else {
        let all = engine.decode(&clean).map_err(bad)?;
        let len = read_header_len(&all, header_size)?;
        (all[header_size..].to_vec(), len)
    };
    if data.len() < len {
        return Err(ProbeError::Invalid(
            "base64 block shorter than its header".into(),
        ));
    }
    Ok(data[..len].to_vec())
}

fn raw_bytes(
    doc: &Document,
    array: &ArrayHeader,
    appended: Option<&[u8]>,
) -> Result<Vec<u8>, ProbeError> {
    match array.format {
        Format::Ascii => unreachable!("ascii arrays are parsed as text"),
        Format::Binary => decode_base64_block(&array.text, doc.header_size),
        Format::Appended => {
            let data = appended.ok_or_else(|| {
                ProbeError::Invalid(format!(
                    "array {} is appended but there is no AppendedData",
                    array.name
                ))
            })?;
            if doc.appended_base64 {
                let text = std::str::from_utf8(data)
                    .map_err(|_| ProbeError::Invalid("appended base64 data is not text".into()))?
                    .trim_end();
                // Each array is its own block; it ends where the next begins.
                let end = doc
                    .arrays
                    .iter()
                    .filter(|a| a.format == Format::Appended && a.offset > array.offset)
                    .map(|a| a.offset)
                    .min()
                    .unwrap_or(text.len());
                let block = text.get(array.offset..end.min(text.len())).ok_or_else(|| {
                    ProbeError::Invalid(format!("offset of {} out of bounds", array.name))
                })?;
                decode_base64_block(block, doc.header_size)
            } else {
                let start = array.offset;
                let len = read_header_len(data.get(start..).unwrap_or_default(), doc.header_size)?;
                let body = start + doc.header_size;
                data.get(body..body + len)
                    .map(<[u8]>::to_vec)
                    .ok_or_else(|| {
                        ProbeError::Invalid(format!(
                            "appended block of {} is truncated",
                            array.name
                        ))
                    })
            }
        }
    }
}

/// Calls `f` with every value of the array, in file order.
fn for_each_value(
    doc: &Document,
    array: &ArrayHeader,
    appended: Option<&[u8]>,
    mut f: impl FnMut(f64),
) -> Result<usize, ProbeError> {
    if array.format == Format::Ascii {
        let mut n = 0;
        for tok in array.text.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                ProbeError::Invalid(format!("bad ascii value `{tok}` in {}", array.name))
            })?;
            f(v);
            n += 1;
        }
        return Ok(n);
    }
    let bytes = raw_bytes(doc, array, appended)?;
    let size = array.scalar.size();
    if bytes.len() % size != 0 {
        return Err(ProbeError::Invalid(format!(
            "array {} has {} bytes, not a multiple of {}",
            array.name,
            bytes.len(),
            size
        )));
    }
    for chunk in bytes.chunks_exact(size) {
        f(array.scalar.read(chunk));
    }
    Ok(bytes.len() / size)
}

pub fn probe_vti(bytes: &[u8]) -> Result<DatasetMeta, ProbeError> {
    check_size(bytes)?;
    let (xml, appended) = split_appended(bytes)?;
    let doc = parse_document(&xml)?;
    let e = doc.extent;
    let dims = [
        (e[1] - e[0] + 1) as usize,
        (e[3] - e[2] + 1) as usize,
        (e[5] - e[4] + 1) as usize,
    ];
    let points = dims[0] * dims[1] * dims[2];
    let mut meta = DatasetMeta::new(DataKind::ImageData);
    meta.dimensions = Some(dims);
    for array in &doc.arrays {
        if meta.variables.iter().any(|v| v.name == array.name) {
            return Err(ProbeError::Invalid(format!(
                "duplicate array name {}",
                array.name
            )));
        }
        let mut acc = Accum::default();
        let count = if array.components == 1 {
            for_each_value(&doc, array, appended, |v| acc.push(v))?
        } else {
            // Vector arrays report the range of their magnitude.
            let mut sum = 0.0;
            let mut k = 0;
            for_each_value(&doc, array, appended, |v| {
                sum += v * v;
                k += 1;
                if k == array.components {
                    acc.push(sum.sqrt());
                    sum = 0.0;
                    k = 0;
                }
            })?
        };
        if count != points * array.components {
            return Err(ProbeError::Invalid(format!(
                "array {} has {} values, expected {} ({} points x {} components)",
                array.name,
                count,
                points * array.components,
                points,
                array.components
            )));
        }
        let mut var = VariableDesc::new(&array.name, DataType::Number);
        var.range = acc.range();
        var.stats = acc.stats();
        var.components = Some(array.components);
        meta.variables.push(var);
    }
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::vti_writer::{write_vti, VtiArray, VtiEncoding};

    fn doc(arrays_xml: &str) -> String {
        format!(
            r#"<?xml version="1.0"?>
<VTKFile type="ImageData" version="1.0" byte_order="LittleEndian" header_type="UInt32">
  <ImageData WholeExtent="0 1 0 0 0 0" Origin="0 0 0" Spacing="1 1 1">
    <Piece Extent="0 1 0 0 0 0">
      <PointData>{arrays_xml}</PointData>
    </Piece>
  </ImageData>
</VTKFile>"#
        )
    }

    #[test]
    fn ascii_arrays() {
        let xml = doc(
            r#"<DataArray type="Float32" Name="t" format="ascii">1.5 -2</DataArray>
            <DataArray type="Float64" Name="v" NumberOfComponents="3" format="ascii">3 4 0 0 0 1</DataArray>"#,
        );
        let meta = probe_vti(xml.as_bytes()).unwrap();
        assert_eq!(meta.dimensions, Some([2, 1, 1]));
        assert_eq!(meta.variables[0].range, Some([-2.0, 1.5]));
        assert_eq!(meta.variables[1].range, Some([1.0, 5.0]));
        assert_eq!(meta.variables[1].components, Some(3));
    }

    #[test]
    fn every_encoding_gives_the_same_meta() {
        let values: Vec<f64> = (0..24).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let arrays = vec![
            VtiArray::new("a", Scalar::Float64, 1, values.clone()),
            VtiArray::new(
                "b",
                Scalar::Int16,
                1,
                values.iter().map(|v| v.round()).collect(),
            ),
        ];
        let extent = [0, 3, 0, 2, 0, 1];
        let reference = probe_vti(&write_vti(extent, &arrays, VtiEncoding::Ascii)).unwrap();
        for enc in [
            VtiEncoding::Base64,
            VtiEncoding::AppendedRaw,
            VtiEncoding::AppendedBase64,
        ] {
            for header64 in [false, true] {
                let bytes =
                    crate::probe::vti_writer::write_vti_with(extent, &arrays, enc, header64);
                assert_eq!(
                    probe_vti(&bytes).unwrap(),
                    reference,
                    "{enc:?} header64={header64}"
                );
            }
        }
        assert_eq!(reference.dimensions, Some([4, 3, 2]));
    }

    #[test]
    fn separately_encoded_header_is_accepted() {
        let engine = base64::engine::general_purpose::STANDARD;
        let data: Vec<u8> = [7.0f32, 9.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        let text = format!(
            "{}{}",
            engine.encode((data.len() as u32).to_le_bytes()),
            engine.encode(&data)
        );
        let xml = doc(&format!(
            r#"<DataArray type="Float32" Name="s" format="binary">{text}</DataArray>"#
        ));
        assert_eq!(
            probe_vti(xml.as_bytes()).unwrap().variables[0].range,
            Some([7.0, 9.0])
        );
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let compressed = doc("").replace(
            "header_type",
            "compressor=\"vtkZLibDataCompressor\" header_type",
        );
        assert!(matches!(
            probe_vti(compressed.as_bytes()),
            Err(ProbeError::Unsupported(_))
        ));
        let big = doc("").replace("LittleEndian", "BigEndian");
        assert!(matches!(
            probe_vti(big.as_bytes()),
            Err(ProbeError::Unsupported(_))
        ));
        let inverted = doc("").replace("WholeExtent=\"0 1", "WholeExtent=\"1 0");
        assert!(matches!(
            probe_vti(inverted.as_bytes()),
            Err(ProbeError::Invalid(_))
        ));
        assert!(probe_vti(b"<VTKFile type=\"ImageData\"><ImageData").is_err());
        let short = doc(r#"<DataArray type="Float32" Name="t" format="ascii">1</DataArray>"#);
        assert!(matches!(
            probe_vti(short.as_bytes()),
            Err(ProbeError::Invalid(_))
        ));
    }

    #[test]
    fn single_voxel_constant() {
        let arrays = vec![VtiArray::new("c", Scalar::UInt8, 1, vec![5.0])];
        let meta = probe_vti(&write_vti(
            [0, 0, 0, 0, 0, 0],
            &arrays,
            VtiEncoding::AppendedRaw,
        ))
        .unwrap();
        assert_eq!(meta.dimensions, Some([1, 1, 1]));
        assert_eq!(meta.variables[0].range, Some([5.0, 5.0]));
    }
}
