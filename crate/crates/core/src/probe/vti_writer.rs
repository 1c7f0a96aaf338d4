//! Minimal `.vti` writer, used to build synthetic volumes for tests,
//! benchmarks and examples.

use super::vti::Scalar;
use base64::Engine;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct VtiArray {
    pub name: String,
    pub scalar: Scalar,
    pub components: usize,
    pub values: Vec<f64>,
}

impl VtiArray {
    pub fn new(
        name: impl Into<String>,
        scalar: Scalar,
        components: usize,
        values: Vec<f64>,
    ) -> Self {
        VtiArray {
            name: name.into(),
            scalar,
            components,
            values,
        }
    }

    fn le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * self.scalar.size());
        for &v in &self.values {
            match self.scalar {
                Scalar::Int8 => out.push(v as i8 as u8),
                Scalar::UInt8 => out.push(v as u8),
                Scalar::Int16 => out.extend((v as i16).to_le_bytes()),
                Scalar::UInt16 => out.extend((v as u16).to_le_bytes()),
                Scalar::Int32 => out.extend((v as i32).to_le_bytes()),
                Scalar::UInt32 => out.extend((v as u32).to_le_bytes()),
                Scalar::Int64 => out.extend((v as i64).to_le_bytes()),
                Scalar::UInt64 => out.extend((v as u64).to_le_bytes()),
                Scalar::Float32 => out.extend((v as f32).to_le_bytes()),
                Scalar::Float64 => out.extend(v.to_le_bytes()),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VtiEncoding {
    Ascii,
    /// Inline base64, header and data encoded together.
    Base64,
    AppendedRaw,
    AppendedBase64,
}

/// Writes a document with a UInt32 block header.
pub fn write_vti(extent: [i64; 6], arrays: &[VtiArray], encoding: VtiEncoding) -> Vec<u8> {
    write_vti_with(extent, arrays, encoding, false)
}

pub fn write_vti_with(
    extent: [i64; 6],
    arrays: &[VtiArray],
    encoding: VtiEncoding,
    header64: bool,
) -> Vec<u8> {
    let engine = base64::engine::general_purpose::STANDARD;
    let ext = extent.map(|e| e.to_string()).join(" ");
    let header_type = if header64 { "UInt64" } else { "UInt32" };
    let block = |data: &[u8]| -> Vec<u8> {
        let mut out = if header64 {
            (data.len() as u64).to_le_bytes().to_vec()
        } else {
            (data.len() as u32).to_le_bytes().to_vec()
        };
        out.extend_from_slice(data);
        out
    };

    let mut xml = String::new();
    let _ = writeln!(xml, "<?xml version=\"1.0\"?>");
    let _ = writeln!(
        xml,
        "<VTKFile type=\"ImageData\" version=\"1.0\" byte_order=\"LittleEndian\" header_type=\"{header_type}\">"
    );
    let _ = writeln!(
        xml,
        "  <ImageData WholeExtent=\"{ext}\" Origin=\"0 0 0\" Spacing=\"1 1 1\">"
    );
    let _ = writeln!(xml, "    <Piece Extent=\"{ext}\">");
    let _ = writeln!(xml, "      <PointData>");
    let mut appended: Vec<u8> = Vec::new();
    for array in arrays {
        let open = format!(
            "        <DataArray type=\"{}\" Name=\"{}\" NumberOfComponents=\"{}\"",
            array.scalar.name(),
            array.name,
            array.components
        );
        match encoding {
            VtiEncoding::Ascii => {
                let text = array
                    .values
                    .iter()
                    .map(|v| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                let _ = writeln!(xml, "{open} format=\"ascii\">{text}</DataArray>");
            }
            VtiEncoding::Base64 => {
                let text = engine.encode(block(&array.le_bytes()));
                let _ = writeln!(xml, "{open} format=\"binary\">{text}</DataArray>");
            }
            VtiEncoding::AppendedRaw => {
                let _ = writeln!(
                    xml,
                    "{open} format=\"appended\" offset=\"{}\"/>",
                    appended.len()
                );
                appended.extend(block(&array.le_bytes()));
            }
            VtiEncoding::AppendedBase64 => {
                let _ = writeln!(
                    xml,
                    "{open} format=\"appended\" offset=\"{}\"/>",
                    appended.len()
                );
                appended.extend(engine.encode(block(&array.le_bytes())).into_bytes());
            }
        }
    }
    let _ = writeln!(xml, "      </PointData>");
    let _ = writeln!(xml, "    </Piece>");
    let _ = writeln!(xml, "  </ImageData>");
    let mut out = xml.into_bytes();
    match encoding {
        VtiEncoding::AppendedRaw | VtiEncoding::AppendedBase64 => {
            let enc = if encoding == VtiEncoding::AppendedRaw {
                "raw"
            } else {
                "base64"
            };
            out.extend(format!("  <AppendedData encoding=\"{enc}\">\n   _").into_bytes());
            out.extend(appended);
            out.extend(b"\n  </AppendedData>\n");
        }
        _ => {}
    }
    out.extend(b"</VTKFile>\n");
    out
}
