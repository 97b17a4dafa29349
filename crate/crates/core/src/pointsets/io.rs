//! Point set files: JSON `{manifold, nodes, weights, provenance}` and CSV
//! (coordinates then weight, one row per node). Floats are written with 17
//! significant digits so a round trip is lossless.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{invalid, Error, Result};
use crate::manifold::{ManifoldKind, ManifoldSpec};
use crate::pointsets::{PointSet, Provenance};
use crate::scalar::Real;

/// `serde_json` formatter printing every float as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct JsonNumberFormatter;

impl Formatter for JsonNumberFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// 17 significant digits, or `null` for non-finite values.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

#[derive(Serialize, Deserialize)]
struct ManifoldJson {
    kind: ManifoldKind,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    manifold: ManifoldJson,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    provenance: Provenance,
}

/// Serializes any value with the 17-digit float formatter, pretty printed
/// with two-space indentation and a trailing newline.
pub fn to_json_string<S: Serialize>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = PrettyNumbers::default();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).map_err(|e| Error::Internal(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}

/// Pretty printer that keeps the 17-digit float format.
#[derive(Default)]
struct PrettyNumbers<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for PrettyNumbers<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        JsonNumberFormatter.write_f64(writer, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        JsonNumberFormatter.write_f32(writer, value)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

/// Writes a point set as JSON.
pub fn write_json<T: Real, W: Write>(ps: &PointSet<T>, mut out: W) -> Result<()> {
    let doc = PointSetJson {
        manifold: ManifoldJson { kind: ps.manifold.kind, dim: ps.manifold.dim },
        nodes: ps.nodes.iter().map(|p| p.coords(&ps.manifold).iter().map(|v| v.f64()).collect()).collect(),
        weights: ps.weights.iter().map(|w| w.f64()).collect(),
        provenance: ps.provenance.clone(),
    };
    let s = to_json_string(&doc)?;
    out.write_all(s.as_bytes()).map_err(io_err)
}

/// Reads and validates a point set from JSON.
pub fn read_json<T: Real, R: Read>(input: R) -> Result<PointSet<T>> {
    let doc: PointSetJson =
        serde_json::from_reader(input).map_err(|e| Error::InvalidInput(format!("point set JSON: {e}")))?;
    let m = ManifoldSpec::checked(doc.manifold.kind, doc.manifold.dim)?;
    let nodes = doc
        .nodes
        .iter()
        .map(|c| m.point(&c.iter().map(|v| T::lit(*v)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let weights = doc.weights.iter().map(|w| T::lit(*w)).collect();
    PointSet::new(m, nodes, weights, doc.provenance)
}

/// Writes the CSV table; `comments` become leading `# ` lines.
pub fn write_csv<T: Real, W: Write>(ps: &PointSet<T>, comments: &[String], mut out: W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}").map_err(io_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let dim = ps.manifold.ambient_dim();
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    w.write_record(&header).map_err(csv_err)?;
    for (p, wt) in ps.nodes.iter().zip(&ps.weights) {
        let mut row: Vec<String> = p.coords(&ps.manifold).iter().map(|v| format_f64(v.f64())).collect();
        row.push(format_f64(wt.f64()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a CSV table written by [`write_csv`].
pub fn read_csv<T: Real, R: Read>(m: &ManifoldSpec, input: R) -> Result<PointSet<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let dim = m.ambient_dim();
    let width = r.headers().map_err(csv_err)?.len();
    if width != dim + 1 {
        return invalid(format!("expected {} columns for {m}, found {width}", dim + 1));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map(T::lit))
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|e| Error::InvalidInput(format!("CSV number: {e}")))?;
        nodes.push(m.point(&vals[..dim])?);
        weights.push(vals[dim]);
    }
    PointSet::new(*m, nodes, weights, Provenance::new("csv"))
}

fn io_err(e: io::Error) -> Error {
    Error::Internal(format!("I/O: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("CSV: {e}"))
}
