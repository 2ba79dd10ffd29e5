//! Orbital reduced density matrices on disk, and scan tables out.
//!
//! The RDM text format is line based:
//!
//! ```text
//! orbrdm 1
//! kind two
//! basis omega,up,down,updown
//! signs jw-lsb
//! 5 5 0.5 0
//! 5 10 -0.5 0
//! 10 10 0.5 0
//! ```
//!
//! `kind one` is a single orbital (4×4), `kind two` a pair of orbitals (16×16) with
//! index `4·i + j` for local states `i`, `j`. Entries are `row col re im`, 0-based.
//! Giving the upper triangle is enough; the lower one is filled by conjugation.
//! Blank lines and lines starting with `#` are ignored.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::densmat::{CMat, DensityMatrix, TensorShape, C64};
use crate::error::{Error, Result};

pub const MAGIC: &str = "orbrdm";
pub const VERSION: u32 = 1;
pub const BASIS: &str = "omega,up,down,updown";
pub const SIGNS: &str = "jw-lsb";
/// Largest `|ρ_ij − conj(ρ_ji)|` that is symmetrized away rather than rejected.
pub const ASYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdmKind {
    One,
    Two,
}

impl RdmKind {
    pub fn dim(self) -> usize {
        match self {
            RdmKind::One => 4,
            RdmKind::Two => 16,
        }
    }

    fn shape(self) -> TensorShape {
        match self {
            RdmKind::One => TensorShape::single(4),
            RdmKind::Two => TensorShape::bipartite(4, 4),
        }
    }

    fn name(self) -> &'static str {
        match self {
            RdmKind::One => "one",
            RdmKind::Two => "two",
        }
    }
}

pub fn parse_rdm(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    parse_rdm_str(&std::fs::read_to_string(path)?)
}

pub fn parse_rdm_str(text: &str) -> Result<DensityMatrix> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (n, l) = lines.next().ok_or(Error::Parse { line: 0, msg: format!("missing '{key}' line") })?;
        match l.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((n, v.trim().to_string())),
            _ => Err(Error::Parse { line: n, msg: format!("expected '{key} …', found {l:?}") }),
        }
    };
    let (n, version) = header(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(Error::Parse { line: n, msg: format!("unsupported version {version:?}") });
    }
    let (n, kind) = header("kind")?;
    let kind = match kind.as_str() {
        "one" => RdmKind::One,
        "two" => RdmKind::Two,
        other => return Err(Error::Parse { line: n, msg: format!("unknown kind {other:?}") }),
    };
    let (n, basis) = header("basis")?;
    if basis != BASIS {
        return Err(Error::Parse { line: n, msg: format!("unsupported basis order {basis:?}") });
    }
    let (n, signs) = header("signs")?;
    if signs != SIGNS {
        return Err(Error::Parse { line: n, msg: format!("unsupported sign convention {signs:?}") });
    }

    let d = kind.dim();
    let mut m = CMat::zeros(d, d);
    let mut given = vec![false; d * d];
    for (n, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::Parse { line: n, msg: format!("expected 'row col re im', found {l:?}") });
        }
        let idx = |s: &str| -> Result<usize> {
            let i: usize = s.parse().map_err(|_| Error::Parse { line: n, msg: format!("bad index {s:?}") })?;
            if i >= d {
                return Err(Error::Parse { line: n, msg: format!("index {i} outside a {d}x{d} matrix") });
            }
            Ok(i)
        };
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or(Error::Parse { line: n, msg: format!("bad number {s:?}") })
        };
        let (i, j) = (idx(f[0])?, idx(f[1])?);
        if given[i * d + j] {
            return Err(Error::Parse { line: n, msg: format!("entry ({i}, {j}) given twice") });
        }
        given[i * d + j] = true;
        m[(i, j)] = C64::new(num(f[2])?, num(f[3])?);
    }

    for i in 0..d {
        for j in i..d {
            match (given[i * d + j], given[j * d + i]) {
                (true, false) => m[(j, i)] = m[(i, j)].conj(),
                (false, true) => m[(i, j)] = m[(j, i)].conj(),
                _ => {}
            }
        }
    }
    let asym = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    if asym > ASYMMETRY_TOL {
        return Err(Error::NotHermitian(asym));
    }
    let m = (&m + m.adjoint()).scale(0.5);
    DensityMatrix::from_matrix(kind.shape(), m)
}

/// Writes the upper triangle of a 4- or 16-dimensional state, skipping zeros.
pub fn write_rdm(rho: &DensityMatrix, out: &mut impl Write) -> Result<()> {
    let kind = match rho.dim() {
        4 => RdmKind::One,
        16 => RdmKind::Two,
        d => return Err(Error::Shape(format!("no RDM kind of dimension {d}"))),
    };
    writeln!(out, "{MAGIC} {VERSION}\nkind {}\nbasis {BASIS}\nsigns {SIGNS}", kind.name())?;
    let m = rho.matrix();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let z = m[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                writeln!(out, "{i} {j} {:.16e} {:.16e}", z.re, z.im)?;
            }
        }
    }
    Ok(())
}

pub fn write_rdm_file(rho: &DensityMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_rdm(rho, &mut f)?;
    f.flush()?;
    Ok(())
}

/// One row of a scan: parameter columns, then measure columns, then a status.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub params: Vec<(String, f64)>,
    pub measures: Vec<(String, f64)>,
    /// `"ok"` or the error that stopped this row.
    pub status: String,
}

impl ScanRecord {
    pub fn new(params: Vec<(String, f64)>) -> Self {
        ScanRecord { params, measures: Vec::new(), status: "ok".into() }
    }

    pub fn columns(&self) -> Vec<&str> {
        self.params.iter().chain(&self.measures).map(|(k, _)| k.as_str()).chain(std::iter::once("status")).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().chain(&self.measures).find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ScanFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ScanFormat::Csv),
            "json" => Ok(ScanFormat::Json),
            _ => Err(Error::Argument(format!("unknown output format {s:?}"))),
        }
    }
}

fn check_uniform(records: &[ScanRecord]) -> Result<()> {
    if let Some(first) = records.first() {
        let cols = first.columns();
        if let Some(r) = records.iter().find(|r| r.columns() != cols) {
            return Err(Error::Argument(format!("record columns {:?} differ from {cols:?}", r.columns())));
        }
    }
    Ok(())
}

/// CSV with a header row, or a JSON array of flat objects. CSV numbers use the
/// shortest round-trip form. An empty list gives a
/// CSV with only the `status` header and an empty JSON array.
pub fn write_scan(records: &[ScanRecord], format: ScanFormat, out: impl Write) -> Result<()> {
    check_uniform(records)?;
    match format {
        ScanFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let header = records.first().map(|r| r.columns()).unwrap_or_else(|| vec!["status"]);
            w.write_record(&header)?;
            for r in records {
                let mut row: Vec<String> = r.params.iter().chain(&r.measures).map(|(_, v)| format!("{v:?}")).collect();
                row.push(r.status.clone());
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        ScanFormat::Json => {
            let rows: Vec<Value> = records
                .iter()
                .map(|r| {
                    let mut obj = Map::new();
                    for (k, v) in r.params.iter().chain(&r.measures) {
                        // Non-finite values become null.
                        obj.insert(k.clone(), serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number));
                    }
                    obj.insert("status".into(), Value::String(r.status.clone()));
                    Value::Object(obj)
                })
                .collect();
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn write_scan_file(records: &[ScanRecord], format: ScanFormat, path: impl AsRef<Path>) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_scan(records, format, f)
}

/// Reads back a JSON scan; columns named in `params` become parameters, the rest measures.
pub fn read_scan_json(text: &str, params: &[&str]) -> Result<Vec<ScanRecord>> {
    let rows: Vec<Map<String, Value>> = serde_json::from_str(text)?;
    rows.into_iter()
        .map(|row| {
            let mut rec = ScanRecord::new(Vec::new());
            for (k, v) in row {
                if k == "status" {
                    rec.status = v.as_str().unwrap_or_default().to_string();
                    continue;
                }
                let x = match v {
                    Value::Null => f64::NAN,
                    v => v.as_f64().ok_or_else(|| Error::Argument(format!("column {k} is not a number")))?,
                };
                if params.contains(&k.as_str()) {
                    rec.params.push((k, x));
                } else {
                    rec.measures.push((k, x));
                }
            }
            Ok(rec)
        })
        .collect()
}
