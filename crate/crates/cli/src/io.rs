//! Field files: a greppable text header followed by a CSV or raw
//! little-endian f64 payload.
//!
//! ```text
//! CROCCOFIELD v1
//! dim 2
//! extents 64 64
//! spacing 0.098174770424681035 0.098174770424681035
//! boundary periodic periodic
//! components 2
//! layout row-major component-fastest
//! encoding binary
//! end
//! <payload>
//! ```

use std::fs;
use std::path::Path;

use crocco_core::{Boundary, Field, Grid, Shape};
use thiserror::Error;

pub const MAGIC: &str = "CROCCOFIELD v1";
pub const LAYOUT: &str = "row-major component-fastest";

#[derive(Debug, Error)]
pub enum FieldFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] crocco_core::Error),
}

type Result<T> = std::result::Result<T, FieldFileError>;

fn bad(msg: impl Into<String>) -> FieldFileError {
    FieldFileError::Format(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Binary,
    Csv,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Binary => "binary",
            Encoding::Csv => "csv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(Encoding::Binary),
            "csv" => Some(Encoding::Csv),
            _ => None,
        }
    }
}

/// Fixed 17-significant-digit formatting, shared by every CSV writer.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// An untyped field: grid, component count and raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub grid: Grid,
    pub components: usize,
    pub values: Vec<f64>,
}

impl FieldFile {
    pub fn from_field<S: Shape>(f: &Field<S>) -> Self {
        FieldFile {
            grid: *f.grid(),
            components: f.components(),
            values: f.values().to_vec(),
        }
    }

    pub fn into_field<S: Shape>(self, shape: S) -> Result<Field<S>> {
        Ok(Field::from_vec(self.grid, shape, self.values)?)
    }

    fn header(&self, encoding: Encoding) -> String {
        let g = &self.grid;
        let join = |it: Vec<String>| it.join(" ");
        format!(
            "{MAGIC}\ndim {}\nextents {}\nspacing {}\nboundary {}\ncomponents {}\nlayout {LAYOUT}\nencoding {}\nend\n",
            g.dim(),
            join(g.extents().iter().map(|e| e.to_string()).collect()),
            join(g.spacing().iter().map(|&h| fmt_f64(h)).collect()),
            join(g.boundary().iter().map(|b| b.as_str().to_string()).collect()),
            self.components,
            encoding.as_str()
        )
    }

    pub fn to_bytes(&self, encoding: Encoding) -> Vec<u8> {
        let mut out = self.header(encoding).into_bytes();
        match encoding {
            Encoding::Binary => {
                for v in &self.values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Encoding::Csv => {
                for cell in self.values.chunks(self.components.max(1)) {
                    let line: Vec<String> = cell.iter().map(|&v| fmt_f64(v)).collect();
                    out.extend_from_slice(line.join(",").as_bytes());
                    out.push(b'\n');
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut next_line = || -> Result<&str> {
            let rest = &bytes[pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| bad("truncated header"))?;
            pos += end + 1;
            std::str::from_utf8(&rest[..end]).map_err(|_| bad("header is not UTF-8"))
        };
        if next_line()? != MAGIC {
            return Err(bad(format!("missing magic line {MAGIC:?}")));
        }
        let mut dim = None;
        let mut extents = None;
        let mut spacing = None;
        let mut boundary = None;
        let mut components = None;
        let mut encoding = None;
        loop {
            let line = next_line()?;
            if line == "end" {
                break;
            }
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| bad(format!("header line {line:?}")))?;
            let words = || value.split_whitespace();
            match key {
                "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad("dim"))?),
                "extents" => {
                    extents = Some(
                        words()
                            .map(|w| w.parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad("extents"))?,
                    )
                }
                "spacing" => {
                    spacing = Some(
                        words()
                            .map(|w| w.parse::<f64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad("spacing"))?,
                    )
                }
                "boundary" => {
                    boundary = Some(
                        words()
                            .map(|w| {
                                Boundary::parse(w).ok_or_else(|| bad(format!("boundary {w:?}")))
                            })
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "components" => {
                    components = Some(value.parse::<usize>().map_err(|_| bad("components"))?)
                }
                "layout" if value == LAYOUT => {}
                "layout" => return Err(bad(format!("unsupported layout {value:?}"))),
                "encoding" => {
                    encoding = Some(
                        Encoding::parse(value).ok_or_else(|| bad(format!("encoding {value:?}")))?,
                    )
                }
                _ => return Err(bad(format!("unknown header key {key:?}"))),
            }
        }
        let need = |what: &str| bad(format!("header lacks {what}"));
        let dim = dim.ok_or_else(|| need("dim"))?;
        let extents = extents.ok_or_else(|| need("extents"))?;
        let spacing = spacing.ok_or_else(|| need("spacing"))?;
        let boundary = boundary.ok_or_else(|| need("boundary"))?;
        let components = components.ok_or_else(|| need("components"))?;
        let encoding = encoding.ok_or_else(|| need("encoding"))?;
        if extents.len() != dim {
            return Err(bad("extents do not match dim"));
        }
        let grid = Grid::new(&extents, &spacing, &boundary)?;
        let expected = grid.cell_count() * components;
        let payload = &bytes[pos..];
        let values = match encoding {
            Encoding::Binary => {
                if payload.len() != expected * 8 {
                    return Err(bad(format!(
                        "binary payload has {} bytes, expected {}",
                        payload.len(),
                        expected * 8
                    )));
                }
                payload
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                    .collect()
            }
            Encoding::Csv => {
                let text =
                    std::str::from_utf8(payload).map_err(|_| bad("CSV payload is not UTF-8"))?;
                let lines: Vec<&str> = text.lines().collect();
                if lines.len() != grid.cell_count() {
                    return Err(bad(format!(
                        "CSV payload has {} lines, expected {}",
                        lines.len(),
                        grid.cell_count()
                    )));
                }
                let mut values = Vec::with_capacity(expected);
                for line in lines {
                    let before = values.len();
                    for w in line.split(',') {
                        values.push(
                            w.trim()
                                .parse::<f64>()
                                .map_err(|_| bad(format!("value {w:?}")))?,
                        );
                    }
                    if values.len() - before != components {
                        return Err(bad("CSV line with wrong component count"));
                    }
                }
                values
            }
        };
        Ok(FieldFile {
            grid,
            components,
            values,
        })
    }

    pub fn write(&self, path: &Path, encoding: Encoding) -> Result<()> {
        fs::write(path, self.to_bytes(encoding)).map_err(|source| FieldFileError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| FieldFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}
