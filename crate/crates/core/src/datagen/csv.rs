//! CSV ingestion and export: `u` numeric feature columns followed by an
//! integer `class` column (1-based), with a header row.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, StringRecordsIntoIter};

use crate::error::{Error, Result};
use crate::stream::Sample;

pub const CLASS_COLUMN: &str = "class";

/// Streaming CSV reader yielding one sample per row.
pub struct CsvSource<R: Read> {
    records: StringRecordsIntoIter<R>,
    dim: usize,
    max_class: Option<usize>,
}

/// Opens `path` for streaming; the header fixes the input dimension.
pub fn load_csv(path: impl AsRef<Path>) -> Result<CsvSource<BufReader<File>>> {
    let file = File::open(path)?;
    CsvSource::new(BufReader::new(file))
}

impl<R: Read> CsvSource<R> {
    pub fn new(reader: R) -> Result<Self> {
        let mut rdr = ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        let dim = header_dim(&header)?;
        Ok(CsvSource {
            records: rdr.into_records(),
            dim,
            max_class: None,
        })
    }

    /// Rejects labels above `n` as unknown classes.
    pub fn with_max_class(mut self, n: usize) -> Self {
        self.max_class = Some(n);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn parse(&self, rec: &StringRecord) -> Result<Sample> {
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != self.dim + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", self.dim + 1, rec.len()),
            ));
        }
        let mut x = Vec::with_capacity(self.dim);
        for (j, field) in rec.iter().take(self.dim).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: '{field}' is not a number", j + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {}: non-finite value", j + 1)));
            }
            x.push(v);
        }
        let raw = rec[self.dim].trim();
        let label: usize = raw
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| parse_err(line, format!("unknown class value '{raw}'")))?;
        if self.max_class.is_some_and(|m| label > m) {
            return Err(parse_err(line, format!("unknown class value '{raw}'")));
        }
        Ok(Sample::new(x, Some(label)))
    }
}

impl<R: Read> Iterator for CsvSource<R> {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Result<Sample>> {
        let rec = self.records.next()?;
        Some(match rec {
            Ok(rec) => self.parse(&rec),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                Err(parse_err(line, e.to_string()))
            }
        })
    }
}

fn parse_err(line: u64, msg: String) -> Error {
    Error::Parse { line, msg }
}

fn header_dim(header: &StringRecord) -> Result<usize> {
    match header.iter().next_back() {
        Some(last) if last.trim() == CLASS_COLUMN && header.len() >= 2 => Ok(header.len() - 1),
        _ => Err(parse_err(
            1,
            format!("header must list feature columns followed by '{CLASS_COLUMN}'"),
        )),
    }
}

/// Shape of a CSV file from one constant-memory pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvShape {
    pub dim: usize,
    pub n_classes: usize,
    pub rows: usize,
}

pub fn scan_csv(path: impl AsRef<Path>) -> Result<CsvShape> {
    let src = load_csv(path)?;
    let dim = src.dim();
    let (mut rows, mut n_classes) = (0, 0);
    for s in src {
        let s = s?;
        rows += 1;
        n_classes = n_classes.max(s.label.unwrap_or(0));
    }
    Ok(CsvShape { dim, n_classes, rows })
}

/// Writes labeled samples with a `x1..xu,class` header.
pub fn write_csv<W: Write, I>(writer: W, samples: I) -> Result<usize>
where
    I: IntoIterator<Item = Sample>,
{
    let mut w = csv::Writer::from_writer(writer);
    let mut n = 0;
    let mut dim = None;
    for s in samples {
        let u = *dim.get_or_insert_with(|| s.dim());
        if n == 0 {
            let mut header: Vec<String> = (1..=u).map(|j| format!("x{j}")).collect();
            header.push(CLASS_COLUMN.to_string());
            w.write_record(&header).map_err(csv_io)?;
        }
        if s.dim() != u {
            return Err(Error::DimensionMismatch {
                expected: u,
                got: s.dim(),
            });
        }
        let label = s
            .label
            .ok_or_else(|| Error::InsufficientData("cannot write an unlabeled sample".into()))?;
        let mut row: Vec<String> = s.x.iter().map(|v| v.to_string()).collect();
        row.push(label.to_string());
        w.write_record(&row).map_err(csv_io)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::sea::{gen_sea, SeaConfig};

    fn parse(text: &str) -> Result<Vec<Sample>> {
        CsvSource::new(text.as_bytes())?.collect()
    }

    #[test]
    fn small_file() {
        let s = parse("a,b,class\n0.5,1,1\n2,3.5,2\n-1,0,1\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[1].x.as_slice(), &[2.0, 3.5]);
        assert_eq!(s.iter().filter_map(|s| s.label).max(), Some(2));
    }

    #[test]
    fn missing_field_names_the_line() {
        let err = parse("a,b,class\n0.5,1,1\n2,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_values_error() {
        assert!(matches!(parse("a,class\nx,1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("a,class\n1,0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("a,class\n1,one\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("a,b\n1,1\n"), Err(Error::Parse { line: 1, .. })));
        let capped: Result<Vec<Sample>> = CsvSource::new("a,class\n1,3\n".as_bytes())
            .unwrap()
            .with_max_class(2)
            .collect();
        assert!(capped.is_err());
    }

    #[test]
    fn sea_round_trip_is_bit_identical() {
        let cfg = SeaConfig {
            n_total: 1000,
            seed: 5,
            ..SeaConfig::default()
        };
        let original: Vec<Sample> = gen_sea(&cfg).unwrap().collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sea.csv");
        write_csv(File::create(&path).unwrap(), original.clone()).unwrap();
        let back: Vec<Sample> = load_csv(&path).unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(back, original);
        let shape = scan_csv(&path).unwrap();
        assert_eq!(
            shape,
            CsvShape {
                dim: 3,
                n_classes: 2,
                rows: 1000
            }
        );
    }
}
