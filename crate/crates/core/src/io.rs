//! Matrix serialization.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ALSM"
//! 4       4     version (u32) = 1
//! 8       1     field tag (u8): 0 real, 1 complex
//! 9       8     rows (u64)
//! 17      8     cols (u64)
//! 25      ...   row-major f64 entries; complex entries as (re, im) pairs
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{AlsError, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{c64, Field, Scalar};

pub const MAGIC: &[u8; 4] = b"ALSM";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 25;

/// A matrix over either field, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Real(DenseMatrix<f64>),
    Complex(DenseMatrix<c64>),
}

impl AnyMatrix {
    pub fn field(&self) -> Field {
        match self {
            AnyMatrix::Real(_) => Field::Real,
            AnyMatrix::Complex(_) => Field::Complex,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Real(m) => m.shape(),
            AnyMatrix::Complex(m) => m.shape(),
        }
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        match self {
            AnyMatrix::Real(m) => write_matrix(m, w),
            AnyMatrix::Complex(m) => write_matrix(m, w),
        }
    }
}

impl From<DenseMatrix<f64>> for AnyMatrix {
    fn from(m: DenseMatrix<f64>) -> Self {
        AnyMatrix::Real(m)
    }
}

impl From<DenseMatrix<c64>> for AnyMatrix {
    fn from(m: DenseMatrix<c64>) -> Self {
        AnyMatrix::Complex(m)
    }
}

pub fn write_matrix<T: Scalar, W: Write>(m: &DenseMatrix<T>, mut w: W) -> Result<()> {
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    header.push(T::FIELD.tag());
    header.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    header.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(m.as_slice().len() * T::WORDS * 8);
    for &x in m.as_slice() {
        buf.extend_from_slice(&x.re().to_le_bytes());
        if T::WORDS == 2 {
            buf.extend_from_slice(&x.im().to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<AnyMatrix> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|_| AlsError::Format("truncated header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(AlsError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(AlsError::Format(format!("unsupported version {version}")));
    }
    let field = Field::from_tag(header[8]).ok_or_else(|| AlsError::Format(format!("bad field tag {}", header[8])))?;
    let rows = u64::from_le_bytes(header[9..17].try_into().unwrap());
    let cols = u64::from_le_bytes(header[17..25].try_into().unwrap());
    let words = match field {
        Field::Real => 1u64,
        Field::Complex => 2,
    };
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(words))
        .ok_or_else(|| AlsError::Format("dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() as u64 != count * 8 {
        return Err(AlsError::Format(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let (rows, cols) = (rows as usize, cols as usize);
    Ok(match field {
        Field::Real => AnyMatrix::Real(DenseMatrix::from_vec(rows, cols, vals)?),
        Field::Complex => {
            let data = vals.chunks_exact(2).map(|p| c64::new(p[0], p[1])).collect();
            AnyMatrix::Complex(DenseMatrix::from_vec(rows, cols, data)?)
        }
    })
}

/// Read a matrix and require a specific field.
pub fn read_matrix_as<T: Scalar, R: Read>(r: R) -> Result<DenseMatrix<T>> {
    let any = read_matrix(r)?;
    let found = any.field();
    let mismatch = || AlsError::Format(format!("expected {} matrix, found {found}", T::FIELD));
    // Rebuild through the generic constructor to move into `T`.
    match any {
        AnyMatrix::Real(m) if T::FIELD == Field::Real => {
            let (r, c) = m.shape();
            DenseMatrix::from_vec(r, c, m.into_vec().into_iter().map(T::from_real).collect())
        }
        AnyMatrix::Complex(m) if T::FIELD == Field::Complex => {
            let (r, c) = m.shape();
            DenseMatrix::from_vec(r, c, m.into_vec().into_iter().map(|z| T::from_parts(z.re, z.im)).collect())
        }
        _ => Err(mismatch()),
    }
}

pub fn save_matrix<T: Scalar>(m: &DenseMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_matrix(m, BufWriter::new(File::create(path)?))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<AnyMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

/// CSV text for debugging small matrices. Complex entries are written as
/// `re+imi`.
pub fn write_csv<T: Scalar, W: Write>(m: &DenseMatrix<T>, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.rows() {
        let record: Vec<String> = m
            .row(i)
            .iter()
            .map(|x| match T::FIELD {
                Field::Real => format!("{:e}", x.re()),
                Field::Complex => format!("{:e}{:+e}i", x.re(), x.im()),
            })
            .collect();
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}
