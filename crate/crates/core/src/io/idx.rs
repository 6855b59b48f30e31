//! Raw IDX files of unsigned bytes (the format of the classic handwritten
//! digit images) and a small PCA used to embed them.

use crate::error::{Error, Result};
use crate::linops::{dot, extreme_eigpair_from, EigOptions, SymMat, Which};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

impl IdxArray {
    /// First dimension as items, the rest flattened and scaled to `[0, 1]`.
    pub fn to_points(&self, limit: Option<usize>) -> Vec<Vec<f64>> {
        let items = self.dims.first().copied().unwrap_or(0);
        let width: usize = self.dims.iter().skip(1).product();
        let take = limit.map_or(items, |l| l.min(items));
        (0..take)
            .map(|i| {
                self.data[i * width..(i + 1) * width]
                    .iter()
                    .map(|&b| f64::from(b) / 255.0)
                    .collect()
            })
            .collect()
    }
}

/// Parses `[0, 0, 0x08, ndims]`, `ndims` big-endian `u32` sizes, then the
/// payload, which must have exactly the declared length.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxArray> {
    let perr = |msg: String| Error::Parse { line: 0, msg };
    if bytes.len() < 4 {
        return Err(perr("truncated magic number".into()));
    }
    if bytes[0] != 0 || bytes[1] != 0 {
        return Err(perr("magic number must start with two zero bytes".into()));
    }
    if bytes[2] != 0x08 {
        return Err(perr(format!("unsupported element type 0x{:02x}; only unsigned bytes", bytes[2])));
    }
    let ndims = bytes[3] as usize;
    if ndims == 0 {
        return Err(perr("zero dimensions".into()));
    }
    let header = 4 + 4 * ndims;
    if bytes.len() < header {
        return Err(perr("truncated dimension header".into()));
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    if dims.contains(&0) {
        return Err(perr("empty dimension".into()));
    }
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| perr("dimension product overflows".into()))?;
    let payload = &bytes[header..];
    if payload.len() != len {
        return Err(perr(format!("payload has {} bytes, header declares {len}", payload.len())));
    }
    Ok(IdxArray {
        dims,
        data: payload.to_vec(),
    })
}

pub fn write_idx(arr: &IdxArray) -> Vec<u8> {
    let mut out = vec![0, 0, 0x08, arr.dims.len() as u8];
    for &d in &arr.dims {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(&arr.data);
    out
}

pub fn read_idx(path: &std::path::Path) -> Result<IdxArray> {
    parse_idx(&std::fs::read(path)?)
}

/// Projects centered points onto their top `p` principal directions, found
/// one at a time by Lanczos with deflation.
pub fn pca(points: &[Vec<f64>], p: usize) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidParameter("pca needs at least one point".into()));
    }
    let width = points[0].len();
    if p == 0 || p > width {
        return Err(Error::InvalidParameter(format!("pca target dimension {p} not in 1..={width}")));
    }
    let mean: Vec<f64> = (0..width)
        .map(|j| points.iter().map(|x| x[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|x| x.iter().zip(&mean).map(|(a, m)| a - m).collect())
        .collect();
    let mut cov = vec![0.0; width * width];
    for x in &centered {
        for i in 0..width {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..width {
                cov[i * width + j] += x[i] * x[j];
            }
        }
    }
    cov.iter_mut().for_each(|v| *v /= n as f64);
    let mut c = SymMat::from_row_major(width, &cov)?;
    let mut dirs = Vec::with_capacity(p);
    for t in 0..p {
        let opts = EigOptions {
            seed: 0x9ca0 + t as u64,
            ..EigOptions::default()
        };
        let pair = extreme_eigpair_from(&c, Which::Largest, &opts, None)?;
        let v = pair.vector;
        let lam = pair.value;
        c = SymMat::from_fn(width, |i, j| c.get(i, j) - lam * v[i] * v[j]);
        dirs.push(v);
    }
    Ok(centered
        .iter()
        .map(|x| dirs.iter().map(|d| dot(x, d)).collect())
        .collect())
}
