//! JSON file formats: states, fiducials, reports.
//!
//! Complex numbers are `[re, im]` pairs. Floats are written in the shortest
//! representation that parses back to the same bits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::designs::Fiducial;
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Ket, Operator, C64};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiducialFile {
    pub d: usize,
    pub amplitudes: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_potential: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_overlap_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn complex(p: [f64; 2], what: &str) -> Result<C64> {
    if !p[0].is_finite() || !p[1].is_finite() {
        return Err(Error::Parse(format!("non-finite number in {what}")));
    }
    Ok(C64::new(p[0], p[1]))
}

pub fn operator_to_grid(op: &Operator) -> Vec<Vec<[f64; 2]>> {
    let n = op.dim();
    (0..n)
        .map(|r| (0..n).map(|c| [op[(r, c)].re, op[(r, c)].im]).collect())
        .collect()
}

pub fn grid_to_operator(dims: &[usize], grid: &[Vec<[f64; 2]>]) -> Result<Operator> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Parse(format!("invalid dims {dims:?}")));
    }
    let n: usize = dims.iter().product();
    if grid.len() != n || grid.iter().any(|row| row.len() != n) {
        return Err(Error::Parse(format!(
            "matrix must be {n}×{n} for dims {dims:?}"
        )));
    }
    let data = grid
        .iter()
        .flatten()
        .map(|&p| complex(p, "matrix"))
        .collect::<Result<Vec<_>>>()?;
    Operator::new(dims.to_vec(), data)
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        StateFile {
            dims: rho.dims().to_vec(),
            matrix: operator_to_grid(rho.op()),
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(grid_to_operator(&self.dims, &self.matrix)?)
    }
}

impl FiducialFile {
    pub fn from_fiducial(f: &Fiducial) -> Self {
        FiducialFile {
            d: f.d,
            amplitudes: f.alphas().iter().map(|a| [a.re, a.im]).collect(),
            frame_potential: None,
            max_overlap_deviation: None,
            seed: None,
        }
    }

    pub fn to_fiducial(&self) -> Result<Fiducial> {
        if self.amplitudes.len() != self.d {
            return Err(Error::Parse(format!(
                "fiducial declares d = {} but has {} amplitudes",
                self.d,
                self.amplitudes.len()
            )));
        }
        let amps = self
            .amplitudes
            .iter()
            .map(|&p| complex(p, "amplitudes"))
            .collect::<Result<Vec<_>>>()?;
        Fiducial::new(Ket::new(amps))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    from_json(&text)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    from_json::<StateFile>(text)?.to_state()
}

pub fn parse_state_file(path: &Path) -> Result<DensityMatrix> {
    read_json::<StateFile>(path)?.to_state()
}

pub fn write_state_file(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_json(path, &StateFile::from_state(rho))
}

pub fn parse_fiducial_file(path: &Path) -> Result<Fiducial> {
    read_json::<FiducialFile>(path)?.to_fiducial()
}
