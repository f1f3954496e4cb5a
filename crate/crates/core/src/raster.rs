//! Row-major 2D grids.

use crate::error::{Error, Result};

/// `nx × ny` values stored row by row, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Raster<T> {
    pub fn filled(nx: usize, ny: usize, value: T) -> Self {
        Self {
            nx,
            ny,
            data: vec![value; nx * ny],
        }
    }
}

impl<T> Raster<T> {
    pub fn from_vec(nx: usize, ny: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != nx * ny {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {nx}x{ny} raster",
                data.len()
            )));
        }
        Ok(Self { nx, ny, data })
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            for col in 0..nx {
                data.push(f(col, row));
            }
        }
        Self { nx, ny, data }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, col: usize, row: usize) -> &T {
        &self.data[row * self.nx + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: T) {
        self.data[row * self.nx + col] = value;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl Raster<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}
