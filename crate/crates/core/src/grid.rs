//! Uniform Cartesian mesh of the unit box and its flat node numbering.
//!
//! Node `(i, j)` sits at `(i h, j h)` and is stored at flat index
//! `n = (N + 1) i + j`, so `j` (the `y` index) runs fastest.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 4 cells per side, got {0}")]
    TooCoarse(usize),
    #[error("node ({i}, {j}) is outside a grid with N = {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("flat index {index} is outside a grid with {dim} nodes")]
    FlatOutOfRange { index: usize, dim: usize },
}

/// Uniform mesh of `[0, 1]^2` with `N` cells per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    cells: usize,
    h: f64,
}

impl Grid {
    pub fn new(cells: usize) -> Result<Self, GridError> {
        if cells < 4 {
            return Err(GridError::TooCoarse(cells));
        }
        Ok(Self {
            cells,
            h: 1.0 / cells as f64,
        })
    }

    /// Number of cells per side, `N`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of nodes per side, `N + 1`.
    pub fn side(&self) -> usize {
        self.cells + 1
    }

    /// Total number of unknowns, `(N + 1)^2`.
    pub fn dim(&self) -> usize {
        self.side() * self.side()
    }

    pub fn node_of(&self, i: usize, j: usize) -> Result<usize, GridError> {
        if i > self.cells || j > self.cells {
            return Err(GridError::IndexOutOfRange {
                i,
                j,
                n: self.cells,
            });
        }
        Ok(self.side() * i + j)
    }

    pub fn ij_of(&self, node: usize) -> Result<(usize, usize), GridError> {
        if node >= self.dim() {
            return Err(GridError::FlatOutOfRange {
                index: node,
                dim: self.dim(),
            });
        }
        let i = node / self.side();
        Ok((i, node - self.side() * i))
    }

    /// Coordinate of index `k` along either axis. Computed as `k / N`, which is
    /// the correctly rounded value of `k h`.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        k as f64 / self.cells as f64
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.coord(i), self.coord(j))
    }

    pub fn is_box_boundary(&self, node: usize) -> Result<bool, GridError> {
        let (i, j) = self.ij_of(node)?;
        Ok(self.on_box_boundary(i, j))
    }

    #[inline]
    pub fn on_box_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.cells || j == self.cells
    }

    /// Index of the grid line closest to coordinate `x`, if `x` lies on one
    /// within `tol`.
    pub fn line_index(&self, x: f64, tol: f64) -> Option<usize> {
        let k = (x * self.cells as f64).round();
        if k < 0.0 || k > self.cells as f64 {
            return None;
        }
        ((k / self.cells as f64 - x).abs() <= tol).then_some(k as usize)
    }

    /// Iterator over `(node, i, j)` in flat order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let side = self.side();
        (0..self.dim()).map(move |n| (n, n / side, n % side))
    }
}
