//! Structured rectangular grids.
//!
//! Cells are addressed by a multi-index `(i_x, i_y[, i_z])` and stored
//! row-major: the linear index is `(i_x * n_y + i_y) * n_z + i_z`, so the last
//! axis varies fastest. The coordinate of cell `i` along an axis is `i * h`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Minimum number of cells per axis; the widest one-sided stencil needs three
/// points and nested operators need one more.
pub const MIN_EXTENT: usize = 4;

/// Boundary treatment along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Wrap-around neighbours.
    Periodic,
    /// Second-order one-sided stencils at the two ends.
    OneSided,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::OneSided => "one-sided",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "periodic" => Some(Boundary::Periodic),
            "one-sided" => Some(Boundary::OneSided),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [usize; 3],
    spacing: [f64; 3],
    boundary: [Boundary; 3],
}

impl Grid {
    pub fn new(extents: &[usize], spacing: &[f64], boundary: &[Boundary]) -> Result<Self> {
        let dim = extents.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if spacing.len() != dim || boundary.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "extents, spacing and boundary must all have {dim} entries"
            )));
        }
        let mut g = Grid {
            dim,
            extents: [1; 3],
            spacing: [1.0; 3],
            boundary: [Boundary::Periodic; 3],
        };
        for a in 0..dim {
            if extents[a] < MIN_EXTENT {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} cells, need at least {MIN_EXTENT}",
                    extents[a]
                )));
            }
            if !(spacing[a].is_finite() && spacing[a] > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} spacing must be positive, got {}",
                    spacing[a]
                )));
            }
            g.extents[a] = extents[a];
            g.spacing[a] = spacing[a];
            g.boundary[a] = boundary[a];
        }
        Ok(g)
    }

    /// Periodic grid on `[0, 2π)^dim` with `n` cells per axis.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        let h = TAU / n as f64;
        Grid::new(&vec![n; dim], &vec![h; dim], &vec![Boundary::Periodic; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn boundary(&self) -> &[Boundary] {
        &self.boundary[..self.dim]
    }

    pub fn cell_count(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Largest spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing().iter().cloned().fold(0.0, f64::max)
    }

    /// Number of cells between consecutive samples along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.extents[axis + 1..].iter().product()
    }

    pub fn multi_index(&self, cell: usize) -> [usize; 3] {
        let k = cell % self.extents[2];
        let j = (cell / self.extents[2]) % self.extents[1];
        let i = cell / (self.extents[2] * self.extents[1]);
        [i, j, k]
    }

    pub fn linear_index(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.extents[1] + idx[1]) * self.extents[2] + idx[2]
    }

    /// Physical coordinates of a cell; unused axes are 0.
    pub fn coords(&self, cell: usize) -> [f64; 3] {
        let idx = self.multi_index(cell);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * self.spacing[a];
        }
        x
    }

    /// Physical length of the grid along `axis` (`n * h`).
    pub fn length(&self, axis: usize) -> f64 {
        self.extents[axis] as f64 * self.spacing[axis]
    }

    /// Same domain, twice the cells per axis.
    pub fn refined(&self) -> Grid {
        let mut g = *self;
        for a in 0..self.dim {
            g.extents[a] *= 2;
            g.spacing[a] *= 0.5;
        }
        g
    }

    /// `count` grids, starting at `self` and refining by halving.
    pub fn hierarchy(&self, count: usize) -> Vec<Grid> {
        let mut out = Vec::with_capacity(count);
        let mut g = *self;
        for _ in 0..count {
            out.push(g);
            g = g.refined();
        }
        out
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary().iter().all(|b| *b == Boundary::Periodic)
    }

    /// True when the cell lies at least `margin` (a length) away from every
    /// one-sided boundary.
    pub fn is_interior(&self, cell: usize, margin: f64) -> bool {
        let idx = self.multi_index(cell);
        (0..self.dim).all(|a| {
            if self.boundary[a] == Boundary::Periodic {
                return true;
            }
            let x = idx[a] as f64 * self.spacing[a];
            let last = (self.extents[a] - 1) as f64 * self.spacing[a];
            x >= margin - 1e-12 && last - x >= margin - 1e-12
        })
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_extents_and_bad_spacing() {
        assert!(Grid::new(&[3, 8], &[1.0, 1.0], &[Boundary::Periodic; 2]).is_err());
        assert!(Grid::new(&[8, 8], &[0.0, 1.0], &[Boundary::Periodic; 2]).is_err());
        assert!(Grid::new(&[8], &[1.0], &[Boundary::Periodic]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(&[4, 5, 6], &[1.0; 3], &[Boundary::OneSided; 3]).unwrap();
        for cell in 0..g.cell_count() {
            assert_eq!(g.linear_index(g.multi_index(cell)), cell);
        }
        assert_eq!(g.stride(0), 30);
        assert_eq!(g.stride(1), 6);
        assert_eq!(g.stride(2), 1);
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = Grid::periodic(2, 8).unwrap();
        let levels = g.hierarchy(3);
        assert_eq!(levels[2].extents(), &[32, 32]);
        assert!((levels[2].spacing()[0] * 4.0 - g.spacing()[0]).abs() < 1e-15);
    }
}
