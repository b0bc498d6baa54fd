//! Regular 1D grid carrying the field and fluid state.

/// Grid state over `m` equal cells spanning `[0, length)`.
///
/// `dx` is always `length / m`, so the cells tile the domain by
/// construction. `efield` holds the per-cell constant field retrieved by
/// particles during the push. `sources` is an `m x n_channels` row-major
/// matrix of per-channel collision rates (m^-3 s^-1); channel order is the
/// configured collision order, with recombination appended last when
/// enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    m: usize,
    dx: f64,
    length: f64,
    n_channels: usize,
    pub phi: Vec<f64>,
    pub efield: Vec<f64>,
    pub dens_e: Vec<f64>,
    pub dens_i: Vec<f64>,
    pub dens_m: Vec<f64>,
    pub dens_n: Vec<f64>,
    pub te: Vec<f64>,
    pub sources: Vec<f64>,
}

impl Grid {
    pub fn new(m: usize, length: f64, n_channels: usize) -> Self {
        assert!(m > 0 && length > 0.0);
        Self {
            m,
            dx: length / m as f64,
            length,
            n_channels,
            phi: vec![0.0; m],
            efield: vec![0.0; m],
            dens_e: vec![0.0; m],
            dens_i: vec![0.0; m],
            dens_m: vec![0.0; m],
            dens_n: vec![0.0; m],
            te: vec![0.0; m],
            sources: vec![0.0; m * n_channels],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    /// Cell index of position `x`.
    ///
    /// Callers guarantee `x` is inside `[0, length)` (boundary absorption
    /// runs before any deposit); the clamp only guards against the last
    /// representable positions rounding up.
    #[inline]
    pub fn cell_of(&self, x: f64) -> usize {
        ((x / self.dx) as usize).min(self.m - 1)
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    pub fn source(&self, j: usize, c: usize) -> f64 {
        self.sources[j * self.n_channels + c]
    }

    pub fn source_mut(&mut self, j: usize, c: usize) -> &mut f64 {
        &mut self.sources[j * self.n_channels + c]
    }

    /// All densities finite and non-negative.
    pub fn densities_valid(&self) -> bool {
        self.dens_e
            .iter()
            .chain(&self.dens_i)
            .chain(&self.dens_m)
            .chain(&self.dens_n)
            .all(|&n| n.is_finite() && n >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_lookup() {
        let g = Grid::new(10, 1.0, 0);
        assert_eq!(g.cell_of(0.0), 0);
        assert_eq!(g.cell_of(0.05), 0);
        assert_eq!(g.cell_of(0.15), 1);
        assert_eq!(g.cell_of(0.999999), 9);
    }

    #[test]
    fn cells_tile_the_domain() {
        let g = Grid::new(128, 0.025, 0);
        assert_eq!(g.dx() * g.m() as f64, 0.025);
    }
}
