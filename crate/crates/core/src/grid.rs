//! Uniform origin-centered grids, domain masks, and zero-extended fields.
//!
//! A [`GridSpec`] is a uniform Cartesian grid on an origin-centered box
//! with cell-center sampling. A [`DomainMask`] is a subset of cells (the
//! discrete realization of a bounded open set). A [`GridField`] stores one
//! value per cell of its mask and evaluates to exactly `0` outside it
//! (extension by zero). All reductions run in ascending flat-index order so
//! results are reproducible and independent of thread count.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};
use std::sync::Arc;

/// Volume of the N-dimensional unit ball, N ∈ {1, 2}.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Uniform grid on `[-half_extent, half_extent]^dim` with `cells_per_axis`
/// cells per axis and cell-center sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    cells_per_axis: usize,
    h: f64,
    half_extent: f64,
}

/// Builds a grid symmetric about the origin.
///
/// `h = 2 * half_extent / cells_per_axis`. With an odd cell count the
/// origin is a cell center and the centers form the lattice `h * Z^dim`;
/// odd counts are required by the convolution operations.
pub fn make_grid(dim: usize, half_extent: f64, cells_per_axis: usize) -> Result<GridSpec> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be 1 or 2, got {dim}"
        )));
    }
    if !(half_extent > 0.0) || !half_extent.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "half_extent must be positive, got {half_extent}"
        )));
    }
    if cells_per_axis < 3 {
        return Err(Error::InvalidArgument(format!(
            "cells_per_axis must be at least 3, got {cells_per_axis}"
        )));
    }
    Ok(GridSpec {
        dim,
        cells_per_axis,
        h: 2.0 * half_extent / cells_per_axis as f64,
        half_extent,
    })
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Total number of cells in the box.
    pub fn total_cells(&self) -> usize {
        match self.dim {
            1 => self.cells_per_axis,
            _ => self.cells_per_axis * self.cells_per_axis,
        }
    }

    /// Cell volume `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        match self.dim {
            1 => self.h,
            _ => self.h * self.h,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.cells_per_axis % 2 == 1
    }

    /// Center coordinate along one axis.
    ///
    /// Computed as `(2i + 1 - n) * h/2` so that mirrored indices give
    /// exactly negated coordinates (the tie structure of radial orders
    /// depends on this being bit-exact).
    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        ((2 * i + 1) as f64 - self.cells_per_axis as f64) * (0.5 * self.h)
    }

    /// Per-axis indices of a flat cell index.
    #[inline]
    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat % self.cells_per_axis, flat / self.cells_per_axis],
        }
    }

    #[inline]
    pub fn flat_index(&self, ij: [usize; 2]) -> usize {
        match self.dim {
            1 => ij[0],
            _ => ij[0] + ij[1] * self.cells_per_axis,
        }
    }

    /// Center of a cell; the second component is 0 in one dimension.
    #[inline]
    pub fn center(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.axis_indices(flat);
        match self.dim {
            1 => [self.axis_coord(i), 0.0],
            _ => [self.axis_coord(i), self.axis_coord(j)],
        }
    }

    /// Squared distance of a cell center from the origin.
    #[inline]
    pub fn radius2(&self, flat: usize) -> f64 {
        let c = self.center(flat);
        c[0] * c[0] + c[1] * c[1]
    }
}

#[derive(Debug, Clone)]
enum MaskKind {
    Full,
    Cells {
        members: Vec<usize>,
        bitmap: Vec<bool>,
        /// Inclusive per-axis index bounds of the members.
        bbox: [[usize; 2]; 2],
    },
}

/// A set of cells of one grid; the discrete stand-in for a bounded open set.
#[derive(Debug, Clone)]
pub struct DomainMask {
    grid: GridSpec,
    kind: MaskKind,
}

impl DomainMask {
    /// The whole grid box.
    pub fn full(grid: GridSpec) -> Self {
        DomainMask {
            grid,
            kind: MaskKind::Full,
        }
    }

    /// Mask from a list of flat cell indices (deduplicated, sorted).
    pub fn from_cells(grid: GridSpec, mut cells: Vec<usize>) -> Result<Self> {
        cells.sort_unstable();
        cells.dedup();
        if cells.is_empty() {
            return Err(Error::InvalidArgument("mask must be non-empty".into()));
        }
        let total = grid.total_cells();
        if *cells.last().unwrap() >= total {
            return Err(Error::InvalidArgument(
                "mask cell index outside the grid box".into(),
            ));
        }
        let mut bitmap = vec![false; total];
        let mut bbox = [[usize::MAX, 0], [usize::MAX, 0]];
        for &c in &cells {
            bitmap[c] = true;
            let ij = grid.axis_indices(c);
            for a in 0..2 {
                bbox[a][0] = bbox[a][0].min(ij[a]);
                bbox[a][1] = bbox[a][1].max(ij[a]);
            }
        }
        Ok(DomainMask {
            grid,
            kind: MaskKind::Cells {
                members: cells,
                bitmap,
                bbox,
            },
        })
    }

    /// Mask of cells whose centers satisfy a predicate.
    pub fn from_predicate(grid: GridSpec, pred: impl Fn([f64; 2]) -> bool) -> Result<Self> {
        let cells: Vec<usize> = (0..grid.total_cells())
            .filter(|&c| pred(grid.center(c)))
            .collect();
        Self::from_cells(grid, cells)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            MaskKind::Full => self.grid.total_cells(),
            MaskKind::Cells { members, .. } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Discrete volume: member count times `h^dim`.
    pub fn volume(&self) -> f64 {
        self.len() as f64 * self.grid.cell_volume()
    }

    #[inline]
    pub fn contains(&self, flat: usize) -> bool {
        match &self.kind {
            MaskKind::Full => flat < self.grid.total_cells(),
            MaskKind::Cells { bitmap, .. } => bitmap[flat],
        }
    }

    /// Member cells in ascending flat order.
    pub fn members(&self) -> Vec<usize> {
        match &self.kind {
            MaskKind::Full => (0..self.grid.total_cells()).collect(),
            MaskKind::Cells { members, .. } => members.clone(),
        }
    }

    pub fn for_each_member(&self, mut f: impl FnMut(usize)) {
        match &self.kind {
            MaskKind::Full => (0..self.grid.total_cells()).for_each(&mut f),
            MaskKind::Cells { members, .. } => members.iter().copied().for_each(&mut f),
        }
    }

    /// Inclusive per-axis index bounds of the member cells.
    pub fn bbox(&self) -> [[usize; 2]; 2] {
        match &self.kind {
            MaskKind::Full => {
                let n = self.grid.cells_per_axis - 1;
                match self.grid.dim {
                    1 => [[0, n], [0, 0]],
                    _ => [[0, n], [0, n]],
                }
            }
            MaskKind::Cells { bbox, .. } => *bbox,
        }
    }

    /// True if every member of `self` is a member of `other`.
    pub fn subset_of(&self, other: &DomainMask) -> bool {
        if self.grid != other.grid {
            return false;
        }
        match &self.kind {
            MaskKind::Full => other.len() == self.grid.total_cells(),
            MaskKind::Cells { members, .. } => members.iter().all(|&c| other.contains(c)),
        }
    }

    /// Membership bitmap; `None` means the full box.
    pub(crate) fn bitmap(&self) -> Option<&[bool]> {
        match &self.kind {
            MaskKind::Full => None,
            MaskKind::Cells { bitmap, .. } => Some(bitmap),
        }
    }

    /// Largest center-to-center distance between member cells.
    pub fn diameter(&self) -> f64 {
        let b = self.bbox();
        let dx = (b[0][1] - b[0][0]) as f64 * self.grid.h;
        let dy = match self.grid.dim {
            1 => 0.0,
            _ => (b[1][1] - b[1][0]) as f64 * self.grid.h,
        };
        (dx * dx + dy * dy).sqrt()
    }
}

/// Mask of cells whose centers lie within radius
/// `(target_volume / omega_N)^(1/N)` of the origin.
///
/// The reported volume is the discrete volume of the returned mask; it
/// approximates (and need not equal) `target_volume`.
pub fn ball_mask(grid: GridSpec, target_volume: f64) -> Result<DomainMask> {
    if !(target_volume > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target_volume must be positive, got {target_volume}"
        )));
    }
    let r = (target_volume / unit_ball_volume(grid.dim())).powf(1.0 / grid.dim() as f64);
    ball_mask_radius(grid, r)
}

/// Mask of cells whose centers satisfy `|x| <= radius`.
pub fn ball_mask_radius(grid: GridSpec, radius: f64) -> Result<DomainMask> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if radius > grid.half_extent() {
        return Err(Error::DomainTooSmall(format!(
            "ball of radius {radius} exceeds the grid box (half extent {})",
            grid.half_extent()
        )));
    }
    let r2 = radius * radius;
    DomainMask::from_predicate(grid, |c| c[0] * c[0] + c[1] * c[1] <= r2)
}

/// Cell values on a mask, extended by zero outside it.
///
/// Storage is dense over the box but every read goes through the mask, so
/// out-of-mask storage can never leak into results (this is load-bearing:
/// see [`GridField::with_raw_storage`]).
#[derive(Debug, Clone)]
pub struct GridField {
    grid: GridSpec,
    mask: Arc<DomainMask>,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(mask: impl Into<Arc<DomainMask>>) -> Self {
        let mask = mask.into();
        let grid = *mask.grid();
        GridField {
            grid,
            values: vec![0.0; grid.total_cells()],
            mask,
        }
    }

    /// Field sampling `f` at the centers of the mask cells.
    pub fn from_fn(
        mask: impl Into<Arc<DomainMask>>,
        f: impl Fn([f64; 2]) -> f64,
    ) -> Result<Self> {
        let mask = mask.into();
        let grid = *mask.grid();
        let mut values = vec![0.0; grid.total_cells()];
        for c in mask.members() {
            let v = f(grid.center(c));
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value {v} at cell {c}"
                )));
            }
            values[c] = v;
        }
        Ok(GridField { grid, mask, values })
    }

    /// Field from one value per mask member (ascending flat order).
    pub fn from_member_values(mask: impl Into<Arc<DomainMask>>, vals: &[f64]) -> Result<Self> {
        let mask = mask.into();
        if vals.len() != mask.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                mask.len(),
                vals.len()
            )));
        }
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value {v}")));
        }
        let grid = *mask.grid();
        let mut values = vec![0.0; grid.total_cells()];
        for (k, c) in mask.members().into_iter().enumerate() {
            values[c] = vals[k];
        }
        Ok(GridField { grid, mask, values })
    }

    /// Field over dense storage that is NOT zeroed outside the mask.
    ///
    /// Out-of-mask entries may hold anything (even NaN); the zero-extension
    /// contract still holds because reads are masked. Used to verify that
    /// no operation ever reads outside a mask.
    pub fn with_raw_storage(mask: impl Into<Arc<DomainMask>>, dense: Vec<f64>) -> Result<Self> {
        let mask = mask.into();
        let grid = *mask.grid();
        if dense.len() != grid.total_cells() {
            return Err(Error::InvalidArgument(format!(
                "dense storage must have {} entries, got {}",
                grid.total_cells(),
                dense.len()
            )));
        }
        for c in mask.members() {
            if !dense[c].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value {} at mask cell {c}",
                    dense[c]
                )));
            }
        }
        Ok(GridField {
            grid,
            mask,
            values: dense,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    /// Dense storage; out-of-mask entries are meaningless (read via
    /// [`GridField::value`] or mask the index yourself).
    pub(crate) fn raw_values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a cell: stored value inside the mask, exactly 0 outside.
    #[inline]
    pub fn value(&self, flat: usize) -> f64 {
        if self.mask.contains(flat) {
            self.values[flat]
        } else {
            0.0
        }
    }

    /// `(flat index, value)` for every mask member, ascending.
    pub fn member_values(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.mask.len());
        self.mask
            .for_each_member(|c| out.push((c, self.values[c])));
        out
    }

    /// Mask values only, ascending flat order.
    pub fn values_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.mask.len());
        self.mask.for_each_member(|c| out.push(self.values[c]));
        out
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.mask.for_each_member(|c| m = m.max(self.values[c].abs()));
        m
    }

    pub fn min_value(&self) -> f64 {
        let mut m = f64::INFINITY;
        self.mask.for_each_member(|c| m = m.min(self.values[c]));
        m
    }

    /// Signed discrete integral `h^N * sum`.
    pub fn mass(&self) -> f64 {
        let mut s = 0.0;
        self.mask.for_each_member(|c| s += self.values[c]);
        s * self.grid.cell_volume()
    }

    /// New field on the same mask with `f` applied to each member value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridField> {
        let vals: Vec<f64> = self.values_vec().into_iter().map(f).collect();
        GridField::from_member_values(self.mask.clone(), &vals)
    }

    /// `self + s * other`, requiring identical masks.
    pub fn add_scaled(&self, other: &GridField, s: f64) -> Result<GridField> {
        self.zip(other, |a, b| a + s * b)
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grid mismatch".into()));
        }
        if !self.mask.subset_of(&other.mask) || !other.mask.subset_of(&self.mask) {
            return Err(Error::InvalidArgument("mask mismatch".into()));
        }
        let vals: Vec<f64> = self
            .values_vec()
            .into_iter()
            .zip(other.values_vec())
            .map(|(a, b)| f(a, b))
            .collect();
        GridField::from_member_values(self.mask.clone(), &vals)
    }

    /// Writes the field as a text table, one mask cell per line.
    ///
    /// Header `i0,x0,value` (1D) or `i0,i1,x0,x1,value` (2D). Values use
    /// shortest round-trip decimal formatting, so finite doubles survive a
    /// write/read cycle bit-exactly.
    pub fn write_table(&self, w: &mut impl Write) -> std::io::Result<()> {
        match self.grid.dim() {
            1 => writeln!(w, "i0,x0,value")?,
            _ => writeln!(w, "i0,i1,x0,x1,value")?,
        }
        for (c, v) in self.member_values() {
            let [i, j] = self.grid.axis_indices(c);
            let ctr = self.grid.center(c);
            match self.grid.dim() {
                1 => writeln!(w, "{},{},{}", i, ctr[0], v)?,
                _ => writeln!(w, "{},{},{},{},{}", i, j, ctr[0], ctr[1], v)?,
            }
        }
        Ok(())
    }

    /// Reads a field written by [`GridField::write_table`] back onto `grid`.
    pub fn read_table(grid: GridSpec, r: &mut impl BufRead) -> Result<GridField> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty field table".into()))?
            .map_err(|e| Error::InvalidArgument(format!("read error: {e}")))?;
        let expected = match grid.dim() {
            1 => "i0,x0,value",
            _ => "i0,i1,x0,x1,value",
        };
        if header.trim() != expected {
            return Err(Error::InvalidArgument(format!(
                "bad field table header {header:?}, expected {expected:?}"
            )));
        }
        let mut cells = Vec::new();
        let mut vals = Vec::new();
        for line in lines {
            let line = line.map_err(|e| Error::InvalidArgument(format!("read error: {e}")))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let (ij, vstr) = match grid.dim() {
                1 => {
                    if parts.len() != 3 {
                        return Err(Error::InvalidArgument(format!("bad table line {line:?}")));
                    }
                    ([parse_usize(parts[0])?, 0], parts[2])
                }
                _ => {
                    if parts.len() != 5 {
                        return Err(Error::InvalidArgument(format!("bad table line {line:?}")));
                    }
                    ([parse_usize(parts[0])?, parse_usize(parts[1])?], parts[4])
                }
            };
            if ij[0] >= grid.cells_per_axis() || ij[1] >= grid.cells_per_axis() {
                return Err(Error::InvalidArgument(format!(
                    "cell index {ij:?} outside the grid"
                )));
            }
            cells.push(grid.flat_index(ij));
            vals.push(
                vstr.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad value {vstr:?}: {e}")))?,
            );
        }
        // Table lines are in ascending flat order by construction, but accept
        // any order: sort pairs by flat index.
        let mut pairs: Vec<(usize, f64)> = cells.into_iter().zip(vals).collect();
        pairs.sort_unstable_by_key(|p| p.0);
        let mask = DomainMask::from_cells(grid, pairs.iter().map(|p| p.0).collect())?;
        let vals: Vec<f64> = pairs.into_iter().map(|p| p.1).collect();
        GridField::from_member_values(mask, &vals)
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|e| Error::InvalidArgument(format!("bad index {s:?}: {e}")))
}

/// Discrete `L^p` norm `(sum |f_i|^p h^N)^(1/p)`, max-norm for `p = inf`.
pub fn lp_norm(f: &GridField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "p must be >= 1 or infinite, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let mut s = 0.0;
    f.mask()
        .for_each_member(|c| s += f.value(c).abs().powf(p));
    Ok((s * f.grid().cell_volume()).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_1d_centers() {
        let g = make_grid(1, 2.5, 5).unwrap();
        assert_eq!(g.h(), 1.0);
        let xs: Vec<f64> = (0..5).map(|i| g.axis_coord(i)).collect();
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn make_grid_2d_even() {
        let g = make_grid(2, 1.0, 4).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.total_cells(), 16);
    }

    #[test]
    fn make_grid_too_few_cells() {
        assert!(matches!(
            make_grid(1, 1.0, 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            make_grid(1, -1.0, 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn centers_mirror_exactly() {
        // mirrored cells must have equal radius bit-for-bit (the radial
        // tie structure depends on it)
        for &(dim, n) in &[(1usize, 257usize), (1, 64), (2, 33)] {
            let g = make_grid(dim, 1.7, n).unwrap();
            for i in 0..n {
                let (a, b) = (g.axis_coord(i), g.axis_coord(n - 1 - i));
                assert_eq!(a, -b);
                assert_eq!((a * a).to_bits(), (b * b).to_bits());
            }
        }
    }

    #[test]
    fn ball_mask_radii() {
        let g = make_grid(1, 2.5, 5).unwrap();
        let m = ball_mask(g, 2.0).unwrap(); // radius (2/2)^1 = 1
        assert_eq!(m.members(), vec![1, 2, 3]);
        assert_eq!(m.volume(), 3.0);

        let g2 = make_grid(2, 2.5, 25).unwrap();
        let m1 = ball_mask(g2, std::f64::consts::PI).unwrap(); // radius 1
        let m2 = ball_mask(g2, 4.0 * std::f64::consts::PI).unwrap(); // radius 2
        for c in m1.members() {
            assert!(g2.radius2(c) <= 1.0 + 1e-12);
            assert!(m2.contains(c), "ball_mask monotone in volume");
        }
        for c in m2.members() {
            assert!(g2.radius2(c) <= 4.0 + 1e-12);
        }
    }

    #[test]
    fn ball_mask_exceeding_box() {
        let g = make_grid(1, 1.0, 9).unwrap();
        assert!(matches!(
            ball_mask(g, 4.0),
            Err(Error::DomainTooSmall(_))
        ));
    }

    #[test]
    fn lp_norm_examples() {
        // constant 1 on mask of volume 2, p = 2 -> sqrt(2)
        let g = make_grid(1, 2.5, 5).unwrap();
        let m = DomainMask::from_cells(g, vec![1, 2]).unwrap();
        let f = GridField::from_fn(m, |_| 1.0).unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);

        let m = DomainMask::from_cells(g, vec![0, 1, 2]).unwrap();
        let f = GridField::from_member_values(m.clone(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(lp_norm(&f, 1.0).unwrap(), 6.0);

        let f = GridField::from_member_values(m, &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 3.0);
        assert!(matches!(
            lp_norm(&f, 0.5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zero_extension_outside_mask() {
        let g = make_grid(1, 2.5, 5).unwrap();
        let m = DomainMask::from_cells(g, vec![2]).unwrap();
        let f = GridField::from_member_values(m, &[7.0]).unwrap();
        assert_eq!(f.value(0), 0.0);
        assert_eq!(f.value(2), 7.0);
        assert_eq!(f.value(4), 0.0);
    }

    #[test]
    fn table_roundtrip_bit_exact() {
        let g = make_grid(2, 1.0, 5).unwrap();
        let m = DomainMask::from_cells(g, vec![0, 7, 12, 24]).unwrap();
        let f =
            GridField::from_member_values(m, &[0.1, -3.25e-300, 1.0 / 3.0, 4.9e17]).unwrap();
        let mut buf = Vec::new();
        f.write_table(&mut buf).unwrap();
        let back = GridField::read_table(g, &mut buf.as_slice()).unwrap();
        for c in 0..g.total_cells() {
            assert_eq!(f.value(c).to_bits(), back.value(c).to_bits());
        }
    }
}
