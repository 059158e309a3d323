//! Dense direct convolution on odd grids.
//!
//! `(f ∗ g)(x) = h^N Σ_y f(x-y) g(y)` with zero extension outside masks;
//! restricted mode sums over `y ∈ E` only. The per-cell sum always runs in
//! ascending flat index order of `y`, skipping only terms that are exactly
//! zero, so results are bit-identical across thread counts and between the
//! parallel and sequential engines. Odd cell counts are required: on an
//! even grid the centers are not closed under differences, so `f(x-y)` has
//! no cell to read from.

use crate::error::{Error, Result};
use crate::grid::{ball_mask_radius, DomainMask, GridField};
use crate::kernel::RescaledKernel;
use std::sync::Arc;

/// Convolution mode: over the whole space or restricted to a domain.
#[derive(Clone, Copy)]
pub enum ConvMode<'a> {
    Full,
    Restricted(&'a DomainMask),
}

#[derive(Clone, Copy)]
struct View<'a> {
    vals: &'a [f64],
    bm: Option<&'a [bool]>,
}

impl<'a> View<'a> {
    fn of(f: &'a GridField) -> Self {
        View {
            vals: f.raw_values(),
            bm: f.mask().bitmap(),
        }
    }

    #[inline(always)]
    fn get(&self, i: usize) -> f64 {
        match self.bm {
            None => self.vals[i],
            Some(b) => {
                if b[i] {
                    self.vals[i]
                } else {
                    0.0
                }
            }
        }
    }
}

/// Convolution with output on the full grid box; parallel over output
/// cells when the `parallel` feature is enabled.
pub fn convolve(f: &GridField, g: &GridField, mode: ConvMode) -> Result<GridField> {
    let out = DomainMask::full(*f.grid());
    convolve_on(out, f, g, mode, true)
}

/// Sequential engine, always available; bit-identical to [`convolve`].
pub fn convolve_seq(f: &GridField, g: &GridField, mode: ConvMode) -> Result<GridField> {
    let out = DomainMask::full(*f.grid());
    convolve_on(out, f, g, mode, false)
}

/// Convolution evaluated only on the cells of `out_mask`.
///
/// Cells outside `out_mask` are exact zeros of the result field. This is
/// sound whenever the caller knows the support of the result (solvers
/// restrict to the domain; convolution powers to the support ball).
pub fn convolve_on(
    out_mask: impl Into<Arc<DomainMask>>,
    f: &GridField,
    g: &GridField,
    mode: ConvMode,
    parallel: bool,
) -> Result<GridField> {
    let out_mask = out_mask.into();
    let grid = *f.grid();
    if *g.grid() != grid || *out_mask.grid() != grid {
        return Err(Error::InvalidArgument("grid mismatch in convolution".into()));
    }
    if let ConvMode::Restricted(e) = mode {
        if *e.grid() != grid {
            return Err(Error::InvalidArgument(
                "restriction mask on a different grid".into(),
            ));
        }
    }
    if !grid.is_odd() {
        return Err(Error::InvalidArgument(
            "convolution requires an odd cells_per_axis (cell centers must be closed under differences)".into(),
        ));
    }

    let n = grid.cells_per_axis() as isize;
    let c = (n - 1) / 2;
    let hn = grid.cell_volume();
    let fv = View::of(f);
    let gv = View::of(g);
    let ebm: Option<&[bool]> = match mode {
        ConvMode::Full => None,
        ConvMode::Restricted(e) => e.bitmap(),
    };
    let fb = f.mask().bbox();
    let gb = g.mask().bbox();

    let members = out_mask.members();
    let vals: Vec<f64> = match grid.dim() {
        1 => {
            let (flo, fhi) = (fb[0][0] as isize, fb[0][1] as isize);
            let (glo, ghi) = (gb[0][0] as isize, gb[0][1] as isize);
            let eval = move |x: usize| -> f64 {
                let ix = x as isize;
                let ylo = glo.max(ix + c - fhi).max(0);
                let yhi = ghi.min(ix + c - flo).min(n - 1);
                let mut acc = 0.0;
                let mut iy = ylo;
                while iy <= yhi {
                    let keep = match ebm {
                        None => true,
                        Some(b) => b[iy as usize],
                    };
                    if keep {
                        acc += fv.get((ix - iy + c) as usize) * gv.get(iy as usize);
                    }
                    iy += 1;
                }
                hn * acc
            };
            compute(&members, parallel, eval)
        }
        _ => {
            let eval = move |x: usize| -> f64 {
                let ix0 = (x % grid.cells_per_axis()) as isize;
                let ix1 = (x / grid.cells_per_axis()) as isize;
                let y0lo = (gb[0][0] as isize).max(ix0 + c - fb[0][1] as isize).max(0);
                let y0hi = (gb[0][1] as isize)
                    .min(ix0 + c - fb[0][0] as isize)
                    .min(n - 1);
                let y1lo = (gb[1][0] as isize).max(ix1 + c - fb[1][1] as isize).max(0);
                let y1hi = (gb[1][1] as isize)
                    .min(ix1 + c - fb[1][0] as isize)
                    .min(n - 1);
                let mut acc = 0.0;
                let mut iy1 = y1lo;
                while iy1 <= y1hi {
                    let fy1 = ((ix1 - iy1 + c) * n) as usize;
                    let gy1 = (iy1 * n) as usize;
                    let mut iy0 = y0lo;
                    while iy0 <= y0hi {
                        let y = gy1 + iy0 as usize;
                        let keep = match ebm {
                            None => true,
                            Some(b) => b[y],
                        };
                        if keep {
                            let fi = fy1 + (ix0 - iy0 + c) as usize;
                            acc += fv.get(fi) * gv.get(y);
                        }
                        iy0 += 1;
                    }
                    iy1 += 1;
                }
                hn * acc
            };
            compute(&members, parallel, eval)
        }
    };
    GridField::from_member_values(out_mask, &vals)
}

#[cfg(feature = "parallel")]
fn compute(members: &[usize], parallel: bool, eval: impl Fn(usize) -> f64 + Sync) -> Vec<f64> {
    use rayon::prelude::*;
    if parallel {
        members.par_iter().map(|&x| eval(x)).collect()
    } else {
        members.iter().map(|&x| eval(x)).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn compute(members: &[usize], _parallel: bool, eval: impl Fn(usize) -> f64 + Sync) -> Vec<f64> {
    members.iter().map(|&x| eval(x)).collect()
}

/// `k`-fold self-convolution of the rescaled kernel.
///
/// Full mode requires the box to hold the `k`-fold support (radius grows
/// linearly in `k`); the result mass is then exactly preserved up to
/// rounding. Restricted mode integrates over `E` at every step and loses
/// mass monotonically.
pub fn convolution_power(rk: &RescaledKernel, k: usize, mode: ConvMode) -> Result<GridField> {
    if k < 1 {
        return Err(Error::InvalidArgument("power k must be >= 1".into()));
    }
    match mode {
        ConvMode::Full => {
            let mut out = rk.rho().clone();
            power_steps_full(rk, k, |_, cur| out = cur.clone())?;
            Ok(out)
        }
        ConvMode::Restricted(e) => {
            let mut cur = rk.rho().clone();
            let full = DomainMask::full(*rk.grid());
            for _ in 2..=k {
                cur = convolve_on(full.clone(), rk.rho(), &cur, ConvMode::Restricted(e), true)?;
            }
            Ok(cur)
        }
    }
}

/// Iterates `rho, rho*rho, ..., (rho*)^k` in full mode, calling
/// `visit(j, power_j)` for every `j = 1..=k`. Each power is computed only
/// on its support ball, which is exact (outside cells are true zeros).
pub(crate) fn power_steps_full(
    rk: &RescaledKernel,
    k: usize,
    mut visit: impl FnMut(usize, &GridField),
) -> Result<()> {
    let grid = *rk.grid();
    let reach = k as f64 * rk.support_radius();
    if reach > grid.half_extent() - 0.5 * grid.h() {
        return Err(Error::DomainTooSmall(format!(
            "{k}-fold support radius {reach} exceeds the grid box (half extent {})",
            grid.half_extent()
        )));
    }
    let mut cur = rk.rho().clone();
    visit(1, &cur);
    for j in 2..=k {
        let radius = (j as f64 * rk.support_radius() + grid.h()).min(grid.half_extent());
        let mask = ball_mask_radius(grid, radius)?;
        cur = convolve_on(mask, rk.rho(), &cur, ConvMode::Full, true)?;
        visit(j, &cur);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, DomainMask, GridField};
    use crate::kernel::{make_kernel, rescale, KernelProfile};

    #[test]
    fn delta_is_identity() {
        let g = make_grid(1, 3.5, 7).unwrap(); // h = 1
        let full = DomainMask::full(g);
        let f =
            GridField::from_member_values(full.clone(), &[0.0, 0.5, 2.0, 1.0, 0.0, 3.0, 0.0])
                .unwrap();
        let delta =
            GridField::from_member_values(full, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = convolve(&f, &delta, ConvMode::Full).unwrap();
        for c in 0..g.total_cells() {
            assert_eq!(out.value(c), f.value(c));
        }
    }

    #[test]
    fn commutativity() {
        let g = make_grid(1, 4.5, 9).unwrap();
        let full = DomainMask::full(g);
        let f = GridField::from_fn(full.clone(), |c| (c[0] * 0.7).cos().max(0.0)).unwrap();
        let h = GridField::from_fn(full, |c| 1.0 / (1.0 + c[0] * c[0])).unwrap();
        let fg = convolve(&f, &h, ConvMode::Full).unwrap();
        let gf = convolve(&h, &f, ConvMode::Full).unwrap();
        for c in 0..g.total_cells() {
            assert!((fg.value(c) - gf.value(c)).abs() <= 1e-14 * fg.value(c).abs().max(1.0));
        }
    }

    #[test]
    fn shifted_kernel_example() {
        // (1,1,1)/3 on {-1,0,1} convolved with the indicator of cell -1
        // gives 1/3 on {-2,-1,0}.
        let g = make_grid(1, 3.5, 7).unwrap();
        let full = DomainMask::full(g);
        let t = 1.0 / 3.0;
        let f = GridField::from_member_values(full.clone(), &[0.0, 0.0, t, t, t, 0.0, 0.0])
            .unwrap();
        let ind =
            GridField::from_member_values(full, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let out = convolve(&f, &ind, ConvMode::Full).unwrap();
        let want = [0.0, t, t, t, 0.0, 0.0, 0.0];
        for c in 0..7 {
            assert!((out.value(c) - want[c]).abs() < 1e-15);
        }
    }

    #[test]
    fn even_grid_rejected() {
        let g = make_grid(1, 2.0, 8).unwrap();
        let full = DomainMask::full(g);
        let f = GridField::from_fn(full.clone(), |_| 1.0).unwrap();
        assert!(matches!(
            convolve(&f, &f, ConvMode::Full),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn poisoned_storage_outside_mask_never_read() {
        let g = make_grid(1, 4.5, 9).unwrap();
        let mask = DomainMask::from_cells(g, vec![3, 4, 5]).unwrap();
        let clean = GridField::from_member_values(mask.clone(), &[1.0, 2.0, 3.0]).unwrap();
        let mut poisoned = vec![f64::NAN; g.total_cells()];
        poisoned[3] = 1.0;
        poisoned[4] = 2.0;
        poisoned[5] = 3.0;
        let dirty = GridField::with_raw_storage(mask.clone(), poisoned).unwrap();
        let ker = GridField::from_member_values(
            DomainMask::from_cells(g, vec![3, 4, 5]).unwrap(),
            &[0.25, 0.5, 0.25],
        )
        .unwrap();
        let e = DomainMask::from_cells(g, vec![4, 5, 6]).unwrap();
        for mode in [ConvMode::Full, ConvMode::Restricted(&e)] {
            let a = convolve(&ker, &clean, mode).unwrap();
            let b = convolve(&ker, &dirty, mode).unwrap();
            for c in 0..g.total_cells() {
                assert_eq!(a.value(c).to_bits(), b.value(c).to_bits());
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let g = make_grid(2, 1.5, 33).unwrap();
        let full = DomainMask::full(g);
        let f = GridField::from_fn(full.clone(), |c| (1.0 - c[0].hypot(c[1])).max(0.0)).unwrap();
        let e = DomainMask::from_predicate(g, |c| c[0] > -0.5).unwrap();
        let w = GridField::from_fn(full, |c| (c[0] + 2.0) * (c[1] + 1.5)).unwrap();
        for mode in [ConvMode::Full, ConvMode::Restricted(&e)] {
            let par = convolve(&f, &w, mode).unwrap();
            let seq = convolve_seq(&f, &w, mode).unwrap();
            for c in 0..g.total_cells() {
                assert_eq!(par.value(c).to_bits(), seq.value(c).to_bits());
            }
        }
    }

    #[test]
    fn power_basics() {
        let g = make_grid(1, 10.0, 641).unwrap();
        let k = make_kernel(KernelProfile::UniformBall, 1.0, g).unwrap();
        let rk = rescale(&k, 1.0).unwrap();

        let p1 = convolution_power(&rk, 1, ConvMode::Full).unwrap();
        for c in 0..g.total_cells() {
            assert_eq!(p1.value(c).to_bits(), rk.rho().value(c).to_bits());
        }

        let p8 = convolution_power(&rk, 8, ConvMode::Full).unwrap();
        assert!((p8.mass() - 1.0).abs() < 1e-10, "mass {}", p8.mass());

        let e = DomainMask::from_predicate(g, |c| c[0].abs() < 2.0).unwrap();
        let r4 = convolution_power(&rk, 4, ConvMode::Restricted(&e)).unwrap();
        let r8 = convolution_power(&rk, 8, ConvMode::Restricted(&e)).unwrap();
        assert!(r8.mass() <= r4.mass() + 1e-12);
        assert!(r4.mass() <= 1.0 + 1e-12);
    }

    #[test]
    fn power_overflowing_box_is_an_error() {
        let g = make_grid(1, 3.0, 193).unwrap();
        let k = make_kernel(KernelProfile::UniformBall, 1.0, g).unwrap();
        let rk = rescale(&k, 1.0).unwrap();
        assert!(matches!(
            convolution_power(&rk, 8, ConvMode::Full),
            Err(Error::DomainTooSmall(_))
        ));
    }

    #[test]
    fn radial_closure_exact_in_1d() {
        use crate::rearrange::{is_radially_nonincreasing, RadialOrder};
        let g = make_grid(1, 8.0, 257).unwrap();
        let order = RadialOrder::new(g);
        // random pair-radial fields: one value per radius class, non-increasing
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..25 {
            let classes = order.radius_classes();
            let take = 20 + (next() * 40.0) as usize;
            let mut fields = Vec::new();
            for _ in 0..2 {
                let mut vals: Vec<f64> = (0..take).map(|_| next()).collect();
                vals.sort_unstable_by(|a, b| b.total_cmp(a));
                let mut dense = vec![0.0; g.total_cells()];
                let mut cells = Vec::new();
                for (cls, v) in classes[..take].iter().zip(&vals) {
                    for &cell in &order.cells()[cls.0..cls.1] {
                        dense[cell] = *v;
                        cells.push(cell);
                    }
                }
                let mask = DomainMask::from_cells(g, cells).unwrap();
                let vals_m: Vec<f64> = mask.members().into_iter().map(|c| dense[c]).collect();
                fields.push(GridField::from_member_values(mask, &vals_m).unwrap());
            }
            let out = convolve(&fields[0], &fields[1], ConvMode::Full).unwrap();
            let tol = 1e-12 * out.max_abs();
            assert!(is_radially_nonincreasing(&out, tol));
            let ball = crate::grid::ball_mask_radius(g, 3.0).unwrap();
            let outr = convolve(&fields[0], &fields[1], ConvMode::Restricted(&ball)).unwrap();
            assert!(is_radially_nonincreasing(&outr, 1e-12 * outr.max_abs()));
        }
    }
}
