//! Seeded instance generators for the randomized experiment suites.
//!
//! Every instance is a pure function of `(base_seed, index)`: generators
//! draw from a ChaCha stream seeded through a splitmix mix, so suites are
//! reproducible across runs, platforms, and thread counts, and a failing
//! instance can be replayed from its index alone.

use crate::error::Result;
use crate::grid::{make_grid, DomainMask, GridField, GridSpec};
use crate::rearrange::RadialOrder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// splitmix64 of `base ^ (index * golden)`: decorrelated per-instance seeds.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_for(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(base, index))
}

/// One draw of the stationary comparison suite.
#[derive(Debug, Clone)]
pub struct StationaryInstance {
    pub index: u64,
    pub dim: usize,
    pub domain: DomainMask,
    pub forcing: GridField,
    pub epsilon: f64,
    pub absorption: f64,
    pub p: f64,
}

fn draw_epsilon(rng: &mut ChaCha8Rng) -> f64 {
    [0.25, 0.5, 1.0][rng.random_range(0..3)]
}

fn draw_absorption(rng: &mut ChaCha8Rng) -> f64 {
    [0.0, 1.0][rng.random_range(0..2)]
}

fn draw_p(rng: &mut ChaCha8Rng) -> f64 {
    [1.0, 2.0, f64::INFINITY][rng.random_range(0..3)]
}

/// Random union of up to three intervals inside `(-1, 1)`.
fn random_domain_1d(grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<DomainMask> {
    let pieces = rng.random_range(1..=3usize);
    let mut spans = Vec::new();
    for _ in 0..pieces {
        let a = rng.random_range(-1.0..0.9f64);
        let len = rng.random_range(0.1..0.8f64);
        spans.push((a, (a + len).min(1.0)));
    }
    DomainMask::from_predicate(grid, move |c| {
        spans.iter().any(|&(a, b)| c[0] > a && c[0] < b)
    })
}

/// Random union of up to two axis-aligned rectangles inside `(-1, 1)^2`.
fn random_domain_2d(grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<DomainMask> {
    let pieces = rng.random_range(1..=2usize);
    let mut boxes = Vec::new();
    for _ in 0..pieces {
        let ax = rng.random_range(-1.0..0.6f64);
        let ay = rng.random_range(-1.0..0.6f64);
        let wx = rng.random_range(0.35..1.2f64);
        let wy = rng.random_range(0.35..1.2f64);
        boxes.push((ax, (ax + wx).min(1.0), ay, (ay + wy).min(1.0)));
    }
    DomainMask::from_predicate(grid, move |c| {
        boxes
            .iter()
            .any(|&(x0, x1, y0, y1)| c[0] > x0 && c[0] < x1 && c[1] > y0 && c[1] < y1)
    })
}

fn iid_field(mask: DomainMask, rng: &mut ChaCha8Rng) -> Result<GridField> {
    let vals: Vec<f64> = (0..mask.len()).map(|_| rng.random::<f64>()).collect();
    GridField::from_member_values(mask, &vals)
}

/// Grid used for the 1D stationary suite: 449 cells on `[-2.2, 2.2]`.
pub fn stationary_grid_1d() -> GridSpec {
    make_grid(1, 2.2, 449).unwrap()
}

/// Grid used for the 2D stationary suite: 65^2 cells on `[-1.3, 1.3]^2`.
pub fn stationary_grid_2d() -> GridSpec {
    make_grid(2, 1.3, 65).unwrap()
}

pub fn stationary_instance(base_seed: u64, index: u64, dim: usize) -> Result<StationaryInstance> {
    let mut rng = rng_for(base_seed, index);
    let grid = match dim {
        1 => stationary_grid_1d(),
        _ => stationary_grid_2d(),
    };
    let domain = match dim {
        1 => random_domain_1d(grid, &mut rng)?,
        _ => random_domain_2d(grid, &mut rng)?,
    };
    let forcing = iid_field(domain.clone(), &mut rng)?;
    Ok(StationaryInstance {
        index,
        dim,
        domain,
        forcing,
        epsilon: draw_epsilon(&mut rng),
        absorption: draw_absorption(&mut rng),
        p: draw_p(&mut rng),
    })
}

/// One draw of the evolution comparison suite (1D).
#[derive(Debug, Clone)]
pub struct EvolutionInstance {
    pub index: u64,
    pub domain: DomainMask,
    pub initial: GridField,
    pub forcing: Vec<GridField>,
    pub epsilon: f64,
    pub absorption: f64,
    pub p: f64,
    pub steps: usize,
}

pub fn evolution_grid_1d() -> GridSpec {
    make_grid(1, 1.6, 257).unwrap()
}

pub fn evolution_instance(base_seed: u64, index: u64) -> Result<EvolutionInstance> {
    let mut rng = rng_for(base_seed, index);
    let grid = evolution_grid_1d();
    let domain = random_domain_1d(grid, &mut rng)?;
    let initial = iid_field(domain.clone(), &mut rng)?;
    let steps = rng.random_range(8..=14usize);
    let forcing: Vec<GridField> = (0..steps)
        .map(|_| iid_field(domain.clone(), &mut rng))
        .collect::<Result<_>>()?;
    Ok(EvolutionInstance {
        index,
        domain,
        initial,
        forcing,
        epsilon: draw_epsilon(&mut rng),
        absorption: draw_absorption(&mut rng),
        p: draw_p(&mut rng),
        steps,
    })
}

/// Grids for the rearrangement-exactness suite.
pub fn rearrangement_grid(dim: usize) -> GridSpec {
    match dim {
        1 => make_grid(1, 3.25, 65).unwrap(),
        _ => make_grid(2, 1.7, 17).unwrap(),
    }
}

/// Random sub-box mask with iid uniform values.
fn random_subbox_field(
    grid: GridSpec,
    max_side: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GridField> {
    let n = grid.cells_per_axis();
    let mask = match grid.dim() {
        1 => {
            let len = rng.random_range(1..=max_side);
            let lo = rng.random_range(0..=(n - len));
            DomainMask::from_cells(grid, (lo..lo + len).collect())?
        }
        _ => {
            let wx = rng.random_range(1..=max_side.min(n));
            let wy = rng.random_range(1..=max_side.min(n));
            let lx = rng.random_range(0..=(n - wx));
            let ly = rng.random_range(0..=(n - wy));
            let mut cells = Vec::new();
            for j in ly..ly + wy {
                for i in lx..lx + wx {
                    cells.push(grid.flat_index([i, j]));
                }
            }
            DomainMask::from_cells(grid, cells)?
        }
    };
    iid_field(mask, rng)
}

/// Random field on a random sub-box mask with iid uniform values; `dim`
/// alternates with the index.
pub fn rearrangement_field(base_seed: u64, index: u64) -> Result<GridField> {
    let mut rng = rng_for(base_seed, index);
    let dim = if index % 2 == 0 { 1 } else { 2 };
    let max_side = if dim == 1 { 24 } else { 8 };
    random_subbox_field(rearrangement_grid(dim), max_side, &mut rng)
}

/// Pair of random fields on one grid (for the Hardy–Littlewood checks);
/// `dim` alternates with the index.
pub fn rearrangement_pair(base_seed: u64, index: u64) -> Result<(GridField, GridField)> {
    let mut rng = rng_for(base_seed ^ 0x5bf0_3635, index);
    let dim = if index % 2 == 0 { 1 } else { 2 };
    let grid = rearrangement_grid(dim);
    let max_side = if dim == 1 { 24 } else { 8 };
    let a = random_subbox_field(grid, max_side, &mut rng)?;
    let b = random_subbox_field(grid, max_side, &mut rng)?;
    Ok((a, b))
}

/// Random triple of 1D fields for the Riesz checks, kept well inside the
/// box so the full convolution is not clipped.
pub fn riesz_triple_1d(base_seed: u64, index: u64) -> Result<[GridField; 3]> {
    let mut rng = rng_for(base_seed ^ 0x00c0_ffee, index);
    let grid = make_grid(1, 4.85, 97).unwrap();
    let n = grid.cells_per_axis();
    let third = n / 3;
    let mut fields = Vec::with_capacity(3);
    for _ in 0..3 {
        let len = rng.random_range(1..=12usize);
        let lo = third + rng.random_range(0..=(third - len));
        let mask = DomainMask::from_cells(grid, (lo..lo + len).collect())?;
        fields.push(iid_field(mask, &mut rng)?);
    }
    Ok([fields[0].clone(), fields[1].clone(), fields[2].clone()])
}

/// Random radially non-increasing field: one value per radius class,
/// non-increasing outward (equal-radius cells get equal values).
pub fn radial_field(base_seed: u64, index: u64, dim: usize) -> Result<GridField> {
    let mut rng = rng_for(base_seed ^ RADIAL_STREAM, index);
    let grid = match dim {
        1 => make_grid(1, 8.0, 129).unwrap(),
        _ => make_grid(2, 2.0, 33).unwrap(),
    };
    let order = RadialOrder::new(grid);
    let classes = order.radius_classes();
    let take = rng.random_range(2..=(classes.len() / 2).max(3));
    let mut vals: Vec<f64> = (0..take).map(|_| rng.random::<f64>()).collect();
    vals.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cells = Vec::new();
    let mut dense = vec![0.0; grid.total_cells()];
    for (cls, v) in classes[..take].iter().zip(&vals) {
        for &cell in &order.cells()[cls.0..cls.1] {
            dense[cell] = *v;
            cells.push(cell);
        }
    }
    let mask = DomainMask::from_cells(grid, cells)?;
    let member_vals: Vec<f64> = mask.members().into_iter().map(|c| dense[c]).collect();
    GridField::from_member_values(mask, &member_vals)
}

const RADIAL_STREAM: u64 = 0x52ad_1a1f;

/// Ten fixed smooth 2D triples for the Riesz refinement study: offset
/// Gaussian bumps whose negative lattice excursions (if any) must shrink
/// as the grid is refined. `level` 0 is the base grid, `level` 1 halves h.
pub fn smooth_riesz_triple_2d(index: usize, level: usize) -> Result<[GridField; 3]> {
    // odd cell counts; 67 cells gives h within 1.5% of half of the 33-cell h
    let grid = match level {
        0 => make_grid(2, 2.0, 33).unwrap(),
        _ => make_grid(2, 2.0, 67).unwrap(),
    };
    let k = index as f64;
    let params: [([f64; 2], f64); 3] = [
        ([0.25 + 0.03 * k, -0.15], 0.06 + 0.005 * k),
        ([-0.3, 0.22 - 0.02 * k], 0.08),
        ([0.05 * k - 0.2, 0.3], 0.05 + 0.01 * k),
    ];
    let full = DomainMask::from_predicate(grid, |c| c[0].abs() < 0.66 && c[1].abs() < 0.66)?;
    let mut out = Vec::with_capacity(3);
    for (center, width) in params {
        let f = GridField::from_fn(full.clone(), move |c| {
            let dx = c[0] - center[0];
            let dy = c[1] - center[1];
            (-(dx * dx + dy * dy) / (2.0 * width)).exp()
        })?;
        out.push(f);
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::is_radially_nonincreasing;

    #[test]
    fn instances_are_deterministic() {
        let a = stationary_instance(42, 7, 1).unwrap();
        let b = stationary_instance(42, 7, 1).unwrap();
        assert_eq!(a.epsilon, b.epsilon);
        assert_eq!(a.domain.members(), b.domain.members());
        assert_eq!(a.forcing.values_vec(), b.forcing.values_vec());
        let c = stationary_instance(43, 7, 1).unwrap();
        assert!(a.forcing.values_vec() != c.forcing.values_vec());
    }

    #[test]
    fn radial_fields_pass_zero_tol() {
        for dim in [1, 2] {
            for idx in 0..10 {
                let f = radial_field(7, idx, dim).unwrap();
                assert!(is_radially_nonincreasing(&f, 0.0));
            }
        }
    }

    #[test]
    fn evolution_instances_well_formed() {
        let inst = evolution_instance(5, 3).unwrap();
        assert!(inst.steps >= 8);
        assert_eq!(inst.forcing.len(), inst.steps);
        assert!(inst.initial.min_value() >= 0.0);
    }
}
