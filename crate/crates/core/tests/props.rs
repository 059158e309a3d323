//! Property tests for the rearrangement and grid invariants.

use proptest::prelude::*;
use talenti_core::grid::{lp_norm, make_grid, DomainMask, GridField};
use talenti_core::kernel::{convolve, ConvMode};
use talenti_core::rearrange::{
    check_equimeasurable, hardy_littlewood_gap, schwarz_rearrange,
};

fn field_1d(values: Vec<f64>) -> GridField {
    let n = (2 * values.len() + 1).max(5);
    let g = make_grid(1, n as f64 / 2.0, n).unwrap();
    let mask = DomainMask::from_cells(g, (0..values.len()).collect()).unwrap();
    GridField::from_member_values(mask, &values).unwrap()
}

proptest! {
    #[test]
    fn rearrangement_preserves_norms_and_multiset(
        values in prop::collection::vec(0.0f64..100.0, 1..40),
        p in prop_oneof![Just(1.0f64), Just(2.0), Just(3.5), Just(f64::INFINITY)],
    ) {
        let f = field_1d(values);
        let star = schwarz_rearrange(&f).unwrap();
        prop_assert!(check_equimeasurable(&f, &star));
        let a = lp_norm(&f, p).unwrap();
        let b = lp_norm(&star, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn rearrangement_idempotent(values in prop::collection::vec(0.0f64..10.0, 1..30)) {
        let f = field_1d(values);
        let once = schwarz_rearrange(&f).unwrap();
        let twice = schwarz_rearrange(&once).unwrap();
        for c in 0..f.grid().total_cells() {
            prop_assert_eq!(once.value(c).to_bits(), twice.value(c).to_bits());
        }
    }

    #[test]
    fn norm_ignores_sign(values in prop::collection::vec(-10.0f64..10.0, 1..30),
                         p in prop_oneof![Just(1.0f64), Just(2.0), Just(f64::INFINITY)]) {
        let f = field_1d(values);
        let abs = f.map(f64::abs).unwrap();
        prop_assert_eq!(
            lp_norm(&f, p).unwrap().to_bits(),
            lp_norm(&abs, p).unwrap().to_bits()
        );
    }

    #[test]
    fn hardy_littlewood_nonnegative_vs_bruteforce(
        a in prop::collection::vec(0.0f64..5.0, 1..8),
        b in prop::collection::vec(0.0f64..5.0, 1..8),
    ) {
        // pad to a common grid
        let n = a.len().max(b.len());
        let g = make_grid(1, (2 * n + 1) as f64 / 2.0, 2 * n + 1).unwrap();
        let mask = DomainMask::from_cells(g, (0..n).collect()).unwrap();
        let mut av = a.clone();
        av.resize(n, 0.0);
        let mut bv = b.clone();
        bv.resize(n, 0.0);
        let f1 = GridField::from_member_values(mask.clone(), &av).unwrap();
        let f2 = GridField::from_member_values(mask, &bv).unwrap();
        let gap = hardy_littlewood_gap(&f1, &f2).unwrap();
        let scale: f64 = av.iter().sum::<f64>() * bv.iter().fold(0.0f64, |m, v| m.max(*v));
        prop_assert!(gap >= -1e-12 * scale.max(1.0));

        // brute force: the rearranged integral is the sorted-descending pairing
        let mut sa = av.clone();
        let mut sb = bv.clone();
        sa.sort_unstable_by(|x, y| y.total_cmp(x));
        sb.sort_unstable_by(|x, y| y.total_cmp(x));
        let rhs: f64 = sa.iter().zip(&sb).map(|(x, y)| x * y).sum();
        let lhs: f64 = av.iter().zip(&bv).map(|(x, y)| x * y).sum();
        prop_assert!((gap - (rhs - lhs)).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn norm_equals_rearranged_absolute_value(
        values in prop::collection::vec(-10.0f64..10.0, 1..30),
        p in prop_oneof![Just(1.0f64), Just(2.0), Just(f64::INFINITY)],
    ) {
        // |v|_p = |(|v|)*|_p for sign-changing fields
        let v = field_1d(values);
        let star = schwarz_rearrange(&v.map(f64::abs).unwrap()).unwrap();
        let a = lp_norm(&v, p).unwrap();
        let b = lp_norm(&star, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn table_roundtrip(values in prop::collection::vec(-1e12f64..1e12, 1..25)) {
        let f = field_1d(values);
        let mut buf = Vec::new();
        f.write_table(&mut buf).unwrap();
        let back = GridField::read_table(*f.grid(), &mut buf.as_slice()).unwrap();
        for c in 0..f.grid().total_cells() {
            prop_assert_eq!(f.value(c).to_bits(), back.value(c).to_bits());
        }
    }

    #[test]
    fn order_preserving(values in prop::collection::vec(0.0f64..10.0, 1..25),
                        bumps in prop::collection::vec(0.0f64..3.0, 1..25)) {
        let n = values.len().min(bumps.len());
        let f = field_1d(values[..n].to_vec());
        let g_vals: Vec<f64> = values[..n]
            .iter()
            .zip(&bumps[..n])
            .map(|(v, b)| v + b)
            .collect();
        let g = field_1d(g_vals);
        let fs = schwarz_rearrange(&f).unwrap();
        let gs = schwarz_rearrange(&g).unwrap();
        for c in 0..f.grid().total_cells() {
            prop_assert!(fs.value(c) <= gs.value(c) + 1e-15);
        }
    }
}

#[test]
fn riesz_gap_matches_bruteforce_triple_sum() {
    // independent oracle: evaluate both sides of the Riesz inequality by
    // naked triple loops over all cells
    use talenti_core::rearrange::{riesz_gap, schwarz_rearrange};
    let g = make_grid(1, 6.5, 13).unwrap();
    let triple_sum = |f1: &GridField, f2: &GridField, f3: &GridField| -> f64 {
        let n = g.total_cells() as isize;
        let c = (n - 1) / 2;
        let mut s = 0.0;
        for x in 0..n {
            for y in 0..n {
                let d = x - y + c;
                if d >= 0 && d < n {
                    s += f1.value(x as usize) * f2.value(d as usize) * f3.value(y as usize);
                }
            }
        }
        s * g.h() * g.h()
    };
    let mut state = 0x1234_5678_9abc_def0u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..50 {
        let mut fields = Vec::new();
        for _ in 0..3 {
            let len = 1 + (next() * 5.0) as usize; // supports of <= 5 cells
            let lo = (next() * (13 - len) as f64) as usize;
            let mask = DomainMask::from_cells(g, (lo..lo + len).collect()).unwrap();
            let vals: Vec<f64> = (0..len).map(|_| next()).collect();
            fields.push(GridField::from_member_values(mask, &vals).unwrap());
        }
        let gap = riesz_gap(&fields[0], &fields[1], &fields[2]).unwrap();
        let lhs = triple_sum(&fields[0], &fields[1], &fields[2]);
        let s1 = schwarz_rearrange(&fields[0]).unwrap();
        let s2 = schwarz_rearrange(&fields[1]).unwrap();
        let s3 = schwarz_rearrange(&fields[2]).unwrap();
        let rhs = triple_sum(&s1, &s2, &s3);
        assert!(
            (gap - (rhs - lhs)).abs() <= 1e-13 * (rhs.abs() + lhs.abs()).max(1.0),
            "gap {gap} vs brute force {}",
            rhs - lhs
        );
    }
}

#[test]
fn convolution_ignores_poisoned_out_of_mask_storage() {
    // zero-extension: out-of-mask storage (even NaN) never reaches results
    let g = make_grid(2, 2.5, 11).unwrap();
    let mask = DomainMask::from_predicate(g, |c| c[0].abs() < 1.0 && c[1].abs() < 1.0).unwrap();
    let clean = GridField::from_fn(mask.clone(), |c| 1.0 + c[0] + 2.0 * c[1]).unwrap();
    let mut dirty_vals = vec![f64::NAN; g.total_cells()];
    for c in mask.members() {
        dirty_vals[c] = clean.value(c);
    }
    let dirty = GridField::with_raw_storage(mask.clone(), dirty_vals).unwrap();
    let ker = GridField::from_fn(
        DomainMask::from_predicate(g, |c| c[0].abs() <= 0.5 && c[1].abs() <= 0.5).unwrap(),
        |_| 0.25,
    )
    .unwrap();
    let e = DomainMask::from_predicate(g, |c| c[0] > -0.6).unwrap();
    for mode in [ConvMode::Full, ConvMode::Restricted(&e)] {
        let a = convolve(&ker, &clean, mode).unwrap();
        let b = convolve(&ker, &dirty, mode).unwrap();
        for c in 0..g.total_cells() {
            assert_eq!(a.value(c).to_bits(), b.value(c).to_bits());
        }
    }
}
