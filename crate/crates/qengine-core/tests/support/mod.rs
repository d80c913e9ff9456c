//! Shared helpers for the integration-test suite: hand-tabulated closed-form
//! Drazin inverses for both engine kinds, and small comparison utilities.
//!
//! The closed-form tables are written over the reversed tensor ordering of
//! the vectorized index, so entry (p, q) [1-based] of a table corresponds to
//! entry (n - p, n - q) [0-based] of this crate's column-stacked matrices.
#![allow(dead_code)]

use num_complex::Complex64;
use qengine_core::bounds::drazin;
use qengine_core::engine::{liouvillian, occupations, CountingField, EngineKind, EngineParams};
use qengine_core::linalg::ComplexMatrix;
use qengine_core::steady::steady_numeric;

pub const BOTH_KINDS: [EngineKind; 2] = [EngineKind::Coherent, EngineKind::Incoherent];

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

/// Symmetric relative deviation |a - b| / max(|a|, |b|).
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

// ---------------------------------------------------------------------------
// Closed-form Drazin inverses
// ---------------------------------------------------------------------------

/// Closed-form Drazin inverse of the two-level (coherent-kind) generator,
/// tabulated over the reversed tensor ordering.
pub fn drazin_closed_two_level(g0: f64, nh: f64, nc: f64, a: f64) -> ComplexMatrix {
    let g1 = g0 * nc * (nh + 1.0);
    let g2 = g0 * nh * (nc + 1.0);
    let gg = g1 + g2;
    let d1 = 8.0 * a * a + gg * gg;
    let d2 = d1 * d1;
    let a2 = a * a;

    let rows = [
        [
            c((4.0 * a2 * (g1 - 3.0 * g2) - g1 * gg * gg) / d2),
            ci(2.0 * a / d1),
            ci(-2.0 * a / d1),
            c((4.0 * a2 * (3.0 * g1 - g2) + g2 * gg * gg) / d2),
        ],
        [
            ci(4.0 * a * (4.0 * a2 + (2.0 * g1 - g2) * gg) / d2),
            c(-2.0 * (4.0 * a2 + gg * gg) / (gg * d1)),
            c(-8.0 * a2 / (gg * d1)),
            ci(-4.0 * a * (4.0 * a2 - (g1 - 2.0 * g2) * gg) / d2),
        ],
        [
            ci(-4.0 * a * (4.0 * a2 + (2.0 * g1 - g2) * gg) / d2),
            c(-8.0 * a2 / (gg * d1)),
            c(-2.0 * (4.0 * a2 + gg * gg) / (gg * d1)),
            ci(4.0 * a * (4.0 * a2 - (g1 - 2.0 * g2) * gg) / d2),
        ],
        [
            c((g1 * gg * gg - 4.0 * a2 * (g1 - 3.0 * g2)) / d2),
            ci(-2.0 * a / d1),
            ci(2.0 * a / d1),
            c((4.0 * a2 * (g2 - 3.0 * g1) - g2 * gg * gg) / d2),
        ],
    ];
    let mut m = ComplexMatrix::zeros(4, 4);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m.set(i, j, *v);
        }
    }
    m
}

/// Closed-form Drazin inverse of the three-level (incoherent-kind)
/// generator, tabulated over the reversed tensor ordering. Only 33 of the
/// 81 entries are nonzero.
pub fn drazin_closed_three_level(g0: f64, nh: f64, nc: f64, a: f64) -> ComplexMatrix {
    let a2 = a * a;
    let a4 = a2 * a2;
    let g2 = g0 * g0;
    let g4 = g2 * g2;
    let nhc = nc + nh;
    let nhc2 = nhc * nhc;

    let big_d = 4.0 * a2 * (3.0 * nc + 3.0 * nh + 4.0) + g2 * nhc * (3.0 * nc * nh + nc + nh);
    let dg2 = g0 * big_d * big_d;
    let dd = big_d * big_d;
    let dcoh = 4.0 * a2 + g2 * (2.0 * nc + nh + 2.0) * (nc + 2.0 * nh + 2.0);

    let a11 = -(4.0 * a2 * g2 * (nc + nh + 2.0) * (nc * nc + 6.0 * nc * nh + nh * nh)
        + g4 * nhc2 * (nc * nc * (nh + 1.0) + nc * nh * nh + nh * nh)
        + 64.0 * a4 * (nc + nh + 2.0))
        / dg2;
    let a61 = 2.0
        * a
        * (nc - nh)
        * (g2 * (3.0 * nc * nc * (nh + 1.0)
            + nc * (3.0 * nh * (nh + 4.0) + 4.0)
            + nh * (3.0 * nh + 4.0))
            + 12.0 * a2 * (nc + nh + 2.0))
        / dd;
    let a23 = 4.0 * a / dcoh;
    let a22 = -2.0 * g0 * (nc + 2.0 * nh + 2.0) / dcoh;
    let a33 = -2.0 * g0 * (2.0 * nc + nh + 2.0) / dcoh;
    let a16 = 2.0 * a * (nc - nh) / big_d;
    let a56 = 2.0 * a * (nc + 2.0 * nh + 2.0) / big_d;
    let a96 = -2.0 * a * (2.0 * nc + nh + 2.0) / big_d;
    let a86 = -4.0 * a2 * (3.0 * nc + 3.0 * nh + 4.0) / (g0 * nhc * big_d);
    let a66 = (-4.0 * a2 * (3.0 * nc + 3.0 * nh + 4.0)
        - 2.0 * g2 * nhc * (3.0 * nc * nh + nc + nh))
        / (g0 * nhc * big_d);
    let a15 = (4.0 * a2 * g2
        * (-nc.powi(3) + (5.0 * nc + 4.0) * nh * nh + 2.0 * (nc - 2.0) * nc * nh + 2.0 * nh.powi(3))
        - g4 * nc * nhc2 * ((nc - 1.0) * nh + nc - 2.0 * nh * nh)
        + 32.0 * a4 * nhc)
        / dg2;
    let a19 = (4.0 * a2 * g2
        * (2.0 * nc.powi(3) + nc * nc * (5.0 * nh + 4.0) + 2.0 * nc * (nh - 2.0) * nh - nh.powi(3))
        + 32.0 * a4 * nhc
        + g4 * nh * nhc2 * (nc * (2.0 * nc + 1.0) - (nc + 1.0) * nh))
        / dg2;
    let a65 = 2.0
        * a
        * (4.0 * a2 * (3.0 * nc * nc + 3.0 * nc * (3.0 * nh + 4.0) + 6.0 * nh * (nh + 2.0) + 8.0)
            + g2 * (3.0 * nc.powi(3) * (nh + 1.0)
                + 3.0 * nc * nc * (3.0 * nh * (nh + 2.0) + 2.0)
                + nc * nh * (6.0 * nh * nh + 3.0 * nh + 4.0)
                - 2.0 * nh * nh))
        / dd;
    let a95 = (4.0 * a2 * g2
        * (nc * nc * (2.0 * nc + 3.0)
            + (5.0 * nc + 7.0) * nh * nh
            + (nc + 2.0) * (5.0 * nc + 4.0) * nh
            + 2.0 * nh.powi(3))
        - 16.0 * a4 * nhc
        + 2.0 * g4 * nc * (nh + 1.0) * nhc2 * (nc + nh + 1.0))
        / dg2;
    let a59 = (4.0 * a2 * g2
        * (2.0 * nc.powi(3)
            + nc * nc * (5.0 * nh + 7.0)
            + nc * (nh + 2.0) * (5.0 * nh + 4.0)
            + nh * nh * (2.0 * nh + 3.0))
        - 16.0 * a4 * nhc
        + 2.0 * g4 * (nc + 1.0) * nh * nhc2 * (nc + nh + 1.0))
        / dg2;
    let a89 = 2.0
        * a
        * (4.0 * a2 * (6.0 * nc * nc + 3.0 * nc * (3.0 * nh + 4.0) + 3.0 * nh * (nh + 4.0) + 8.0)
            + g2 * (6.0 * nc.powi(3) * nh
                + nc * nc * (9.0 * nh * nh + 3.0 * nh - 2.0)
                + nc * nh * (3.0 * nh * (nh + 6.0) + 4.0)
                + 3.0 * nh * nh * (nh + 2.0)))
        / dd;
    let a99 = -(4.0 * a2 * g2
        * ((7.0 * nc + 3.0) * nh * nh
            + 10.0 * nc * (nc + 1.0) * nh
            + nc * (nc * (4.0 * nc + 11.0) + 8.0)
            + nh.powi(3))
        + 16.0 * a4 * nhc
        + g4 * nh * nhc2 * (nc * (4.0 * nc + nh + 5.0) + nh + 2.0))
        / dg2;
    let a55 = -(4.0 * a2 * g2
        * (nc.powi(3)
            + nc * nc * (7.0 * nh + 3.0)
            + 10.0 * nc * nh * (nh + 1.0)
            + nh * (nh * (4.0 * nh + 11.0) + 8.0))
        + g4 * nc * nhc2 * ((nc + 5.0) * nh + nc + 4.0 * nh * nh + 2.0)
        + 16.0 * a4 * nhc)
        / dg2;
    let a51 = (4.0 * a2 * g2
        * (nc * (nc - nc * nc + 4.0)
            + (5.0 * nc + 1.0) * nh * nh
            + 2.0 * nc * (nc + 3.0) * nh
            + 2.0 * nh.powi(3)
            - 4.0 * nh)
        - g4 * (nc + 1.0) * nhc2 * ((nc - 1.0) * nh + nc - 2.0 * nh * nh)
        + 32.0 * a4 * (nc + nh + 2.0))
        / dg2;
    let a91 = (4.0 * a2 * g2
        * (2.0 * nc.powi(3)
            + nc * nc * (5.0 * nh + 1.0)
            + 2.0 * nc * (nh * (nh + 3.0) - 2.0)
            + nh * (nh - nh * nh + 4.0))
        + 32.0 * a4 * (nc + nh + 2.0)
        + g4 * (nh + 1.0) * nhc2 * (nc * (2.0 * nc + 1.0) - (nc + 1.0) * nh))
        / dg2;

    // (1-based row, 1-based col, value). Off-diagonal coherence columns pair
    // antisymmetrically; in particular (9,8) carries -a96, mirroring the
    // (5,8)/(5,6) and (1,8)/(1,6) pairs.
    let entries: [(usize, usize, Complex64); 33] = [
        (1, 1, c(a11)),
        (6, 1, ci(a61)),
        (8, 1, ci(-a61)),
        (2, 3, ci(a23)),
        (3, 2, ci(a23)),
        (7, 4, ci(-a23)),
        (4, 7, ci(-a23)),
        (2, 2, c(a22)),
        (4, 4, c(a22)),
        (3, 3, c(a33)),
        (7, 7, c(a33)),
        (1, 6, ci(a16)),
        (1, 8, ci(-a16)),
        (5, 6, ci(a56)),
        (5, 8, ci(-a56)),
        (9, 6, ci(a96)),
        (9, 8, ci(-a96)),
        (8, 6, c(a86)),
        (6, 8, c(a86)),
        (6, 6, c(a66)),
        (8, 8, c(a66)),
        (1, 5, c(a15)),
        (1, 9, c(a19)),
        (6, 5, ci(a65)),
        (8, 5, ci(-a65)),
        (9, 5, c(a95)),
        (5, 9, c(a59)),
        (8, 9, ci(a89)),
        (6, 9, ci(-a89)),
        (9, 9, c(a99)),
        (5, 5, c(a55)),
        (5, 1, c(a51)),
        (9, 1, c(a91)),
    ];
    let mut m = ComplexMatrix::zeros(9, 9);
    for (p, q, v) in entries {
        m.set(p - 1, q - 1, v);
    }
    m
}

/// Numeric Drazin inverse vs the closed-form table, entrywise through the
/// index-reversal map.
pub fn assert_drazin_matches_closed(p: &EngineParams, tol: f64) {
    let l0 = liouvillian(p, CountingField::zero());
    let rho = steady_numeric(&l0).expect("steady state");
    let lp = drazin(&l0, &rho).expect("drazin inverse");
    let occ = occupations(p);
    let table = match p.kind {
        EngineKind::Coherent => drazin_closed_two_level(p.gamma0, occ.n_h, occ.n_c, p.alpha),
        EngineKind::Incoherent => drazin_closed_three_level(p.gamma0, occ.n_h, occ.n_c, p.alpha),
    };
    let n = lp.rows();
    for pi in 1..=n {
        for qi in 1..=n {
            let dev = (table.get(pi - 1, qi - 1) - lp.get(n - pi, n - qi)).norm();
            assert!(
                dev <= tol,
                "drazin entry ({pi},{qi}) deviates by {dev:.3e} from the closed form for {p:?}"
            );
        }
    }
}
