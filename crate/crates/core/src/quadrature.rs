//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae and weights on [-1, 1]; every other node is a Gauss node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[lo, hi]` until the summed error estimate drops below
/// `abs_tol`. The interval with the largest error is bisected first.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, abs_tol: f64) -> Quadrature {
    integrate_panels(f, lo, hi, 1, abs_tol)
}

/// Same as [`integrate`] but starts from `panels` equal subintervals, which
/// keeps the error estimate honest for long oscillatory ranges.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    panels: usize,
    abs_tol: f64,
) -> Quadrature {
    if lo == hi {
        return Quadrature { value: 0.0, error_estimate: 0.0, intervals: 0 };
    }
    let panels = panels.max(1);
    let width = (hi - lo) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(2 * panels);
    let mut total_err = 0.0;
    for i in 0..panels {
        let a = lo + width * i as f64;
        let b = if i + 1 == panels { hi } else { lo + width * (i + 1) as f64 };
        let (value, error) = kronrod15(&f, a, b);
        total_err += error;
        heap.push(Piece { lo: a, hi: b, value, error });
    }
    let mut settled = Vec::new();
    while total_err > abs_tol && heap.len() < MAX_INTERVALS {
        let Some(piece) = heap.pop() else { break };
        let mid = 0.5 * (piece.lo + piece.hi);
        if piece.error == 0.0 {
            heap.push(piece);
            break;
        }
        if !(mid > piece.lo.min(piece.hi) && mid < piece.lo.max(piece.hi)) {
            // cannot be split any further in floating point
            total_err -= piece.error;
            settled.push(Piece { error: 0.0, ..piece });
            continue;
        }
        let (v1, e1) = kronrod15(&f, piece.lo, mid);
        let (v2, e2) = kronrod15(&f, mid, piece.hi);
        total_err += e1 + e2 - piece.error;
        heap.push(Piece { lo: piece.lo, hi: mid, value: v1, error: e1 });
        heap.push(Piece { lo: mid, hi: piece.hi, value: v2, error: e2 });
    }
    settled.extend(heap);
    // sum in a fixed order so the result does not depend on the refinement path
    settled.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = settled.iter().map(|p| p.value).sum();
    let error_estimate = settled.iter().map(|p| p.error).sum();
    Quadrature { value, error_estimate, intervals: settled.len() }
}
