//! Scalar and cumulative quadrature rules.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("quadrature budget exhausted after {evaluations} evaluations (error estimate {error:.3e})")]
pub struct QuadBudgetError {
    pub best: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

const MAX_INTERVALS: usize = 1 << 14;

// Gauss–Kronrod 7/15 abscissae and weights on [−1, 1] (non-negative half).
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
// Gauss weights for the 7-point rule at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let k = kronrod * h;
    let g = gauss * h;
    (k, (k - g).norm())
}

/// Globally adaptive G7K15 quadrature of a complex integrand on `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `tol · max(1, |I|)`.
pub fn adaptive_gauss_kronrod<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Complex64, QuadBudgetError>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !(total.is_finite() && err.is_finite()) {
            return Err(QuadBudgetError { best: total, error: err, evaluations });
        }
        if err <= tol * total.norm().max(1.0) {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(QuadBudgetError { best: total, error: err, evaluations });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (vl, el) = gk15(&mut f, lo, mid);
        let (vr, er) = gk15(&mut f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, vl, el));
        intervals.push((mid, hi, vr, er));
    }
}

/// `n`-point Gauss–Legendre nodes and weights on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre panel rule with a cumulative integration matrix.
///
/// For nodes `ξ_i` and Lagrange basis `ℓ_k`, `cumulative[i][k] = ∫_{−1}^{ξ_i} ℓ_k`,
/// so the running integral of an interpolated integrand at every node is one
/// matrix–vector product.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub cumulative: Vec<Vec<f64>>,
}

impl PanelRule {
    pub fn new(p: usize) -> Self {
        let (nodes, weights) = gauss_legendre(p);
        let cumulative = nodes
            .iter()
            .map(|&xi| {
                let half = 0.5 * (xi + 1.0);
                let mid = 0.5 * (xi - 1.0);
                (0..p)
                    .map(|k| {
                        nodes
                            .iter()
                            .zip(&weights)
                            .map(|(&y, &w)| w * lagrange(&nodes, k, half * y + mid))
                            .sum::<f64>()
                            * half
                    })
                    .collect()
            })
            .collect();
        Self { nodes, weights, cumulative }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn lagrange(nodes: &[f64], k: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &xj)| (x - xj) / (nodes[k] - xj))
        .product()
}
