#![allow(dead_code)]

use std::collections::HashMap;

use ndarray::Array2;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use nnagg::data::{Polynomial, NUM_VARS};
use nnagg::nn::{Activation, LossKind, Mlp, MlpSpec};

pub const HIDDEN: [Activation; 4] = [
    Activation::Relu,
    Activation::Tanh,
    Activation::Sigmoid,
    Activation::Identity,
];

/// Small random architecture. Sigmoid outputs pair with cross-entropy.
pub fn random_spec(rng: &mut ChaCha8Rng) -> (MlpSpec, LossKind) {
    let input = rng.random_range(1..=5);
    let depth = rng.random_range(0..=3);
    let hidden = (0..depth)
        .map(|_| (rng.random_range(1..=6), HIDDEN[rng.random_range(0..HIDDEN.len())]))
        .collect();
    let classify = rng.random_bool(0.5);
    let (output, act, loss) = if classify {
        (1, Activation::Sigmoid, LossKind::Bce)
    } else {
        (rng.random_range(1..=3), Activation::Identity, LossKind::Mse)
    };
    (MlpSpec::new(input, hidden, output, act).unwrap(), loss)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(lo..hi))
}

pub fn random_batch(
    rng: &mut ChaCha8Rng,
    spec: &MlpSpec,
    loss: LossKind,
    rows: usize,
) -> (Array2<f64>, Array2<f64>) {
    let x = random_matrix(rng, rows, spec.input_dim, -2.0, 2.0);
    let y = match loss {
        LossKind::Bce => Array2::from_shape_fn((rows, spec.output_dim), |_| {
            if rng.random_bool(0.5) { 1.0 } else { 0.0 }
        }),
        LossKind::Mse => random_matrix(rng, rows, spec.output_dim, -2.0, 2.0),
    };
    (x, y)
}

/// True when some ReLU pre-activation sits within `margin` of its kink,
/// where central differences are meaningless.
pub fn near_relu_kink(mlp: &Mlp, x: &Array2<f64>, margin: f64) -> bool {
    let mut a = x.clone();
    for (l, layer) in mlp.layers().iter().enumerate() {
        let z = a.dot(&mlp.weights(l).t()) + &mlp.biases(l);
        if layer.activation == Activation::Relu && z.iter().any(|v| v.abs() < margin) {
            return true;
        }
        a = z.mapv(|v| layer.activation.apply(v));
    }
    false
}

/// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)` over
/// all parameters, with central differences of step `h`.
pub fn gradient_error(mlp: &Mlp, x: &Array2<f64>, y: &Array2<f64>, loss: LossKind, h: f64, floor: f64) -> f64 {
    let analytic = mlp.gradients(x.view(), y.view(), loss).unwrap();
    let mut probe = mlp.clone();
    let mut worst: f64 = 0.0;
    for i in 0..mlp.param_count() {
        let orig = mlp.params()[i];
        probe.params_mut()[i] = orig + h;
        let up = nnagg::nn::loss(probe.forward(x.view()).unwrap().view(), y.view(), loss).unwrap();
        probe.params_mut()[i] = orig - h;
        let down = nnagg::nn::loss(probe.forward(x.view()).unwrap().view(), y.view(), loss).unwrap();
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

/// `v` as an exact `mantissa · 2^exp`.
fn dyadic(v: f64) -> (BigInt, i64) {
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if exp == 0 { (frac << 1, -1075) } else { (frac | 1 << 52, exp - 1075) };
    let m = BigInt::from(mant);
    (if v.is_sign_negative() { -m } else { m }, exp)
}

/// Exact dyadic sum of `parts`, returned as `(mantissa, exp)`.
fn exact_sum(parts: &[(BigInt, i64)]) -> (BigInt, i64) {
    let low = parts.iter().map(|p| p.1).min().unwrap_or(0);
    let total = parts.iter().fold(BigInt::zero(), |acc, (m, e)| acc + (m << (e - low) as usize));
    (total, low)
}

/// Value of `p` at `x` computed exactly in big-integer arithmetic, by
/// enumerating every exponent vector up to the degree in its own order and
/// multiplying factors out by hand.
pub fn exact_eval(p: &Polynomial, x: &[f64]) -> (BigInt, i64) {
    let coeffs: HashMap<[u32; NUM_VARS], f64> =
        p.terms().iter().map(|t| (t.exponents, t.coeff)).collect();
    let xs: Vec<(BigInt, i64)> = x.iter().map(|&v| dyadic(v)).collect();
    let mut terms = Vec::new();
    let mut exps = [0u32; NUM_VARS];
    enumerate(0, p.degree(), &mut exps, &mut |e| {
        if let Some(&c) = coeffs.get(e) {
            let (mut m, mut k) = dyadic(c);
            for ((xm, xk), &n) in xs.iter().zip(e) {
                for _ in 0..n {
                    m *= xm;
                    k += xk;
                }
            }
            terms.push((m, k));
        }
    });
    exact_sum(&terms)
}

/// `|approx - exact| / |exact|`, computed without rounding the difference.
pub fn relative_error(approx: f64, exact: &(BigInt, i64)) -> f64 {
    let (diff, _) = exact_sum(&[dyadic(approx), (-exact.0.clone(), exact.1)]);
    let (whole, _) = exact_sum(&[(BigInt::zero(), dyadic(approx).1), exact.clone()]);
    if whole.is_zero() {
        return if diff.is_zero() { 0.0 } else { f64::INFINITY };
    }
    let shift = diff.bits().max(whole.bits()).saturating_sub(900) as usize;
    ((diff >> shift).to_f64().unwrap() / (whole >> shift).to_f64().unwrap()).abs()
}

fn enumerate(var: usize, left: u32, exps: &mut [u32; NUM_VARS], visit: &mut impl FnMut(&[u32; NUM_VARS])) {
    if var == NUM_VARS {
        visit(exps);
        return;
    }
    for k in 0..=left {
        exps[var] = k;
        enumerate(var + 1, left - k, exps, visit);
    }
    exps[var] = 0;
}

/// Number of monomials in `NUM_VARS` variables of degree `<= d`.
pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
