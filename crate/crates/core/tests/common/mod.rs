#![allow(dead_code)]

use gaussrisk::data::seeded_rng;
use gaussrisk::{ClassMoments, Dataset, Label, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    seeded_rng(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| normal(rng)).collect()
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite 20-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + h / 2.0;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + h / 2.0 * xi);
        }
        total += s * h / 2.0;
    }
    total
}

fn density(t: f64) -> f64 {
    (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF by quadrature of the density. Far-tail arguments are
/// integrated up from −40 so small values keep their relative accuracy.
pub fn cdf_oracle(x: f64) -> f64 {
    let panels = |len: f64| (len / 0.05).ceil().max(1.0) as usize;
    if x < -6.0 {
        integrate(density, -40.0, x, panels(x + 40.0))
    } else if x > 6.0 {
        1.0 - cdf_oracle(-x)
    } else {
        0.5 + integrate(density, 0.0, x, panels(x.abs()))
    }
}

/// Random SPD matrix `AAᵀ/d + s·I`.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize, ridge: f64) -> Matrix<f64> {
    let a = Matrix::from_fn(d, d, |_, _| normal(rng));
    let mut m = a
        .matmul(&a.transpose())
        .unwrap()
        .scaled(1.0 / d as f64)
        .add_scaled(ridge, &Matrix::identity(d))
        .unwrap();
    for i in 0..d {
        for j in 0..i {
            let v = m[(j, i)];
            m[(i, j)] = v;
        }
    }
    m
}

pub fn random_moments(rng: &mut ChaCha8Rng, d: usize, prior_pos: f64, mean_scale: f64) -> ClassMoments<f64> {
    let mu_pos = normal_vec(rng, d).into_iter().map(|v| v * mean_scale).collect();
    let mu_neg = normal_vec(rng, d).into_iter().map(|v| v * mean_scale).collect();
    let sp = random_spd(rng, d, 0.5);
    let sn = random_spd(rng, d, 0.5);
    ClassMoments::new(mu_pos, mu_neg, sp, sn, prior_pos, 1.0 - prior_pos).unwrap()
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset<f64> {
    loop {
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.random_bool(0.5) { Label::Positive } else { Label::Negative })
            .collect();
        if !labels.iter().any(|l| l.is_positive()) || labels.iter().all(|l| l.is_positive()) {
            continue;
        }
        let shift: Vec<f64> = normal_vec(rng, d);
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .map(|l| {
                let s = if l.is_positive() { 0.5 } else { -0.5 };
                (0..d).map(|j| normal(rng) + s * shift[j]).collect()
            })
            .collect();
        return Dataset::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
    }
}

/// Central differences of `f` at `w` with step `h`.
pub fn finite_gradient(f: impl Fn(&[f64]) -> f64, w: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; w.len()];
    let mut x = w.to_vec();
    for i in 0..w.len() {
        x[i] = w[i] + h;
        let up = f(&x);
        x[i] = w[i] - h;
        let down = f(&x);
        x[i] = w[i];
        g[i] = (up - down) / (2.0 * h);
    }
    g
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or 0 when both vanish.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Mean pairwise hinge `max{0, 1 − (s⁺ − s⁻)}` and its gradient, pair by pair.
pub fn hinge_brute_force(w: &[f64], ds: &Dataset<f64>) -> (f64, Vec<f64>) {
    let d = ds.d();
    let pos: Vec<usize> = (0..ds.n()).filter(|&i| ds.labels()[i].is_positive()).collect();
    let neg: Vec<usize> = (0..ds.n()).filter(|&i| !ds.labels()[i].is_positive()).collect();
    let score = |i: usize| dot(w, ds.row(i));
    let mut value = 0.0;
    let mut grad = vec![0.0; d];
    for &i in &pos {
        for &j in &neg {
            let margin = 1.0 - (score(i) - score(j));
            if margin > 0.0 {
                value += margin;
                for (k, g) in grad.iter_mut().enumerate() {
                    *g += ds.row(j)[k] - ds.row(i)[k];
                }
            }
        }
    }
    let pairs = (pos.len() * neg.len()) as f64;
    (value / pairs, grad.into_iter().map(|g| g / pairs).collect())
}

/// Strict WMW AUC by enumerating every pair.
pub fn auc_brute_force(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0u64;
    for &p in pos {
        for &q in neg {
            if p > q {
                wins += 1;
            }
        }
    }
    wins as f64 / (pos.len() * neg.len()) as f64
}
