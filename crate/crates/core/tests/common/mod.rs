#![allow(dead_code)]

use pcgauge::{Element, Group};
use rand::Rng;
use rand_distr::StandardNormal;

pub const GROUPS: [Group; 4] = [Group::RPlus, Group::U1, Group::Su2, Group::ZMod(5)];
pub const COMPACT_GROUPS: [Group; 3] = [Group::U1, Group::Su2, Group::ZMod(5)];

/// Haar sample on compact groups, `exp(N(0, 1))` on ℝ₊*.
pub fn random_element<R: Rng + ?Sized>(g: Group, rng: &mut R) -> Element {
    match g {
        Group::RPlus => Element::rplus(rng.sample::<f64, _>(StandardNormal).exp()).unwrap(),
        _ => g.haar_sample(rng).unwrap(),
    }
}

/// An element at distance `eps` from the identity in a random direction.
/// Finite groups get a random non-identity element.
pub fn small_element<R: Rng + ?Sized>(g: Group, eps: f64, rng: &mut R) -> Element {
    if let Group::ZMod(m) = g {
        return Element::zmod(m, rng.random_range(1..m as i64)).unwrap();
    }
    let v: Vec<f64> = (0..g.lie_dim()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v: Vec<f64> = v.iter().map(|x| x / norm * eps).collect();
    g.exp_coords(&v).unwrap()
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the two-sample statistic.
pub fn ks_critical_two(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// 1% critical value of the one-sample statistic.
pub fn ks_critical_one(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
