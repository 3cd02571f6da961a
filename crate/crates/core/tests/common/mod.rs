//! Reference values computed without the library's own formulas.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

/// A one-dimensional step field: half-open pieces plus single-point
/// overrides.
pub struct Steps {
    pub pieces: Vec<(f64, f64, i64)>,
    pub points: Vec<(f64, i64)>,
}

impl Steps {
    pub fn label(&self, x: f64) -> i64 {
        if let Some((_, l)) = self.points.iter().find(|(p, _)| *p == x) {
            return *l;
        }
        let last = self.pieces.len() - 1;
        self.pieces
            .iter()
            .enumerate()
            .find(|(i, (a, b, _))| x >= *a && (x < *b || (*i == last && x <= *b)))
            .map(|(_, (_, _, l))| *l)
            .expect("x in domain")
    }

    /// Distance from `x` to the nearest point of the domain labelled
    /// differently.
    pub fn h(&self, x: f64) -> f64 {
        let own = self.label(x);
        let mut best = f64::INFINITY;
        for (a, b, l) in &self.pieces {
            if *l != own {
                best = best.min((a - x).max(x - b).max(0.0));
            }
        }
        for (p, l) in &self.points {
            if *l != own {
                best = best.min((p - x).abs());
            }
        }
        best
    }

    /// Midpoint rule on `cells` cells; exact on linear pieces.
    pub fn stability(&self, cells: usize) -> f64 {
        let (lo, hi) = (self.pieces[0].0, self.pieces.last().unwrap().1);
        let w = (hi - lo) / cells as f64;
        (0..cells).map(|i| self.h(lo + (i as f64 + 0.5) * w)).sum::<f64>() * w
    }
}

pub fn f1_steps() -> Steps {
    Steps {
        pieces: vec![(-1.0, 0.0, -1), (0.0, 1.0, 1)],
        points: vec![],
    }
}

pub fn f2_steps() -> Steps {
    Steps {
        pieces: vec![(-1.0, 0.0, -1), (0.0, 1.0, 1)],
        points: vec![(-0.5, 1), (0.5, -1)],
    }
}

pub fn f4_steps() -> Steps {
    Steps {
        pieces: vec![(-1.0, -0.5, -1), (-0.5, 1.0, 1)],
        points: vec![],
    }
}

fn ln_big(b: &BigUint) -> f64 {
    let bits = b.bits();
    if bits <= 1000 {
        b.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (b >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn product(mut k: u64, step: u64) -> BigUint {
    let mut acc = BigUint::one();
    while k > 1 {
        acc *= k;
        k = k.saturating_sub(step);
    }
    acc
}

/// `ln Γ(n/2 + 1)` from exact factorials and double factorials.
pub fn ln_gamma_half_plus_one(n: u64) -> f64 {
    let ln_pi = std::f64::consts::PI.ln();
    if n.is_multiple_of(2) {
        ln_big(&product(n / 2, 1))
    } else {
        // Γ(k + 3/2) = (2k+1)!! sqrt(pi) / 2^(k+1)
        let k = (n - 1) / 2;
        ln_big(&product(2 * k + 1, 2)) - (k + 1) as f64 * std::f64::consts::LN_2 + 0.5 * ln_pi
    }
}

/// `2 Γ(n/2+1)^(1/n) / sqrt(pi)`.
pub fn ratio_oracle(n: u64) -> f64 {
    let ln_pi = std::f64::consts::PI.ln();
    (std::f64::consts::LN_2 + ln_gamma_half_plus_one(n) / n as f64 - 0.5 * ln_pi).exp()
}

/// Unit ball volume by `V_n = V_{n-2} 2π / n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// `∫_{|x|<R} (R - |x|) dx` by composite Simpson in the radius.
pub fn ball_stability_quadrature(n: usize, r: f64) -> f64 {
    let area = n as f64 * unit_ball_volume(n);
    simpson(|t| (r - t) * area * t.powi(n as i32 - 1), 0.0, r, 20_000)
}

/// `∫_{[-a,a]^n} dist(x, boundary) dx = ∫_0^a (2(a - t))^n dt`.
pub fn cube_stability_quadrature(n: usize, a: f64) -> f64 {
    simpson(|t| (2.0 * (a - t)).powi(n as i32), 0.0, a, 20_000)
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
