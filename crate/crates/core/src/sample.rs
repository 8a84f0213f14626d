//! Chart-point sampling, tolerances and residual bookkeeping.

use crate::error::{Error, Result};
use crate::exprlang::{BinOp, Expr};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_ATOL: f64 = 1e-8;
pub const DEFAULT_RTOL: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 32;
pub const DEFAULT_SEED: u64 = 42;
/// Non-degeneracy threshold for metric determinants.
pub const DET_FLOOR: f64 = 1e-10;

/// Absolute + relative tolerance pair.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { atol: DEFAULT_ATOL, rtol: DEFAULT_RTOL }
    }
}

impl Tol {
    pub fn absolute(atol: f64) -> Tol {
        Tol { atol, rtol: 0.0 }
    }

    /// Is `residual` negligible against a quantity of magnitude `scale`?
    pub fn ok(&self, residual: f64, scale: f64) -> bool {
        residual.is_finite() && residual <= self.atol + self.rtol * scale.abs()
    }
}

/// A fixed batch of chart points drawn uniformly from the chart box with a
/// seeded generator, so every run sees the same points.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
}

impl Sampler {
    pub fn uniform(lo: &[f64], hi: &[f64], count: usize, seed: u64) -> Result<Sampler> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidChart("bounds arrays must match and be non-empty".into()));
        }
        for (i, (&a, &b)) in lo.iter().zip(hi).enumerate() {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidChart(format!(
                    "coordinate {i}: invalid bounds [{a}, {b}]"
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| {
                lo.iter().zip(hi).map(|(&a, &b)| rng.gen_range(a..b)).collect::<Vec<f64>>()
            })
            .collect();
        Ok(Sampler { points, seed })
    }

    /// A fresh generator derived from the sampler's seed, for auxiliary
    /// random data (section coefficients, pair choices) that must stay
    /// deterministic per instance.
    pub fn derived_rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt))
    }
}

/// Tracks the largest residual seen, with a deterministic witness: the first
/// point/description at which the maximum was attained.
#[derive(Debug, Clone)]
pub struct Residuals {
    pub max: f64,
    pub witness_point: Option<Vec<f64>>,
    pub witness_desc: Option<String>,
}

impl Residuals {
    pub fn new() -> Residuals {
        Residuals { max: 0.0, witness_point: None, witness_desc: None }
    }

    pub fn record(&mut self, point: &[f64], desc: impl Fn() -> String, value: f64) {
        let v = if value.is_finite() { value } else { f64::INFINITY };
        if v > self.max || self.witness_point.is_none() {
            self.max = self.max.max(v);
            if v >= self.max {
                self.witness_point = Some(point.to_vec());
                self.witness_desc = Some(desc());
            }
        }
    }

    pub fn merge(&mut self, other: &Residuals) {
        if other.max > self.max || self.witness_point.is_none() {
            self.max = self.max.max(other.max);
            self.witness_point = other.witness_point.clone();
            self.witness_desc = other.witness_desc.clone();
        }
    }
}

impl Default for Residuals {
    fn default() -> Self {
        Self::new()
    }
}

/// Random low-degree polynomial expression with small dyadic coefficients.
/// Used to generate the non-constant probe sections the identity suites need;
/// dyadic coefficients keep printed forms exact.
pub fn random_polynomial(rng: &mut impl Rng, names: &[String]) -> Expr {
    let coeff = |rng: &mut dyn rand::RngCore| -> Expr {
        let k: i32 = rng.gen_range(-8..=8);
        let v = f64::from(k) / 16.0;
        if v < 0.0 {
            Expr::Unary(crate::exprlang::UnaryOp::Neg, Box::new(Expr::Number(-v)))
        } else {
            Expr::Number(v)
        }
    };
    // c0 + Σ c_i x_i + c_q · x_a·x_b for one random pair (a, b).
    let mut acc = coeff(rng);
    for name in names {
        let term = Expr::Binary(
            BinOp::Mul,
            Box::new(coeff(rng)),
            Box::new(Expr::Var(name.clone())),
        );
        acc = Expr::Binary(BinOp::Add, Box::new(acc), Box::new(term));
    }
    let a = rng.gen_range(0..names.len());
    let b = rng.gen_range(0..names.len());
    let quad = Expr::Binary(
        BinOp::Mul,
        Box::new(coeff(rng)),
        Box::new(Expr::Binary(
            BinOp::Mul,
            Box::new(Expr::Var(names[a].clone())),
            Box::new(Expr::Var(names[b].clone())),
        )),
    );
    Expr::Binary(BinOp::Add, Box::new(acc), Box::new(quad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_in_box() {
        let a = Sampler::uniform(&[0.5, -1.0], &[2.0, 1.0], 32, 42).unwrap();
        let b = Sampler::uniform(&[0.5, -1.0], &[2.0, 1.0], 32, 42).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.points.len(), 32);
        for p in &a.points {
            assert!(p[0] >= 0.5 && p[0] < 2.0);
            assert!(p[1] >= -1.0 && p[1] < 1.0);
        }
        let c = Sampler::uniform(&[0.5, -1.0], &[2.0, 1.0], 32, 43).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn invalid_boxes_are_rejected() {
        assert!(Sampler::uniform(&[1.0], &[1.0], 4, 0).is_err());
        assert!(Sampler::uniform(&[2.0], &[1.0], 4, 0).is_err());
    }

    #[test]
    fn residual_tracker_keeps_first_maximum() {
        let mut r = Residuals::new();
        r.record(&[0.0], || "a".into(), 1.0);
        r.record(&[1.0], || "b".into(), 0.5);
        assert_eq!(r.max, 1.0);
        assert_eq!(r.witness_desc.as_deref(), Some("a"));
    }

    #[test]
    fn random_polynomial_round_trips_through_printer() {
        let names = vec!["x".to_string(), "y".to_string()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let e = random_polynomial(&mut rng, &names);
            let reparsed = crate::exprlang::parse(&e.to_string(), &names).unwrap();
            assert_eq!(reparsed, e);
        }
    }
}
