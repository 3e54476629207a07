#![allow(dead_code)]

use coherence_control::{
    dt1_exact, dt3_solve, BlochState, Error, ModelParams, SynthesisProblem, SynthesisResult,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the closed unit ball.
pub fn ball_state(rng: &mut TestRng) -> BlochState {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return BlochState::new(v[0], v[1], v[2]).unwrap();
        }
    }
}

/// `(γ, c, p)` with `0.05 < c < p − 0.05 < 0.95` and `γ ∈ [0.01, 1]`.
pub fn model_triple(rng: &mut TestRng) -> (f64, f64, f64) {
    let gamma = rng.gen_range(0.01..=1.0);
    let c = rng.gen_range(0.0501..0.85);
    let p = rng.gen_range(c + 0.0501..0.9999);
    (gamma, c, p)
}

/// State with purity `p`, coherence `c`, random phase and random sign of vz.
pub fn state_with(rng: &mut TestRng, c: f64, p: f64) -> BlochState {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    BlochState::from_purity_coherence(p, c, theta, rng.gen_bool(0.5)).unwrap()
}

/// A random field magnitude in `(γ/2, u_max)` for which stage 3 can recover
/// the coherence, with the resulting stage durations. `None` when twenty
/// draws all fall short.
pub fn recoverable_field(
    rng: &mut TestRng,
    gamma: f64,
    c: f64,
    p: f64,
    u_max: f64,
) -> Option<(f64, f64, f64)> {
    for _ in 0..20 {
        let u = rng.gen_range(0.5 * gamma * 1.05..u_max.max(gamma));
        let dt1 = dt1_exact(u, gamma, c, p).unwrap();
        match dt3_solve(u, gamma, c, p, dt1) {
            Ok(dt3) => return Some((u, dt1, dt3)),
            Err(Error::NoRecoveryAtThisField { .. }) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    None
}

/// A random feasible fixed-field problem with horizon `factor · (dt1 + dt3)`.
pub fn fixed_field_problem(rng: &mut TestRng, u_max: f64, factor: (f64, f64)) -> SynthesisProblem {
    loop {
        let (gamma, c, p) = model_triple(rng);
        let state = state_with(rng, c, p);
        if let Some((u, dt1, dt3)) = recoverable_field(rng, gamma, c, p, u_max) {
            let horizon = rng.gen_range(factor.0..factor.1) * (dt1 + dt3);
            return SynthesisProblem::new(ModelParams::new(gamma).unwrap(), state, horizon, Some(u)).unwrap();
        }
    }
}

pub fn assert_residuals(result: &SynthesisResult, tol: f64) {
    for r in result.residuals {
        assert!(r.abs() <= tol, "residual {r:e} above {tol:e}");
    }
}
