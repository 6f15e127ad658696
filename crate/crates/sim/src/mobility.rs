//! Straight-line movement inside a square, reflecting off the edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub const AREA_M: f64 = 2100.0;
pub const SPEED_M_PER_S: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMobility {
    start: Vec<(f64, f64)>,
    heading: Vec<f64>,
}

impl LinearMobility {
    pub fn new(nodes: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6d6f_6269);
        let start = (0..nodes).map(|_| (rng.gen_range(0.0..AREA_M), rng.gen_range(0.0..AREA_M))).collect();
        let heading = (0..nodes).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        LinearMobility { start, heading }
    }

    pub fn position(&self, node: usize, t_ns: u64) -> (f64, f64) {
        let d = SPEED_M_PER_S * t_ns as f64 / 1e9;
        let (x, y) = self.start[node];
        let h = self.heading[node];
        (fold(x + d * h.cos()), fold(y + d * h.sin()))
    }
}

fn fold(v: f64) -> f64 {
    let r = v.rem_euclid(2.0 * AREA_M);
    if r > AREA_M {
        2.0 * AREA_M - r
    } else {
        r
    }
}
