//! Fixtures shared by the benchmarks.

use vessel::evolution::{GridSpec, Vessel};
use vessel::{random_realization, Preset};

pub fn random_vessel(kind: Preset, n: usize, seed: u64) -> Vessel {
    let p = kind.params();
    let r = random_realization(n, &p, seed).expect("random realization");
    Vessel::new(p, r, 1).expect("vessel")
}

pub fn bench_grid() -> GridSpec {
    GridSpec {
        x_min: -2.0,
        x_max: 2.0,
        nx: 33,
        t_min: -0.5,
        t_max: 0.5,
        nt: 9,
    }
}
