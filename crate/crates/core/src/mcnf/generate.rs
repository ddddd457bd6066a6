//! Seeded random multicommodity flow instances.
//!
//! Every instance contains a directed ring with expensive, uncapacitated-in-
//! practice arcs, so all commodities can always be routed. Random shortcut
//! arcs are cheap but tight, which makes capacity rows bind. All reals are
//! integers divided by ten, so the output does not depend on floating point
//! details of the platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Arc, Commodity, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McnfGenConfig {
    pub nodes: usize,
    pub arcs: usize,
    pub commodities: usize,
    pub seed: u64,
}

fn tenth(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    f64::from(rng.gen_range(lo..=hi)) / 10.0
}

/// Generates an instance. `arcs` is raised to `nodes` if smaller, since the
/// ring alone needs that many arcs; `nodes` is raised to 2.
pub fn generate_mcnf(cfg: &McnfGenConfig) -> Network {
    let n = cfg.nodes.max(2);
    let m = cfg.arcs.max(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut commodities = Vec::with_capacity(cfg.commodities);
    for _ in 0..cfg.commodities {
        let source = rng.gen_range(0..n);
        let mut sink = rng.gen_range(0..n - 1);
        if sink >= source {
            sink += 1;
        }
        commodities.push(Commodity {
            source,
            sink,
            demand: tenth(&mut rng, 5, 100),
        });
    }
    let total: f64 = commodities.iter().map(|c| c.demand).sum();
    let total_tenths = (total * 10.0).round() as u32;

    let mut arcs = Vec::with_capacity(m);
    for i in 0..n {
        arcs.push(Arc {
            tail: i,
            head: (i + 1) % n,
            cost: tenth(&mut rng, 150, 300),
            capacity: f64::from(total_tenths + 10) / 10.0,
        });
    }
    for _ in n..m {
        let tail = rng.gen_range(0..n);
        let mut head = rng.gen_range(0..n - 1);
        if head >= tail {
            head += 1;
        }
        arcs.push(Arc {
            tail,
            head,
            cost: tenth(&mut rng, 10, 100),
            capacity: tenth(&mut rng, 10, (total_tenths / 2).max(10)),
        });
    }
    Network::new(n, arcs, commodities).expect("generated networks are valid")
}

/// The `index`-th member of the small random suite: up to 10 nodes, 30 arcs
/// and 5 commodities.
pub fn suite_instance(index: u64) -> Network {
    let mut rng =
        ChaCha8Rng::seed_from_u64(0x6d63_6e66 ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let nodes = rng.gen_range(3..=10);
    let arcs = rng.gen_range(nodes..=30);
    let commodities = rng.gen_range(1..=5);
    generate_mcnf(&McnfGenConfig {
        nodes,
        arcs,
        commodities,
        seed: rng.gen(),
    })
}
