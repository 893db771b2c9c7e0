//! throwaway timing probe
use mobb::instance::{generate_random, ClassSize, ProblemClass};
use mobb::search::{NodeRule, SolveConfig};
use mobb::{ObMode, ProbingMode};
use std::time::Instant;

#[test]
#[ignore]
fn probe_worst_cells() {
    for (p, n, ob, probing, enum_t) in [
        (4usize, 16usize, ObMode::Nob, ProbingMode::None, 0u32),
        (4, 16, ObMode::Fob, ProbingMode::None, 0),
        (4, 16, ObMode::Fob, ProbingMode::Vf, 0),
        (4, 16, ObMode::Nob, ProbingMode::Vf, 0),
        (4, 16, ObMode::Fob, ProbingMode::Vf, 14),
        (3, 16, ObMode::Nob, ProbingMode::None, 0),
        (3, 16, ObMode::Fob, ProbingMode::Vfd, 0),
    ] {
        let inst = generate_random(ProblemClass::Kp, p, ClassSize::Vars(n), 1).unwrap();
        let cfg = SolveConfig {
            ob_mode: ob,
            probing,
            node_rule: NodeRule::Df,
            enum_threshold: enum_t,
            ..Default::default()
        };
        let t = Instant::now();
        let out = mobb::solve(&inst, &cfg).unwrap();
        eprintln!(
            "p={p} n={n} {ob:?}/{probing:?}/enum{enum_t}: {:?} nodes={} lps={} front={}",
            t.elapsed(),
            out.stats.nodes_explored,
            out.stats.lps_relaxation,
            out.front.len()
        );
    }
}
