use paged_core::master::MasterGraph;
use paged_core::process::{SeedGraph, Sigma};
use paged_core::stats::derive_seed;

fn main() {
    let sg = SeedGraph::ladder(1, 2).unwrap();
    let sigma = Sigma { bits: vec![1, 0, 1], p: 0.7, t0: sg.t0(), nu_h: sg.nu_h, one_h: sg.one_h };
    let n = sigma.n();
    for t in 0..200u64 {
        let mut mg = MasterGraph::new(&sigma, &sg, n, derive_seed(15, t)).unwrap();
        let v0 = mg.one_n() + (t % (mg.nu_n() - mg.one_n()));
        match mg.component_search(v0, 10_000, 10_000) {
            Ok(_) => {}
            Err(e) => {
                println!("t={t} v0={v0} one_n={} nu_n={}: {e}", mg.one_n(), mg.nu_n());
                if t > 30 { break; }
            }
        }
    }
    println!("done");
}
