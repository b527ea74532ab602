//! Shared inputs for the benchmarks.
use std::sync::Arc;

use hgauge::harness::{gen_connection, gen_gauge, SuiteConfig};
use hgauge::{fixture, symmetrized_trace_pairing, FormAlgebra, GaugeData, InvariantPairing, TwoConnection};

pub struct Workload {
    pub fa: FormAlgebra,
    pub pairing: InvariantPairing,
    pub c0: TwoConnection,
    pub c1: TwoConnection,
    pub gauge: GaugeData,
}

pub fn workload(name: &str, n: usize, dim: usize, seed: u64) -> Workload {
    let xm = Arc::new(fixture::module(name).expect("named fixture"));
    let pairing = symmetrized_trace_pairing(&xm, n).expect("pairing");
    let fa = FormAlgebra::new(xm, dim).expect("form algebra");
    let cfg = SuiteConfig { fixture: name.into(), n, dim, ..SuiteConfig::default() };
    let c0 = gen_connection(&fa, &cfg, seed);
    let c1 = gen_connection(&fa, &cfg, seed.wrapping_add(1));
    let gauge = gen_gauge(&fa, &cfg, seed.wrapping_add(2));
    Workload { fa, pairing, c0, c1, gauge }
}
