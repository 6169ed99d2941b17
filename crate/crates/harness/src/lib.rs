//! Stream generators, seeded end-to-end runs, benchmarks and the acceptance
//! suite for the `kmatch` matchers.

pub mod accept;
pub mod bench;
pub mod gen;
pub mod par;
pub mod run;
pub mod seed;
