#![allow(dead_code)]

use fedshare::scenario::{CloudSpec, Scenario};
use fedshare::simnet::FaultPlan;
use fedshare::Int;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random federation with hash-derived primes and secrets below every modulus.
pub fn random_scenario(seed: u64, n: usize, prime_bits: u32) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clouds = (0..n)
        .map(|i| CloudSpec {
            grant_type: "Client".into(),
            service_type: "Storage".into(),
            client_name: format!("tenant-{seed}-{i}"),
            client_region: "Europe".into(),
            client_location: "Oslo".into(),
            service_payment: rng.gen_range(1..1_000_000_000),
            expiry_date: "31-Dec-2031".into(),
            secret: 0,
            fixed_cp: None,
        })
        .collect();
    let mut scenario = Scenario {
        seed,
        prime_bits,
        degree: None,
        clouds,
        faults: FaultPlan::default(),
    };
    let bound = scenario.derive_keys().unwrap().iter().map(|k| k.np).min().unwrap();
    for cloud in &mut scenario.clouds {
        cloud.secret = rng.gen_range(0..bound);
    }
    scenario
}

pub fn secret_sum(scenario: &Scenario) -> Int {
    scenario.clouds.iter().map(|c| Int::from(c.secret)).sum()
}
