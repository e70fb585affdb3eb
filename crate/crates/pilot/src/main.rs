use lacunary::bigfrac::sample_uniform;
use lacunary::dilated::{Harmonic, Normalization, PeriodicFunction, WeightRule};
use lacunary::mclab::*;
use lacunary::normality::{shift_orbit_pointset, DigitStream, RealSpec, power_orbit, block_deviation, champernowne_digits};
use lacunary::pointstats::{dilated_orbit, extreme_discrepancy, pair_correlation, star_discrepancy};
use lacunary::seqgen::{generate, SequenceSpec};
use num_bigint::BigUint;
use num_traits::One;
use std::time::Instant;

fn main() {
    // EF at 1e5 samples over candidate seeds
    for seed in [0u64, 1, 2] {
        let cfg = ExperimentConfig {
            function: PeriodicFunction::CosPoly(vec![
                Harmonic { j: 1, a: 1.0, b: 0.0 },
                Harmonic { j: 2, a: 1.0, b: 0.0 },
            ]),
            sequence: SequenceSpec::PowerMinusOne { base: 2 },
            n: 256,
            samples: 100_000,
            weights: WeightRule::Ones,
            normalization: Normalization::SqrtHalfN,
            seed,
            precision: PrecisionPolicy::Auto,
        };
        let t0 = Instant::now();
        let e = clt_experiment(&cfg).unwrap();
        println!("EF seed {seed}: ks = {:.5} ({:?})", ks_distance(&e, erdos_fortet_cdf), t0.elapsed());
    }

    // varsup grid 512
    let t0 = Instant::now();
    let v = variance_sup_over_intervals(2, 512, 40).unwrap();
    println!("varsup(2, 512, 40) = {:.6} at ({}, {}) vs 42/81 = {:.6} ({:?})",
        v.sigma_squared, v.a, v.b, 42.0 / 81.0, t0.elapsed());

    // LIL trajectory to 1e6 for cos, 2^k
    let t0 = Instant::now();
    let cfg = ExperimentConfig {
        function: PeriodicFunction::cos(),
        sequence: SequenceSpec::GeometricInt { theta: 2 },
        n: 1,
        samples: 1,
        weights: WeightRule::Ones,
        normalization: Normalization::None,
        seed: 0,
        precision: PrecisionPolicy::Auto,
    };
    let x = sample_uniform(123, 0, 1_000_000 + 64);
    let cps: Vec<usize> = (4..=19).map(|e| 1usize << e).chain([1_000_000]).collect();
    let traj = lil_trajectory(&cfg, &x, &cps).unwrap();
    let max = traj.iter().map(|t| t.1).fold(0.0, f64::max);
    println!("LIL max over checkpoints to 1e6: {:.4} vs 1/sqrt2 = {:.4} ({:?})", max, 0.7071, t0.elapsed());

    // power orbit timing: one 4096-bit draw, N = 5000
    let t0 = Instant::now();
    let draw = sample_uniform(7, 0, 4096);
    let x = RealSpec::Dyadic { mantissa: draw.mantissa() | (BigUint::one() << 4096u32), scale_bits: 4096 };
    let orbit = power_orbit(&RealSpec::Rational { num: 1, den: 1 }, &x, 5000).unwrap();
    println!("power orbit N=5000: D = {:.4} ({:?})", extreme_discrepancy(&orbit).unwrap(), t0.elapsed());

    // pair correlation, 2^k at N=200 over 20 seeds
    let t0 = Instant::now();
    let seq = generate(&SequenceSpec::GeometricInt { theta: 2 }, 200).unwrap();
    for s in [0.5, 1.0, 2.0] {
        let mut mean = 0.0;
        for seed in 0..20u64 {
            let x = sample_uniform(seed, 0, 300);
            let orbit = dilated_orbit(&x, &seq, 200).unwrap();
            mean += pair_correlation(&orbit, s).unwrap();
        }
        mean /= 20.0;
        println!("R2({s}) mean over 20 seeds = {:.4} (2s = {})", mean, 2.0 * s);
    }
    println!("pair corr time: {:?}", t0.elapsed());

    // champernowne: criterion 10 block deviations + shift orbit discrepancies
    let t0 = Instant::now();
    let d = champernowne_digits(10, 1_000_000).unwrap();
    println!("champernowne dev l=1: {:.4}, l=2: {:.4} (claimed <= 0.01)",
        block_deviation(&d, 10, 1).unwrap(), block_deviation(&d, 10, 2).unwrap());
    let s = DigitStream::champernowne(10).unwrap();
    for n in [1000usize, 10_000, 100_000] {
        let orbit = shift_orbit_pointset(&s, n, 64).unwrap();
        println!("champernowne shift orbit D*({n}) = {:.5}", star_discrepancy(&orbit).unwrap());
    }
    println!("champernowne time: {:?}", t0.elapsed());
}
