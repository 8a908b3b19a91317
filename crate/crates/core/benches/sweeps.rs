//! Sequential against data-parallel execution for the sweep workloads.
//! Without the `parallel` feature both variants run on one thread.

use std::hint::black_box;

use atomradio::steady::steady_transmission;
use atomradio::transduction::{transduce_quasi_static_with, QuasiStaticOptions};
use atomradio::{
    encode, khz, make_tone, sweep, AtomFieldParams, Chain, DecoherenceParams, Exec, ModulationConfig,
    ModulationMode, SweepAxis, ToneShape, TransmissionModel,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn steady_grid(c: &mut Criterion) {
    let base = AtomFieldParams::default();
    let d = DecoherenceParams::default();
    let m = TransmissionModel::default();
    let grid: Vec<(f64, f64)> = (0..400)
        .map(|i| (khz(10.0 + (i % 20) as f64 * 10.0), khz(-200.0 + (i / 20) as f64 * 20.0)))
        .collect();
    let mut g = c.benchmark_group("steady_grid_400");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec.try_map(&grid, |&(w, det)| steady_transmission(&base.with_microwave(w, det), &d, &m))
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn quasi_static_fm(c: &mut Criterion) {
    let cfg = ModulationConfig {
        mode: ModulationMode::Fm,
        m_fm: khz(150.0),
        carrier_rabi_0: khz(147.2),
        carrier_detuning_0: khz(95.0),
        ..ModulationConfig::default()
    };
    let tone = make_tone(500.0, 1.0, ToneShape::Sine, 0.1, 48e3).unwrap();
    let traj = encode(&tone, &cfg).unwrap();
    let (base, d, m) = (AtomFieldParams::default(), DecoherenceParams::default(), TransmissionModel::default());
    let mut g = c.benchmark_group("quasi_static_fm");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = QuasiStaticOptions { exec, ..QuasiStaticOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| transduce_quasi_static_with(black_box(&traj), &base, &d, &m, &opts).unwrap())
        });
    }
    g.finish();
}

fn lockin_detuning_sweep(c: &mut Criterion) {
    let chain = Chain {
        tone_amplitude: 0.1,
        ..Chain::default()
    };
    let axis: Vec<f64> = (0..8).map(|i| khz(-175.0 + 50.0 * i as f64)).collect();
    let mut g = c.benchmark_group("lockin_detuning_sweep_8");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sweep(SweepAxis::Detuning, black_box(&axis), &chain, &[], exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, steady_grid, quasi_static_fm, lockin_detuning_sweep);
criterion_main!(benches);
