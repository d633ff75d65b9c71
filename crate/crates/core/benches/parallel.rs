use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bcontract::config::standard_complex;
use bcontract::contraction::{build_contraction, verify_contraction, BuildOptions};
use bcontract::moy_prasad::mp1_random_sweep;
use bcontract::par::Exec;
use bcontract::roots::{build_root_system, RootType};
use bcontract::Q;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn contraction(c: &mut Criterion) {
    let mut g = c.benchmark_group("contract_and_verify");
    g.sample_size(10);
    for (t, m) in [(RootType::A2, 2), (RootType::B2, 2), (RootType::G2, 1)] {
        let o = vec![Q::ZERO; 2];
        let cx = standard_complex(t, m, &o, Q::int(2)).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, format!("{t}-m{m}")), &cx, |b, cx| {
                b.iter(|| {
                    let ctr = build_contraction(cx, &o, None, BuildOptions { exec, ..Default::default() }).unwrap();
                    verify_contraction(&ctr, cx, &ctr.region(), exec).passed()
                })
            });
        }
    }
    g.finish();
}

fn mp1(c: &mut Criterion) {
    let mut g = c.benchmark_group("mp1_sweep_1000");
    let sys = build_root_system(RootType::G2);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| mp1_random_sweep(&sys, 1000, 7, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, contraction, mp1);
criterion_main!(benches);
