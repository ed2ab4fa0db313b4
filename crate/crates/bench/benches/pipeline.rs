use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use pisotile::algebra::{is_pisot_family, isolate_roots, IntPolynomial, SpectrumSelection};
use pisotile::pipeline::{run_meyer, run_spectrum, SpectrumConfig};
use pisotile::tiling::{TilingPatch, DEFAULT_TILE_CAP};
use pisotile_bench::fixture;

fn algebra(c: &mut Criterion) {
    let p = IntPolynomial::from_i64(&[3, -4, -1, 1]).unwrap();
    c.bench_function("isolate_roots cubic", |b| b.iter(|| isolate_roots(black_box(&p), 1e-12).unwrap()));
    let roots = isolate_roots(&p, 1e-12).unwrap();
    let big: Vec<usize> = (0..3).filter(|&i| roots.roots[i].value.norm() > 1.0).collect();
    let sel = SpectrumSelection::new(p.clone(), roots, big, 1).unwrap();
    c.bench_function("is_pisot_family cubic", |b| b.iter(|| is_pisot_family(black_box(&sel), 1e-12)));
}

fn tiling(c: &mut Criterion) {
    let fib = fixture("fib.json");
    let a = TilingPatch::single(fib.origin_tile(0));
    c.bench_function("expand fib k=16", |b| b.iter(|| fib.expand(black_box(&a), 16, DEFAULT_TILE_CAP).unwrap()));
    let p = fib.expand(&a, 16, DEFAULT_TILE_CAP).unwrap();
    c.bench_function("control_points fib 2584 tiles", |b| b.iter(|| fib.control_points(black_box(&p)).unwrap()));
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    for name in ["fib.json", "nonpisot1d.json"] {
        let rule = fixture(name);
        g.bench_function(format!("spectrum {name}"), |b| {
            b.iter(|| run_spectrum(black_box(&rule), &SpectrumConfig::default()).unwrap())
        });
        g.bench_function(format!("meyer {name}"), |b| {
            b.iter(|| run_meyer(black_box(&rule), &[10.0, 20.0, 40.0, 80.0], DEFAULT_TILE_CAP, None).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, algebra, tiling, pipeline);
criterion_main!(benches);
