use criterion::{black_box, criterion_group, criterion_main, Criterion};

use holohje::hamparse::{build_h, BuildOptions};
use holohje::hgm::{HolonomicIntegral, OdeOptions};
use holohje::hje::{extract_symplectic, gamma_basis, GammaOptions};
use holohje_bench::{example_ast, example_function, example_point};

fn build(c: &mut Criterion) {
    let ast = example_ast();
    let z = example_point();
    c.bench_function("build_h", |b| b.iter(|| build_h(black_box(&ast), &z, &BuildOptions::default()).unwrap()));
}

fn gamma(c: &mut Criterion) {
    let f = example_function();
    let sym = extract_symplectic(&f.system).unwrap();
    c.bench_function("gamma_basis", |b| {
        b.iter(|| gamma_basis(black_box(&f.system), &sym, &GammaOptions::default()).unwrap())
    });
}

fn integrate(c: &mut Criterion) {
    let f = example_function();
    let hi = HolonomicIntegral::new(&f, OdeOptions::default());
    let target = f.base_point.with_coords(vec![0.9, 1.3, 0.25, 1.7]);
    c.bench_function("hgm_q_at", |b| b.iter(|| hi.q_at(black_box(&target)).unwrap()));
}

criterion_group!(benches, build, gamma, integrate);
criterion_main!(benches);
