use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use cuntz_core::kernel::{apply_t, Mode};
use cuntz_core::operators::{build_block, OpName, DEFAULT_MAX_DIM};
use cuntz_core::sheets::e_vector;
use cuntz_core::spectral::{heat_trace, variant_spectrum};
use cuntz_core::{Alphabet, GradeIndex, Variant, Word};

fn apply_t_modes(c: &mut Criterion) {
    let al = Alphabet::new(3).unwrap();
    let v = e_vector(al, &Word::parse("221").unwrap(), &Word::parse("331").unwrap()).v;
    let mut g = c.benchmark_group("apply_t e[221,331] N=3");
    for mode in [Mode::Sphere, Mode::Direct] {
        g.bench_function(format!("{mode:?}"), |b| b.iter(|| apply_t(black_box(&v), mode)));
    }
    g.finish();
}

fn oracle_blocks(c: &mut Criterion) {
    let mut g = c.benchmark_group("T_oracle block");
    g.sample_size(10);
    for (n, grade) in [(2, (2, 2)), (3, (0, 2)), (3, (1, 1))] {
        let al = Alphabet::new(n).unwrap();
        let gi = GradeIndex::new(grade.0, grade.1).unwrap();
        g.bench_with_input(BenchmarkId::new(format!("N={n}"), gi), &gi, |b, &gi| {
            b.iter(|| build_block(al, OpName::TOracle, gi, DEFAULT_MAX_DIM).unwrap())
        });
    }
    g.finish();
}

fn spectra(c: &mut Criterion) {
    let al = Alphabet::new(3).unwrap();
    let gi = GradeIndex::new(0, 2).unwrap();
    let mut g = c.benchmark_group("spectrum N=3 (0,2)");
    g.sample_size(10);
    for var in [Variant::DTilde, Variant::DOracle] {
        g.bench_function(var.as_str(), |b| b.iter(|| variant_spectrum(al, var, gi, DEFAULT_MAX_DIM).unwrap()));
    }
    g.finish();
}

fn heat(c: &mut Criterion) {
    let al = Alphabet::new(2).unwrap();
    c.bench_function("heat trace d_tilde N=2 grade 8", |b| {
        b.iter(|| heat_trace(al, Variant::DTilde, &[1.0, 0.5, 0.25], 8, DEFAULT_MAX_DIM).unwrap())
    });
}

criterion_group!(benches, apply_t_modes, oracle_blocks, spectra, heat);
criterion_main!(benches);
