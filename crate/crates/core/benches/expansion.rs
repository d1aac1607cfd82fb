use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paratower_core::cone::WeightSpec;
use paratower_core::ring::TowerClass;
use paratower_core::selftest::plane_geometry;
use paratower_core::slope::slope_poly;
use paratower_core::{Execution, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("slope_expansion");
    group.sample_size(10);
    for ranks in [vec![3], vec![2, 2], vec![3, 2]] {
        let degrees: Vec<i64> = (1..=ranks.len() as i64).collect();
        let shape = plane_geometry(ranks.clone(), &degrees).unwrap();
        let lambdas = ranks.iter().map(|&r| (0..r).map(|j| q(r as i64 - j as i64, r as i64 + 1)).collect()).collect();
        let weights = WeightSpec::new(&shape, lambdas, false).unwrap();
        let mut coeffs = vec![q(1, 1); shape.base().generator_count()];
        coeffs[0] = q(3, 1);
        let c1 = TowerClass::from_base_vector(&shape, &coeffs);
        let omega = {
            let mut v = vec![q(0, 1); shape.base().generator_count()];
            v[0] = q(1, 1);
            v
        };
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, format!("{ranks:?}")), &exec, |b, &exec| {
                b.iter(|| slope_poly(&shape, black_box(&c1), 2, &omega, &weights, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, expansion);
criterion_main!(benches);
