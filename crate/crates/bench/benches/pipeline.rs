use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qosrec::experiment::{mean_ndcg, RankingSetup};
use qosrec::{fit, krcc_matrix, run_experiment, KrccVariant, Method, ModelKind, RelevanceKind};
use qosrec_bench::{matrix, quick_config, split};

fn similarity(c: &mut Criterion) {
    let mut group = c.benchmark_group("krcc_matrix");
    for size in [50, 100, 200] {
        let s = split(size, 0.2, 1);
        group.bench_with_input(BenchmarkId::from_parameter(size), &s.train, |b, train| {
            b.iter(|| krcc_matrix(train, KrccVariant::WithinUser))
        });
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let s = split(100, 0.2, 2);
    let sim = krcc_matrix(&s.train, KrccVariant::WithinUser);
    let mut hp = quick_config(100, 0.2).hyperparams;
    hp.max_epochs = 10;
    c.bench_function("hybrid_fit_100x100_10_epochs", |b| {
        b.iter(|| {
            fit(
                &s.train,
                Some(&sim),
                &hp,
                ModelKind::Hybrid { beta: hp.beta },
                None,
            )
            .unwrap()
        })
    });
}

fn ranking(c: &mut Criterion) {
    let s = split(200, 0.1, 3);
    let setup = RankingSetup {
        direction: Default::default(),
        relevance: RelevanceKind::default(),
        global_max: None,
    };
    c.bench_function("mean_ndcg_200x200", |b| {
        b.iter(|| mean_ndcg(|u, s| (u * 31 + s * 17) as f64, &s.test, 10, setup).unwrap())
    });
}

fn experiment(c: &mut Criterion) {
    let source = matrix(120, 120, 4);
    let cfg = quick_config(100, 0.2);
    let mut group = c.benchmark_group("run_experiment");
    group.sample_size(10);
    for m in [Method::Ipcc, Method::BiasSvd, Method::Hybrid] {
        let p = m.predictor(&cfg.hyperparams);
        group.bench_function(m.id(), |b| {
            b.iter(|| run_experiment(&source, &cfg, p.as_ref()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, similarity, training, ranking, experiment);
criterion_main!(benches);
