use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dess_bench::clutter_frame;
use dess_core::simulator::render_depth;
use dess_core::{
    check_indexed, constrain_depth, duration_for, is_free_indexed, plan_indexed, plan_to_rest, Budget, CheckOrder, CollisionConfig, DepthIndex, DurationLimits,
    PlannerConfig, SampleBounds, SamplerKind, Vec3,
};

fn depth_constraint(c: &mut Criterion) {
    let b = SampleBounds::default();
    c.bench_function("constrain_depth", |bench| {
        bench.iter(|| constrain_depth(black_box(2.4), black_box(Some(1.7)), &b).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let f = clutter_frame(30, 1);
    let b = SampleBounds::default();
    let mut g = c.benchmark_group("sample");
    for kind in [SamplerKind::Uniform, SamplerKind::DepthBased] {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        g.bench_function(kind.label(), |bench| bench.iter(|| kind.sample(&mut rng, &f.image, &f.camera, &b, &f.pose)));
    }
    g.finish();
}

fn trajectory(c: &mut Criterion) {
    let f = clutter_frame(0, 1);
    let end = Vec3::new(2.5, 0.4, -0.3);
    c.bench_function("plan_to_rest", |bench| {
        bench.iter(|| {
            let t = duration_for(&end, &f.state, 1.0, &DurationLimits::default());
            plan_to_rest(&f.state, black_box(end), t).unwrap()
        })
    });
}

fn collision(c: &mut Criterion) {
    let f = clutter_frame(30, 1);
    let cfg = CollisionConfig::default();
    let free = plan_to_rest(&f.state, Vec3::new(1.2, 0.0, 0.0), 1.2).unwrap();
    let blocked = plan_to_rest(&f.state, Vec3::new(2.8, -0.9, 0.6), 2.9).unwrap();
    let mut g = c.benchmark_group("check");
    for (name, t) in [("short", &free), ("long", &blocked)] {
        g.bench_with_input(BenchmarkId::new("time-order", name), t, |bench, t| bench.iter(|| check_indexed(t, &f.index, &f.camera, &f.pose, &cfg)));
        g.bench_with_input(BenchmarkId::new("endpoint-first", name), t, |bench, t| bench.iter(|| is_free_indexed(t, &f.index, &f.camera, &f.pose, &cfg)));
    }
    g.finish();
}

fn render(c: &mut Criterion) {
    let f = clutter_frame(60, 3);
    let mut g = c.benchmark_group("frame");
    g.bench_function("render_depth", |bench| bench.iter(|| render_depth(&f.world, &f.pose, &f.camera, 20.0)));
    g.bench_function("depth_index", |bench| bench.iter(|| DepthIndex::new(&f.image)));
    g.finish();
}

fn planning(c: &mut Criterion) {
    let f = clutter_frame(30, 1);
    let mut g = c.benchmark_group("plan");
    g.sample_size(20);
    for kind in [SamplerKind::Uniform, SamplerKind::DepthBased] {
        for order in [CheckOrder::Time, CheckOrder::EndpointFirst] {
            let cfg = PlannerConfig {
                sampler: kind,
                check_order: order,
                budget: Budget::Candidates(200),
                ..PlannerConfig::default()
            };
            let id = BenchmarkId::new(kind.label(), format!("{order:?}"));
            g.bench_function(id, |bench| {
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                bench.iter(|| plan_indexed(&f.image, &f.index, &f.pose, &f.state, &f.goal, &cfg, &mut rng))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, depth_constraint, sampling, trajectory, collision, render, planning);
criterion_main!(benches);
