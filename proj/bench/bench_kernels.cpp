// Serial reference vs OpenMP kernels on the IEEE 30-bus case.

#include <benchmark/benchmark.h>

#include <vector>

#include "gridmtd/attack.hpp"
#include "gridmtd/mtd.hpp"
#include "gridmtd/rng.hpp"
#include "gridmtd/trial_kernels.hpp"

namespace {

using namespace gridmtd;

struct Fixture {
    IncidenceModel inc;
    AdmittanceModel adm;
    JacobianModel jac;
    NoiseModel noise{3.0};
    std::vector<WlsEstimator> post;
    std::unique_ptr<WlsEstimator> baseline;
    Eigen::MatrixXd attacks;
    double tau = 0.0;

    Fixture() {
        const auto grid = load_case_file(GRIDMTD_DATA_DIR "/case30.m");
        inc = build_incidence(grid);
        adm = build_admittance(grid, inc);
        jac = build_jacobian(inc, adm);
        baseline = std::make_unique<WlsEstimator>(jac, noise);
        post.emplace_back(apply_mtd(adm, inc, MtdStrategy::scaled({5}, adm, 0.2)).jacobian, noise);
        tau = detection_threshold(noise, jac.measurement_count(), jac.state_count(), 0.05).tau;
        attacks.resize(static_cast<Eigen::Index>(jac.measurement_count()), 20);
        Rng rng(7, Stream::attack);
        for (Eigen::Index j = 0; j < attacks.cols(); ++j) {
            Eigen::VectorXd c(static_cast<Eigen::Index>(jac.state_count()));
            for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.uniform();
            attacks.col(j) = jac.H * c;
        }
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_DetectionSerial(benchmark::State& state) {
    const auto& f = fixture();
    const kernels::TrialStreams streams{1, 0, static_cast<std::size_t>(state.range(0))};
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::count_detections_serial(*f.baseline, f.post, f.attacks, 3.0, f.tau, streams));
    state.SetItemsProcessed(state.iterations() * f.attacks.cols() * state.range(0));
}

void BM_DetectionOmp(benchmark::State& state) {
    const auto& f = fixture();
    const kernels::TrialStreams streams{1, 0, static_cast<std::size_t>(state.range(0))};
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::count_detections_omp(*f.baseline, f.post, f.attacks, 3.0, f.tau, streams));
    state.SetItemsProcessed(state.iterations() * f.attacks.cols() * state.range(0));
}

void BM_ExistenceSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::count_existence_serial(f.inc, 25, static_cast<std::size_t>(state.range(0)), 1, 0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ExistenceOmp(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(kernels::count_existence_omp(f.inc, 25, static_cast<std::size_t>(state.range(0)), 1, 0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_DetectionSerial)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DetectionOmp)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExistenceSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExistenceOmp)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
