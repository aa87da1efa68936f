#include "gridmtd/trial_kernels.hpp"

#include <algorithm>
#include <numeric>

#include <omp.h>

#include "gridmtd/attack.hpp"
#include "gridmtd/mtd.hpp"
#include "gridmtd/rng.hpp"

namespace gridmtd::kernels {

namespace {

void check_shapes(const WlsEstimator& baseline, std::span<const WlsEstimator> post, const Eigen::MatrixXd& attacks) {
    const auto m = baseline.measurement_count();
    if (static_cast<std::size_t>(attacks.rows()) != m) throw ValidationError("attack matrix has the wrong row count");
    for (const auto& est : post)
        if (est.measurement_count() != m) throw ValidationError("post-MTD estimator has the wrong measurement count");
}

// One trial: returns the baseline flag and fills `post_flags`.
bool run_trial(const WlsEstimator& baseline, std::span<const WlsEstimator> post, const Eigen::MatrixXd& attacks,
               double sigma, double tau, const TrialStreams& streams, std::uint64_t flat, Eigen::VectorXd& y,
               std::vector<std::uint8_t>& post_flags) {
    const auto j = static_cast<Eigen::Index>(flat / streams.trials);
    Rng rng(stream_seed(streams.experiment_seed, streams.base_index + flat), Stream::noise);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = sigma * rng.normal() + attacks(i, j);
    const DetectorConfig cfg{0.0, tau};
    for (std::size_t p = 0; p < post.size(); ++p) post_flags[p] = detect(post[p].residual(y), cfg);
    return detect(baseline.residual(y), cfg);
}

ExistenceCounts run_draw(const IncidenceModel& inc, std::size_t subset_size, std::uint64_t seed) {
    const auto subset = draw_subset(inc.branch_count(), subset_size, seed);
    const auto cs = mtd_constraints(inc, subset);
    const bool feasible = is_feasible(cs).first;
    const bool protecting = connects_all_buses(inc, subset);
    return {feasible ? 1u : 0u, protecting ? 1u : 0u, feasible == protecting ? 1u : 0u, 1};
}

}  // namespace

std::vector<std::size_t> draw_subset(std::size_t n, std::size_t size, std::uint64_t seed) {
    if (size > n) throw ValidationError("subset larger than the population");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(seed, Stream::subset);
    for (std::size_t i = 0; i < size; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(size);
    std::sort(pool.begin(), pool.end());
    return pool;
}

DetectionCounts count_detections_serial(const WlsEstimator& baseline, std::span<const WlsEstimator> post,
                                        const Eigen::MatrixXd& attacks, double sigma, double tau,
                                        const TrialStreams& streams) {
    check_shapes(baseline, post, attacks);
    DetectionCounts counts;
    counts.post.assign(post.size(), 0);
    counts.evaluations = static_cast<std::uint64_t>(attacks.cols()) * streams.trials;

    Eigen::VectorXd y(static_cast<Eigen::Index>(baseline.measurement_count()));
    std::vector<std::uint8_t> flags(post.size());
    for (std::uint64_t flat = 0; flat < counts.evaluations; ++flat) {
        counts.baseline += run_trial(baseline, post, attacks, sigma, tau, streams, flat, y, flags);
        for (std::size_t p = 0; p < post.size(); ++p) counts.post[p] += flags[p];
    }
    return counts;
}

DetectionCounts count_detections_omp(const WlsEstimator& baseline, std::span<const WlsEstimator> post,
                                     const Eigen::MatrixXd& attacks, double sigma, double tau,
                                     const TrialStreams& streams) {
    check_shapes(baseline, post, attacks);
    DetectionCounts counts;
    counts.post.assign(post.size(), 0);
    counts.evaluations = static_cast<std::uint64_t>(attacks.cols()) * streams.trials;
    const auto total = static_cast<std::int64_t>(counts.evaluations);

#pragma omp parallel
    {
        Eigen::VectorXd y(static_cast<Eigen::Index>(baseline.measurement_count()));
        std::vector<std::uint8_t> flags(post.size());
        std::vector<std::uint64_t> local_post(post.size(), 0);
        std::uint64_t local_baseline = 0;

#pragma omp for schedule(static)
        for (std::int64_t flat = 0; flat < total; ++flat) {
            local_baseline +=
                run_trial(baseline, post, attacks, sigma, tau, streams, static_cast<std::uint64_t>(flat), y, flags);
            for (std::size_t p = 0; p < post.size(); ++p) local_post[p] += flags[p];
        }

#pragma omp critical
        {
            counts.baseline += local_baseline;
            for (std::size_t p = 0; p < post.size(); ++p) counts.post[p] += local_post[p];
        }
    }
    return counts;
}

ExistenceCounts count_existence_serial(const IncidenceModel& inc, std::size_t subset_size, std::size_t draws,
                                       std::uint64_t experiment_seed, std::uint64_t base_index) {
    ExistenceCounts counts;
    for (std::size_t d = 0; d < draws; ++d) {
        const auto one = run_draw(inc, subset_size, stream_seed(experiment_seed, base_index + d));
        counts.feasible += one.feasible;
        counts.protecting += one.protecting;
        counts.disagreements += one.disagreements;
        ++counts.draws;
    }
    return counts;
}

ExistenceCounts count_existence_omp(const IncidenceModel& inc, std::size_t subset_size, std::size_t draws,
                                    std::uint64_t experiment_seed, std::uint64_t base_index) {
    std::uint64_t feasible = 0, protecting = 0, disagreements = 0;
    const auto total = static_cast<std::int64_t>(draws);
#pragma omp parallel for schedule(static) reduction(+ : feasible, protecting, disagreements)
    for (std::int64_t d = 0; d < total; ++d) {
        const auto one =
            run_draw(inc, subset_size, stream_seed(experiment_seed, base_index + static_cast<std::uint64_t>(d)));
        feasible += one.feasible;
        protecting += one.protecting;
        disagreements += one.disagreements;
    }
    return {feasible, protecting, disagreements, draws};
}

}  // namespace gridmtd::kernels
