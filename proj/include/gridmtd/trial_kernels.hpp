#pragma once

// Monte Carlo inner loops. Each kernel comes as a serial reference and an
// OpenMP version; both draw trial i from Rng(stream_seed(seed, base + i)),
// accumulate integer counts, and therefore return identical results
// regardless of thread count or scheduling.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridmtd/estimation.hpp"
#include "gridmtd/grid_model.hpp"

namespace gridmtd::kernels {

/// Identifies the noise stream of trial t under attack j:
/// index = base_index + j * trials + t.
struct TrialStreams {
    std::uint64_t experiment_seed = 0;
    std::uint64_t base_index = 0;
    std::size_t trials = 0;
};

struct DetectionCounts {
    std::uint64_t baseline = 0;          // detections by the unprotected estimator
    std::vector<std::uint64_t> post;     // detections per post-MTD estimator
    std::uint64_t evaluations = 0;       // attacks * trials

    bool operator==(const DetectionCounts&) const = default;
};

/// For every attack column a_j and trial t, measures y = z + a_j with
/// z ~ N(0, sigma^2 I) and runs the residual test against `baseline` and
/// each of `post`. The true state is zero; the residual does not depend
/// on it.
DetectionCounts count_detections_serial(const WlsEstimator& baseline, std::span<const WlsEstimator> post,
                                        const Eigen::MatrixXd& attacks, double sigma, double tau,
                                        const TrialStreams& streams);

DetectionCounts count_detections_omp(const WlsEstimator& baseline, std::span<const WlsEstimator> post,
                                     const Eigen::MatrixXd& attacks, double sigma, double tau,
                                     const TrialStreams& streams);

struct ExistenceCounts {
    std::uint64_t feasible = 0;       // draws admitting a resilient attack
    std::uint64_t protecting = 0;     // draws whose protected subgraph spans all buses
    std::uint64_t disagreements = 0;  // draws where feasible == protecting
    std::uint64_t draws = 0;

    bool operator==(const ExistenceCounts&) const = default;
};

/// Draws `draws` uniform random protected subsets of `subset_size`
/// branches (draw d uses stream base_index + d) and tests each for an
/// MTD-resilient attack, cross-checked against graph connectivity.
ExistenceCounts count_existence_serial(const IncidenceModel& inc, std::size_t subset_size, std::size_t draws,
                                       std::uint64_t experiment_seed, std::uint64_t base_index);

ExistenceCounts count_existence_omp(const IncidenceModel& inc, std::size_t subset_size, std::size_t draws,
                                    std::uint64_t experiment_seed, std::uint64_t base_index);

/// Uniform subset of {0..n-1} of the given size by partial Fisher-Yates,
/// returned sorted.
std::vector<std::size_t> draw_subset(std::size_t n, std::size_t size, std::uint64_t seed);

}  // namespace gridmtd::kernels
