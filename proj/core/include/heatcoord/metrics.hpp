#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "heatcoord/grid.hpp"

namespace heatcoord {

inline const std::vector<double> kDefaultPckhAlphas = {0.1, 0.5};

struct MetricReport {
    double rmse = 0.0;
    std::vector<std::pair<double, double>> pckh;  // (alpha, percent), in request order
    std::vector<double> per_joint_rmse;
    std::size_t n_samples = 0;
    std::size_t n_joints_evaluated = 0;
    std::size_t n_pckh_excluded = 0;  // samples with zero head-segment length

    /// PCKh percentage for `alpha`; throws ContractError if not evaluated.
    double pckh_at(double alpha) const;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// sqrt(mean over (sample, joint) of squared Euclidean error).
/// Throws ContractError on empty input or length/joint-count mismatch.
double rmse(std::span<const Pose> pred, std::span<const Pose> gt);

/// Percentage of joints whose error is strictly below alpha * |head - neck|
/// of the ground truth. Samples with a zero-length head segment are
/// skipped; if every sample is skipped a ContractError is thrown.
double pckh(std::span<const Pose> pred, std::span<const Pose> gt, double alpha);

MetricReport evaluate(std::span<const Pose> pred, std::span<const Pose> gt,
                      std::span<const double> alphas = kDefaultPckhAlphas);

}  // namespace heatcoord
