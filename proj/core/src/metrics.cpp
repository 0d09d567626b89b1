#include "heatcoord/metrics.hpp"

#include <cmath>
#include <string>

#include "heatcoord/errors.hpp"

namespace heatcoord {

namespace {

double squared_distance(const Keypoint& a, const Keypoint& b) {
    const double du = a.u - b.u;
    const double dv = a.v - b.v;
    return du * du + dv * dv;
}

void check_pairs(std::span<const Pose> pred, std::span<const Pose> gt) {
    if (pred.empty()) throw ContractError("no samples to evaluate");
    if (pred.size() != gt.size()) {
        throw ContractError("prediction/ground-truth count mismatch: " + std::to_string(pred.size()) +
                            " vs " + std::to_string(gt.size()));
    }
    const std::size_t joints = gt.front().size();
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != gt[i].size() || gt[i].size() != joints) {
            throw ContractError("sample " + std::to_string(i) + ": joint count mismatch");
        }
    }
    if (joints == 0) throw ContractError("poses have no joints");
}

// Zero means "exclude from PCKh".
double head_segment(const Pose& gt, std::size_t sample) {
    if (!gt.head_neck) {
        throw ContractError("sample " + std::to_string(sample) +
                            ": ground truth has no head/neck indices");
    }
    validate(gt);
    return std::sqrt(squared_distance(gt.keypoints[gt.head_neck->head],
                                      gt.keypoints[gt.head_neck->neck]));
}

}  // namespace

double MetricReport::pckh_at(double alpha) const {
    for (const auto& [a, value] : pckh) {
        if (a == alpha) return value;
    }
    throw ContractError("PCKh@" + std::to_string(alpha) + " not evaluated");
}

double rmse(std::span<const Pose> pred, std::span<const Pose> gt) {
    check_pairs(pred, gt);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < pred[i].size(); ++j) {
            sum += squared_distance(pred[i].keypoints[j], gt[i].keypoints[j]);
            ++count;
        }
    }
    return std::sqrt(sum / static_cast<double>(count));
}

double pckh(std::span<const Pose> pred, std::span<const Pose> gt, double alpha) {
    const double a[] = {alpha};
    return evaluate(pred, gt, a).pckh.front().second;
}

MetricReport evaluate(std::span<const Pose> pred, std::span<const Pose> gt,
                      std::span<const double> alphas) {
    check_pairs(pred, gt);
    for (double a : alphas) {
        if (!(std::isfinite(a) && a > 0.0)) throw ContractError("PCKh alpha must be positive");
    }
    const std::size_t joints = gt.front().size();

    std::vector<double> joint_sq(joints, 0.0);
    std::vector<std::size_t> correct(alphas.size(), 0);
    std::size_t pckh_total = 0;
    std::size_t excluded = 0;
    double total_sq = 0.0;

    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double segment = alphas.empty() ? 0.0 : head_segment(gt[i], i);
        const bool use_pckh = segment > 0.0;
        if (!alphas.empty() && !use_pckh) ++excluded;
        for (std::size_t j = 0; j < joints; ++j) {
            const double sq = squared_distance(pred[i].keypoints[j], gt[i].keypoints[j]);
            joint_sq[j] += sq;
            total_sq += sq;
            if (!use_pckh) continue;
            const double err = std::sqrt(sq);
            for (std::size_t k = 0; k < alphas.size(); ++k) {
                if (err < alphas[k] * segment) ++correct[k];
            }
        }
        if (use_pckh) pckh_total += joints;
    }
    if (!alphas.empty() && pckh_total == 0) {
        throw ContractError("every sample has a zero-length head segment");
    }

    MetricReport report;
    report.n_samples = pred.size();
    report.n_joints_evaluated = pred.size() * joints;
    report.n_pckh_excluded = excluded;
    report.rmse = std::sqrt(total_sq / static_cast<double>(report.n_joints_evaluated));
    report.per_joint_rmse.reserve(joints);
    for (double s : joint_sq) {
        report.per_joint_rmse.push_back(std::sqrt(s / static_cast<double>(pred.size())));
    }
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        report.pckh.emplace_back(alphas[k], 100.0 * static_cast<double>(correct[k]) /
                                                static_cast<double>(pckh_total));
    }
    return report;
}

}  // namespace heatcoord
