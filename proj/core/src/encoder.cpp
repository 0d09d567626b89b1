#include "heatcoord/encoder.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "heatcoord/errors.hpp"

namespace heatcoord {

namespace {

void check_inputs(const Keypoint& center, const EncodeSpec& spec, GridShape shape) {
    if (!(std::isfinite(spec.sigma) && spec.sigma > 0.0)) {
        throw DomainError("sigma must be positive, got " + std::to_string(spec.sigma));
    }
    const double max_u = static_cast<double>(shape.width) - 1.0;
    const double max_v = static_cast<double>(shape.height) - 1.0;
    if (!is_finite(center) || center.u < 0.0 || center.u > max_u || center.v < 0.0 ||
        center.v > max_v) {
        throw DomainError("center (" + std::to_string(center.u) + ", " + std::to_string(center.v) +
                          ") lies outside the " + std::to_string(shape.width) + "x" +
                          std::to_string(shape.height) + " grid");
    }
}

void fill_channel(const Keypoint& center, const EncodeSpec& spec, GridShape shape,
                  std::vector<double>& out, std::size_t base) {
    const Keypoint c = spec.mode == EncodeMode::Quantized ? quantize(center) : center;
    const double denom = 2.0 * spec.sigma * spec.sigma;
    for (std::size_t v = 0; v < shape.height; ++v) {
        const double dv = static_cast<double>(v) - c.v;
        for (std::size_t u = 0; u < shape.width; ++u) {
            const double du = static_cast<double>(u) - c.u;
            out[base + v * shape.width + u] = std::exp(-(du * du + dv * dv) / denom);
        }
    }
}

}  // namespace

const char* to_string(EncodeMode mode) noexcept {
    return mode == EncodeMode::Quantized ? "quantized" : "unbiased";
}

Keypoint quantize(const Keypoint& p) noexcept { return {std::round(p.u), std::round(p.v)}; }

Heatmap encode(const Keypoint& center, const EncodeSpec& spec, GridShape shape) {
    Heatmap probe(1, shape);  // validates the grid
    check_inputs(center, spec, shape);
    std::vector<double> data(shape.width * shape.height);
    fill_channel(center, spec, shape, data, 0);
    return Heatmap(1, shape, std::move(data));
}

Heatmap encode_pose(const Pose& pose, const EncodeSpec& spec, GridShape shape) {
    if (pose.keypoints.empty()) throw DomainError("pose has no keypoints");
    Heatmap probe(pose.size(), shape);
    std::vector<double> data(pose.size() * shape.width * shape.height);
    for (std::size_t j = 0; j < pose.size(); ++j) {
        try {
            check_inputs(pose.keypoints[j], spec, shape);
        } catch (const DomainError& e) {
            throw DomainError("joint " + std::to_string(j) + ": " + e.what());
        }
        fill_channel(pose.keypoints[j], spec, shape, data, j * shape.width * shape.height);
    }
    return Heatmap(pose.size(), shape, std::move(data));
}

}  // namespace heatcoord
