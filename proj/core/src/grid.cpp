#include "heatcoord/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatcoord/errors.hpp"

namespace heatcoord {

namespace {

void check_activation(double value, std::size_t offset) {
    if (!std::isfinite(value) || value < 0.0) {
        throw DomainError("activation at offset " + std::to_string(offset) +
                          " must be finite and non-negative");
    }
}

void check_shape(std::size_t joints, GridShape shape) {
    if (joints == 0) throw DomainError("heatmap needs at least one joint");
    if (shape.width < Heatmap::kMinSide || shape.height < Heatmap::kMinSide) {
        throw DomainError("heatmap grid must be at least 3x3, got " + std::to_string(shape.width) +
                          "x" + std::to_string(shape.height));
    }
}

}  // namespace

bool is_finite(const Keypoint& p) noexcept { return std::isfinite(p.u) && std::isfinite(p.v); }

Heatmap::Heatmap(std::size_t joints, GridShape shape) : joints_(joints), shape_(shape) {
    check_shape(joints, shape);
    data_.assign(joints * shape.width * shape.height, 0.0);
}

Heatmap::Heatmap(std::size_t joints, GridShape shape, std::vector<double> data)
    : joints_(joints), shape_(shape), data_(std::move(data)) {
    check_shape(joints, shape);
    if (data_.size() != joints * shape.width * shape.height) {
        throw DomainError("heatmap data has " + std::to_string(data_.size()) + " values, expected " +
                          std::to_string(joints * shape.width * shape.height));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) check_activation(data_[i], i);
}

void Heatmap::check_joint(std::size_t joint) const {
    if (joint >= joints_) {
        throw IndexError("joint " + std::to_string(joint) + " out of range (J=" +
                         std::to_string(joints_) + ")");
    }
}

std::size_t Heatmap::flat_index(std::size_t joint, std::size_t v, std::size_t u) const {
    check_joint(joint);
    if (v >= shape_.height || u >= shape_.width) {
        throw IndexError("pixel (u=" + std::to_string(u) + ", v=" + std::to_string(v) +
                         ") outside " + std::to_string(shape_.width) + "x" +
                         std::to_string(shape_.height) + " grid");
    }
    return joint * channel_size() + v * shape_.width + u;
}

GridIndex Heatmap::unflatten(std::size_t offset) const {
    if (offset >= data_.size()) {
        throw IndexError("flat offset " + std::to_string(offset) + " out of range");
    }
    const std::size_t joint = offset / channel_size();
    const std::size_t rem = offset % channel_size();
    return {joint, rem / shape_.width, rem % shape_.width};
}

double Heatmap::at(std::size_t joint, std::size_t v, std::size_t u) const {
    return data_[flat_index(joint, v, u)];
}

void Heatmap::set(std::size_t joint, std::size_t v, std::size_t u, double value) {
    const std::size_t offset = flat_index(joint, v, u);
    check_activation(value, offset);
    data_[offset] = value;
}

std::span<const double> Heatmap::channel(std::size_t joint) const {
    check_joint(joint);
    return std::span<const double>(data_).subspan(joint * channel_size(), channel_size());
}

void Heatmap::assign_channel(std::size_t joint, std::span<const double> values) {
    check_joint(joint);
    if (values.size() != channel_size()) {
        throw DomainError("channel has " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(channel_size()));
    }
    const std::size_t base = joint * channel_size();
    for (std::size_t i = 0; i < values.size(); ++i) check_activation(values[i], base + i);
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(base));
}

void validate(const Pose& pose) {
    if (pose.keypoints.empty()) throw DomainError("pose has no keypoints");
    for (std::size_t j = 0; j < pose.keypoints.size(); ++j) {
        if (!is_finite(pose.keypoints[j])) {
            throw DomainError("joint " + std::to_string(j) + " has a non-finite coordinate");
        }
    }
    if (pose.head_neck) {
        const auto [head, neck] = *pose.head_neck;
        if (head >= pose.size() || neck >= pose.size()) {
            throw DomainError("head/neck index out of range for " + std::to_string(pose.size()) +
                              "-joint pose");
        }
        if (head == neck) throw DomainError("head_index and neck_index must differ");
    }
}

ScaleTransform::ScaleTransform(double lu, double lv) : lambda_u(lu), lambda_v(lv) {
    if (!(std::isfinite(lu) && lu > 0.0) || !(std::isfinite(lv) && lv > 0.0)) {
        throw DomainError("scale factors must be finite and positive");
    }
}

Keypoint to_original(const ScaleTransform& t, const Keypoint& p) noexcept {
    return {t.lambda_u * p.u, t.lambda_v * p.v};
}

Keypoint to_heatmap(const ScaleTransform& t, const Keypoint& p) noexcept {
    return {p.u / t.lambda_u, p.v / t.lambda_v};
}

Pose to_original(const ScaleTransform& t, const Pose& p) {
    Pose out = p;
    for (auto& k : out.keypoints) k = to_original(t, k);
    return out;
}

Pose to_heatmap(const ScaleTransform& t, const Pose& p) {
    Pose out = p;
    for (auto& k : out.keypoints) k = to_heatmap(t, k);
    return out;
}

}  // namespace heatcoord
