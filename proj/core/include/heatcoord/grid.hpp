#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace heatcoord {

/// Continuous 2D coordinate in pixels. `u` runs along columns (width),
/// `v` along rows (height). Integer coordinates are pixel centers.
struct Keypoint {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

bool is_finite(const Keypoint& p) noexcept;

struct GridShape {
    std::size_t width = 0;   // N_u
    std::size_t height = 0;  // N_v

    friend bool operator==(const GridShape&, const GridShape&) = default;
};

struct GridIndex {
    std::size_t joint = 0;
    std::size_t v = 0;
    std::size_t u = 0;

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// J x H x W grid of non-negative activations, stored joint-major, then
/// row, then column. Every activation is finite and >= 0; the setters and
/// constructors enforce this.
class Heatmap {
public:
    static constexpr std::size_t kMinSide = 3;

    /// Zero-filled heatmap.
    Heatmap(std::size_t joints, GridShape shape);
    Heatmap(std::size_t joints, GridShape shape, std::vector<double> data);

    std::size_t joints() const noexcept { return joints_; }
    std::size_t height() const noexcept { return shape_.height; }
    std::size_t width() const noexcept { return shape_.width; }
    GridShape shape() const noexcept { return shape_; }
    std::size_t channel_size() const noexcept { return shape_.width * shape_.height; }

    std::size_t flat_index(std::size_t joint, std::size_t v, std::size_t u) const;
    GridIndex unflatten(std::size_t offset) const;

    /// Bounds-checked read; throws IndexError.
    double at(std::size_t joint, std::size_t v, std::size_t u) const;
    void set(std::size_t joint, std::size_t v, std::size_t u, double value);

    std::span<const double> channel(std::size_t joint) const;
    std::span<const double> data() const noexcept { return data_; }

    /// Replace a whole channel. Values are validated.
    void assign_channel(std::size_t joint, std::span<const double> values);

    friend bool operator==(const Heatmap&, const Heatmap&) = default;

private:
    void check_joint(std::size_t joint) const;

    std::size_t joints_;
    GridShape shape_;
    std::vector<double> data_;
};

/// `pixel_at` under the name used throughout the docs.
inline double pixel_at(const Heatmap& h, std::size_t joint, std::size_t u, std::size_t v) {
    return h.at(joint, v, u);
}

/// Joint indices used for PCKh normalization (neck-to-head segment).
struct HeadNeck {
    std::size_t head = 0;
    std::size_t neck = 1;

    friend bool operator==(const HeadNeck&, const HeadNeck&) = default;
};

/// Ordered keypoints. `head_neck` is optional because poses decoded from a
/// heatmap carry no skeleton information; only ground truth used for PCKh
/// needs it.
struct Pose {
    std::vector<Keypoint> keypoints;
    std::optional<HeadNeck> head_neck;

    std::size_t size() const noexcept { return keypoints.size(); }

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Throws DomainError if keypoints are empty or non-finite, or if head/neck
/// indices are out of range or equal.
void validate(const Pose& pose);

/// Original-image pixels per heatmap pixel, per axis.
struct ScaleTransform {
    double lambda_u = 1.0;
    double lambda_v = 1.0;

    ScaleTransform() = default;
    ScaleTransform(double lu, double lv);
    explicit ScaleTransform(double both) : ScaleTransform(both, both) {}

    friend bool operator==(const ScaleTransform&, const ScaleTransform&) = default;
};

Keypoint to_original(const ScaleTransform& t, const Keypoint& p) noexcept;
Keypoint to_heatmap(const ScaleTransform& t, const Keypoint& p) noexcept;
Pose to_original(const ScaleTransform& t, const Pose& p);
Pose to_heatmap(const ScaleTransform& t, const Pose& p);

}  // namespace heatcoord
