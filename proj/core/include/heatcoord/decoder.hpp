#pragma once

#include <optional>
#include <vector>

#include "heatcoord/grid.hpp"

namespace heatcoord {

/// Low-pass Gaussian filter applied before the log/derivative step of the
/// Taylor decoder.
struct SmoothSpec {
    double kernel_sigma = 2.0;
    int kernel_radius = 5;
    bool enabled = true;

    friend bool operator==(const SmoothSpec&, const SmoothSpec&) = default;
};

/// Throws DomainError unless kernel_sigma > 0 and, when enabled,
/// kernel_radius >= ceil(2 * kernel_sigma).
void validate(const SmoothSpec& spec);

enum class DecodeVariant { ArgMax, Standard, Dark, CoM };

const char* to_string(DecodeVariant variant) noexcept;

struct DecodeMethod {
    DecodeVariant variant = DecodeVariant::Dark;
    std::optional<SmoothSpec> dark_smoothing;  // only meaningful for Dark

    static DecodeMethod argmax() { return {DecodeVariant::ArgMax, std::nullopt}; }
    static DecodeMethod standard() { return {DecodeVariant::Standard, std::nullopt}; }
    static DecodeMethod dark(std::optional<SmoothSpec> smoothing = SmoothSpec{}) {
        return {DecodeVariant::Dark, smoothing};
    }
    static DecodeMethod com() { return {DecodeVariant::CoM, std::nullopt}; }
};

struct DecodeResult {
    Keypoint coord;             // heatmap pixels
    double peak_value = 0.0;    // activation at the maximal pixel
    bool fallback_used = false; // Dark only: Newton step rejected
};

/// Thresholds of the Taylor decoder.
inline constexpr double kLogFloor = 1e-10;
inline constexpr double kMinHessianDet = 1e-12;

/// Location of the maximal activation. Ties go to the smallest flat index.
/// Throws DegenerateHeatmapError when the channel has no positive value.
DecodeResult argmax_decode(const Heatmap& h, std::size_t joint);

/// Maximum shifted 0.25 px toward the (global) second-highest activation.
DecodeResult standard_decode(const Heatmap& h, std::size_t joint);

/// Separable Gaussian blur with reflect-101 borders, rescaled so the output
/// maximum equals the input maximum. Returns a single-channel heatmap.
Heatmap gaussian_smooth(const Heatmap& h, std::size_t joint, const SmoothSpec& spec);

/// One Newton step on the log-heatmap at the maximal pixel m:
/// mu = m - H^-1 g with central-difference gradient g and Hessian H.
/// The maximal pixel is taken from the unsmoothed channel. Falls back to
/// the argmax result (fallback_used = true) when m is on the border, the
/// Hessian is not negative definite, or the step leaves the unit box.
DecodeResult dark_decode(const Heatmap& h, std::size_t joint,
                         const std::optional<SmoothSpec>& smoothing);

/// Mass-normalized centroid of the whole channel.
DecodeResult com_decode(const Heatmap& h, std::size_t joint);

DecodeResult decode(const Heatmap& h, std::size_t joint, const DecodeMethod& method);

struct DecodedPose {
    Pose pose;  // original resolution, no head/neck
    std::vector<DecodeResult> results;  // heatmap resolution
};

/// Decode every channel and map to original resolution. Degenerate channels
/// are collected; the thrown DegenerateHeatmapError lists all of them and
/// carries every offending joint index.
DecodedPose decode_pose(const Heatmap& h, const DecodeMethod& method, const ScaleTransform& t);

}  // namespace heatcoord
