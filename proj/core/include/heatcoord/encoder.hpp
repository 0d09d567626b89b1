#pragma once

#include "heatcoord/grid.hpp"

namespace heatcoord {

enum class EncodeMode {
    Quantized,  // center rounded to the nearest grid point ("w/ quant")
    Unbiased,   // center kept at the sub-pixel coordinate ("w/o quant")
};

const char* to_string(EncodeMode mode) noexcept;

/// Ground-truth heatmap parameters. The Gaussian is unnormalized with
/// peak 1.0 at its continuous center and is evaluated on the whole grid.
struct EncodeSpec {
    double sigma = 2.0;
    EncodeMode mode = EncodeMode::Unbiased;
};

/// Round each component to the nearest integer, halves away from zero.
Keypoint quantize(const Keypoint& p) noexcept;

/// Single-joint heatmap with value exp(-|p - c|^2 / (2 sigma^2)) at every
/// pixel p, where c is `center` (Unbiased) or `quantize(center)` (Quantized).
/// Throws DomainError when the center lies outside [0, N-1] on either axis
/// or sigma is not positive.
Heatmap encode(const Keypoint& center, const EncodeSpec& spec, GridShape shape);

/// One channel per keypoint. Errors name the offending joint.
Heatmap encode_pose(const Pose& pose, const EncodeSpec& spec, GridShape shape);

}  // namespace heatcoord
