#pragma once

#include <span>
#include <string>
#include <string_view>

#include "heatcoord/bench.hpp"

namespace heatcoord {

// Bench configuration file: one `key = value` per line, `#` starts a
// comment. Unknown keys are errors. Keys and value syntax:
//
//   grid          = 64x64                  (W x H, heatmap px)
//   lambda        = 4  |  4,4              (original px per heatmap px)
//   sigma         = 2                      (encode sigma, heatmap px)
//   n_samples     = 1000
//   joints        = 4                      (>= 2: joint 0 head, joint 1 neck)
//   seed          = 0                      (u64)
//   margin        = 6                      (>= 3 * sigma)
//   encodings     = quantized,unbiased
//   decoders      = argmax,standard,dark,dark-nosmooth,com
//   noise_grid    = 0/0/0; 0.02/0/0        (pixel/jitter/sigma_jitter; empty allowed)
//   kernel_sigma  = 2                      (Dark low-pass filter)
//   kernel_radius = 5
//
// Keys not present keep the BenchConfig defaults.

/// Parse config text, then apply `overrides` ("key=value") in order.
/// Throws ConfigError naming the key (or "line N").
BenchConfig parse_bench_config(std::string_view text, std::span<const std::string> overrides = {});

void apply_setting(BenchConfig& config, std::string_view key, std::string_view value);

/// Canonical text: every key, fixed order, full-precision numbers.
/// parse_bench_config(to_config_text(c)) == c.
std::string to_config_text(const BenchConfig& config);

}  // namespace heatcoord
