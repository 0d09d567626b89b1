#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatcoord/decoder.hpp"
#include "heatcoord/encoder.hpp"
#include "heatcoord/grid.hpp"
#include "heatcoord/metrics.hpp"
#include "heatcoord/rng.hpp"

namespace heatcoord {

/// Corruption applied to a clean Gaussian to stand in for a network
/// prediction. All-zero reproduces the clean encoding bit for bit.
struct NoiseSpec {
    double pixel_noise_std = 0.0;    // additive per-pixel, activation units
    double center_jitter_std = 0.0;  // heatmap px
    double sigma_jitter_std = 0.0;   // relative
    bool clamp_negative = true;

    bool is_clean() const noexcept {
        return pixel_noise_std == 0.0 && center_jitter_std == 0.0 && sigma_jitter_std == 0.0;
    }
    std::string label() const;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// clean; pixel 0.02; pixel 0.05; jitter 0.5; pixel 0.02 + jitter 0.5.
std::vector<NoiseSpec> default_noise_grid();

enum class BenchDecoder { ArgMax, Standard, Dark, DarkNoSmooth, CoM };

const char* to_string(BenchDecoder d) noexcept;
std::optional<BenchDecoder> parse_bench_decoder(std::string_view name) noexcept;
DecodeMethod to_method(BenchDecoder d, const SmoothSpec& smoothing);

struct BenchConfig {
    GridShape grid{64, 64};
    ScaleTransform lambda{4.0, 4.0};
    double sigma = 2.0;
    std::size_t n_samples = 1000;
    std::size_t joints = 4;
    std::uint64_t seed = 0;
    std::vector<NoiseSpec> noise_grid = default_noise_grid();
    std::vector<EncodeMode> encodings{EncodeMode::Quantized, EncodeMode::Unbiased};
    std::vector<BenchDecoder> decoders{BenchDecoder::ArgMax, BenchDecoder::Standard,
                                       BenchDecoder::Dark, BenchDecoder::DarkNoSmooth,
                                       BenchDecoder::CoM};
    double margin = 6.0;  // heatmap px from every border
    SmoothSpec smoothing{};

    friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

/// Throws ConfigError naming the offending key.
void validate(const BenchConfig& config);

/// Hex FNV-1a 64 digest of the canonical config text.
std::string config_hash(const BenchConfig& config);

struct BenchRow {
    EncodeMode encoding = EncodeMode::Unbiased;
    BenchDecoder decoder = BenchDecoder::Dark;
    NoiseSpec noise;
    MetricReport metrics;  // original resolution; rmse is NaN if every sample was skipped
    std::size_t n_samples = 0;
    std::size_t skipped = 0;
    std::size_t fallbacks = 0;  // Dark joints that fell back to argmax

    friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

struct BenchReport {
    int claim = 1;
    BenchConfig config;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<BenchRow> rows;  // encoding-major, then decoder, then noise

    const BenchRow* find(EncodeMode encoding, BenchDecoder decoder, std::size_t noise_index) const;

    friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

struct RunOptions {
    unsigned workers = 1;
};

/// Ground-truth pose in original-resolution pixels. Joint 0 is the head,
/// joint 1 the neck; their distance lies in [4, min(N_u, N_v) / 4]
/// heatmap px. Every joint lies in [margin, N - 1 - margin].
Pose sample_pose(Rng& rng, const BenchConfig& config);

/// Noisy prediction for `gt`. `truth` selects whether the prediction is
/// centered on the exact or the quantized ground truth. Returns nullopt if
/// a jittered center stays outside the grid after 100 draws.
std::optional<Heatmap> simulate_prediction(const Pose& gt, const NoiseSpec& noise,
                                           const BenchConfig& config, Rng& rng,
                                           EncodeMode truth = EncodeMode::Unbiased);

/// Decoder comparison on unbiased predictions.
BenchReport run_claim1(const BenchConfig& config, RunOptions options = {});

/// Encoding comparison: predictions centered on quantized vs exact ground
/// truth, scored against the exact ground truth.
BenchReport run_claim2(const BenchConfig& config, RunOptions options = {});

struct ClaimCheck {
    std::string label;
    bool pass = false;
};

/// Per noise level: RMSE(dark) < RMSE(standard) < RMSE(argmax).
std::vector<ClaimCheck> check_claim1(const BenchReport& report);
/// Per (decoder, noise): RMSE(unbiased) <= RMSE(quantized).
std::vector<ClaimCheck> check_claim2(const BenchReport& report);

enum class ReportFormat { Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept;

/// CSV prints 6 significant digits; JSON prints full precision so that
/// parse_report_json(emit_report(r, Json)) == r.
std::string emit_report(const BenchReport& report, ReportFormat format);
BenchReport parse_report_json(std::string_view text);

}  // namespace heatcoord
