#include "heatcoord/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "heatcoord/bench_config.hpp"
#include "heatcoord/errors.hpp"

namespace heatcoord {

namespace {

constexpr int kMaxJitterDraws = 100;
constexpr int kMaxPoseDraws = 10000;
constexpr double kMinHeadSegment = 4.0;
constexpr double kMinJitteredSigma = 0.5;

double max_head_segment(const BenchConfig& c) {
    return 0.25 * static_cast<double>(std::min(c.grid.width, c.grid.height));
}

double hi_u(const BenchConfig& c) { return static_cast<double>(c.grid.width) - 1.0 - c.margin; }
double hi_v(const BenchConfig& c) { return static_cast<double>(c.grid.height) - 1.0 - c.margin; }

bool inside(const Keypoint& p, GridShape g) {
    return p.u >= 0.0 && p.v >= 0.0 && p.u <= static_cast<double>(g.width) - 1.0 &&
           p.v <= static_cast<double>(g.height) - 1.0;
}

// Outputs for one sample: for each (encoding, noise) prediction either a
// skip mark or one decoded coordinate per (decoder, joint).
struct Cell {
    std::vector<Keypoint> coords;          // samples * joints, heatmap px
    std::vector<std::uint8_t> fallback;    // samples * joints
};

BenchReport run(const BenchConfig& config, int claim, std::vector<EncodeMode> encodings,
                RunOptions options) {
    validate(config);
    const std::size_t n = config.n_samples;
    const std::size_t J = config.joints;
    const std::size_t E = encodings.size();
    const std::size_t K = config.noise_grid.size();
    const std::size_t D = config.decoders.size();

    std::vector<Pose> gts(n);
    std::vector<std::uint8_t> skipped(E * K * n, 0);
    std::vector<Cell> cells(E * K * D);
    for (auto& c : cells) {
        c.coords.resize(n * J);
        c.fallback.resize(n * J, 0);
    }
    std::vector<DecodeMethod> methods;
    for (auto d : config.decoders) methods.push_back(to_method(d, config.smoothing));

    auto process = [&](std::size_t i) {
        const std::uint64_t sample_seed = derive_seed(config.seed, i);
        Rng pose_rng(derive_seed(sample_seed, 0));
        gts[i] = sample_pose(pose_rng, config);
        for (std::size_t k = 0; k < K; ++k) {
            // Same stream for every encoding so the comparison is paired.
            const std::uint64_t noise_seed = derive_seed(sample_seed, k + 1);
            for (std::size_t e = 0; e < E; ++e) {
                Rng rng(noise_seed);
                const auto heatmap = simulate_prediction(gts[i], config.noise_grid[k], config, rng, encodings[e]);
                if (!heatmap) {
                    skipped[(e * K + k) * n + i] = 1;
                    continue;
                }
                for (std::size_t d = 0; d < D; ++d) {
                    Cell& cell = cells[(e * K + k) * D + d];
                    for (std::size_t j = 0; j < J; ++j) {
                        const DecodeResult r = decode(*heatmap, j, methods[d]);
                        cell.coords[i * J + j] = r.coord;
                        cell.fallback[i * J + j] = r.fallback_used ? 1 : 0;
                    }
                }
            }
        }
    };

    const unsigned workers = std::max(1u, options.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) process(i);
    } else {
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t i = w; i < n; i += workers) process(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    // Reduction runs in sample order so the result does not depend on the
    // worker count.
    BenchReport report;
    report.claim = claim;
    report.config = config;
    report.config_hash = config_hash(config);
    report.seed = config.seed;
    for (std::size_t e = 0; e < E; ++e) {
        for (std::size_t d = 0; d < D; ++d) {
            for (std::size_t k = 0; k < K; ++k) {
                const Cell& cell = cells[(e * K + k) * D + d];
                BenchRow row;
                row.encoding = encodings[e];
                row.decoder = config.decoders[d];
                row.noise = config.noise_grid[k];
                row.n_samples = n;
                std::vector<Pose> pred;
                std::vector<Pose> gt;
                for (std::size_t i = 0; i < n; ++i) {
                    if (skipped[(e * K + k) * n + i]) {
                        ++row.skipped;
                        continue;
                    }
                    Pose p;
                    for (std::size_t j = 0; j < J; ++j) {
                        p.keypoints.push_back(to_original(config.lambda, cell.coords[i * J + j]));
                        row.fallbacks += cell.fallback[i * J + j];
                    }
                    pred.push_back(std::move(p));
                    gt.push_back(gts[i]);
                }
                if (pred.empty()) {
                    row.metrics.rmse = std::numeric_limits<double>::quiet_NaN();
                } else {
                    row.metrics = evaluate(pred, gt, kDefaultPckhAlphas);
                }
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double pckh_or_nan(const MetricReport& m, double alpha) {
    for (const auto& [a, v] : m.pckh) {
        if (a == alpha) return v;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

double number_from(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string NoiseSpec::label() const {
    if (is_clean()) return "clean";
    std::string out;
    auto add = [&out](const char* name, double v) {
        if (v == 0.0) return;
        if (!out.empty()) out += " + ";
        out += name;
        out += ' ';
        out += fmt6(v);
    };
    add("pixel", pixel_noise_std);
    add("jitter", center_jitter_std);
    add("sigma-jitter", sigma_jitter_std);
    return out;
}

std::vector<NoiseSpec> default_noise_grid() {
    return {
        NoiseSpec{},
        NoiseSpec{0.02, 0.0, 0.0},
        NoiseSpec{0.05, 0.0, 0.0},
        NoiseSpec{0.0, 0.5, 0.0},
        NoiseSpec{0.02, 0.5, 0.0},
    };
}

const char* to_string(BenchDecoder d) noexcept {
    switch (d) {
        case BenchDecoder::ArgMax: return "argmax";
        case BenchDecoder::Standard: return "standard";
        case BenchDecoder::Dark: return "dark";
        case BenchDecoder::DarkNoSmooth: return "dark-nosmooth";
        case BenchDecoder::CoM: return "com";
    }
    return "?";
}

std::optional<BenchDecoder> parse_bench_decoder(std::string_view name) noexcept {
    for (auto d : {BenchDecoder::ArgMax, BenchDecoder::Standard, BenchDecoder::Dark,
                   BenchDecoder::DarkNoSmooth, BenchDecoder::CoM}) {
        if (name == to_string(d)) return d;
    }
    return std::nullopt;
}

DecodeMethod to_method(BenchDecoder d, const SmoothSpec& smoothing) {
    switch (d) {
        case BenchDecoder::ArgMax: return DecodeMethod::argmax();
        case BenchDecoder::Standard: return DecodeMethod::standard();
        case BenchDecoder::Dark: return DecodeMethod::dark(smoothing);
        case BenchDecoder::DarkNoSmooth: return DecodeMethod::dark(std::nullopt);
        case BenchDecoder::CoM: return DecodeMethod::com();
    }
    throw ContractError("unknown decoder");
}

void validate(const BenchConfig& c) {
    if (c.grid.width < Heatmap::kMinSide || c.grid.height < Heatmap::kMinSide) {
        throw ConfigError("grid", "must be at least 3x3");
    }
    if (!(std::isfinite(c.sigma) && c.sigma > 0.0)) throw ConfigError("sigma", "must be positive");
    if (!(c.lambda.lambda_u > 0.0 && c.lambda.lambda_v > 0.0)) {
        throw ConfigError("lambda", "must be positive");
    }
    if (c.joints < 2) throw ConfigError("joints", "need at least 2 (head and neck)");
    if (!(std::isfinite(c.margin) && c.margin >= 3.0 * c.sigma)) {
        throw ConfigError("margin", "must be >= 3 * sigma (" + fmt6(3.0 * c.sigma) + ")");
    }
    if (max_head_segment(c) < kMinHeadSegment) {
        throw ConfigError("grid", "min(W, H) must be >= 16 for the head-segment constraint");
    }
    const double span_u = hi_u(c) - c.margin;
    const double span_v = hi_v(c) - c.margin;
    if (span_u < 0.0 || span_v < 0.0 || std::hypot(span_u, span_v) < kMinHeadSegment) {
        throw ConfigError("margin", "leaves no room for a head segment of length 4");
    }
    for (std::size_t i = 0; i < c.noise_grid.size(); ++i) {
        const auto& n = c.noise_grid[i];
        const bool ok = n.pixel_noise_std >= 0.0 && n.center_jitter_std >= 0.0 &&
                        n.sigma_jitter_std >= 0.0 && std::isfinite(n.pixel_noise_std) &&
                        std::isfinite(n.center_jitter_std) && std::isfinite(n.sigma_jitter_std);
        if (!ok) throw ConfigError("noise_grid[" + std::to_string(i) + "]", "stds must be finite and >= 0");
        if (!n.clamp_negative) throw ConfigError("noise_grid[" + std::to_string(i) + "]", "clamp_negative is fixed to true");
    }
    if (c.encodings.empty()) throw ConfigError("encodings", "must not be empty");
    if (c.decoders.empty()) throw ConfigError("decoders", "must not be empty");
    try {
        heatcoord::validate(c.smoothing);
    } catch (const DomainError& e) {
        throw ConfigError("kernel_radius", e.what());
    }
}

const BenchRow* BenchReport::find(EncodeMode encoding, BenchDecoder decoder,
                                  std::size_t noise_index) const {
    if (noise_index >= config.noise_grid.size()) return nullptr;
    const auto& noise = config.noise_grid[noise_index];
    for (const auto& row : rows) {
        if (row.encoding == encoding && row.decoder == decoder && row.noise == noise) return &row;
    }
    return nullptr;
}

Pose sample_pose(Rng& rng, const BenchConfig& c) {
    validate(c);
    auto draw = [&] { return Keypoint{rng.uniform(c.margin, hi_u(c)), rng.uniform(c.margin, hi_v(c))}; };
    Pose pose;
    pose.head_neck = HeadNeck{0, 1};
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPoseDraws && !ok; ++attempt) {
        const Keypoint head = draw();
        const Keypoint neck = draw();
        const double len = std::hypot(head.u - neck.u, head.v - neck.v);
        if (len >= kMinHeadSegment && len <= max_head_segment(c)) {
            pose.keypoints = {head, neck};
            ok = true;
        }
    }
    if (!ok) throw ConfigError("margin", "could not place a head segment in the interior");
    for (std::size_t j = 2; j < c.joints; ++j) pose.keypoints.push_back(draw());
    return to_original(c.lambda, pose);
}

std::optional<Heatmap> simulate_prediction(const Pose& gt, const NoiseSpec& noise,
                                           const BenchConfig& c, Rng& rng, EncodeMode truth) {
    const Pose hm = to_heatmap(c.lambda, gt);
    std::vector<double> data;
    data.reserve(hm.size() * c.grid.width * c.grid.height);
    for (std::size_t j = 0; j < hm.size(); ++j) {
        Keypoint center = truth == EncodeMode::Quantized ? quantize(hm.keypoints[j]) : hm.keypoints[j];
        if (noise.center_jitter_std > 0.0) {
            bool placed = false;
            for (int attempt = 0; attempt < kMaxJitterDraws && !placed; ++attempt) {
                const Keypoint moved{center.u + rng.normal(0.0, noise.center_jitter_std),
                                     center.v + rng.normal(0.0, noise.center_jitter_std)};
                if (inside(moved, c.grid)) {
                    center = moved;
                    placed = true;
                }
            }
            if (!placed) return std::nullopt;
        }
        double sigma = c.sigma;
        if (noise.sigma_jitter_std > 0.0) {
            sigma = std::max(kMinJitteredSigma, c.sigma * (1.0 + rng.normal(0.0, noise.sigma_jitter_std)));
        }
        const Heatmap channel = encode(center, EncodeSpec{sigma, EncodeMode::Unbiased}, c.grid);
        const auto values = channel.channel(0);
        if (noise.pixel_noise_std > 0.0) {
            for (double x : values) data.push_back(std::max(0.0, x + rng.normal(0.0, noise.pixel_noise_std)));
        } else {
            data.insert(data.end(), values.begin(), values.end());
        }
    }
    return Heatmap(hm.size(), c.grid, std::move(data));
}

BenchReport run_claim1(const BenchConfig& config, RunOptions options) {
    return run(config, 1, {EncodeMode::Unbiased}, options);
}

BenchReport run_claim2(const BenchConfig& config, RunOptions options) {
    return run(config, 2, config.encodings, options);
}

std::vector<ClaimCheck> check_claim1(const BenchReport& report) {
    std::vector<ClaimCheck> checks;
    for (std::size_t k = 0; k < report.config.noise_grid.size(); ++k) {
        const auto* dark = report.find(EncodeMode::Unbiased, BenchDecoder::Dark, k);
        const auto* standard = report.find(EncodeMode::Unbiased, BenchDecoder::Standard, k);
        const auto* argmax = report.find(EncodeMode::Unbiased, BenchDecoder::ArgMax, k);
        if (!dark || !standard || !argmax) continue;
        const double a = dark->metrics.rmse;
        const double b = standard->metrics.rmse;
        const double c = argmax->metrics.rmse;
        checks.push_back({"[" + report.config.noise_grid[k].label() + "] RMSE dark < standard < argmax (" +
                              fmt6(a) + " < " + fmt6(b) + " < " + fmt6(c) + ")",
                          a < b && b < c});
    }
    return checks;
}

std::vector<ClaimCheck> check_claim2(const BenchReport& report) {
    std::vector<ClaimCheck> checks;
    for (auto d : report.config.decoders) {
        for (std::size_t k = 0; k < report.config.noise_grid.size(); ++k) {
            const auto* u = report.find(EncodeMode::Unbiased, d, k);
            const auto* q = report.find(EncodeMode::Quantized, d, k);
            if (!u || !q) continue;
            checks.push_back({"[" + std::string(to_string(d)) + ", " + report.config.noise_grid[k].label() +
                                  "] Unbiased <= Quantized (" + fmt6(u->metrics.rmse) + " <= " +
                                  fmt6(q->metrics.rmse) + ")",
                              u->metrics.rmse <= q->metrics.rmse});
        }
    }
    return checks;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::string emit_report(const BenchReport& report, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out =
            "encoding,decoder,pixel_noise_std,center_jitter_std,sigma_jitter_std,pckh01,pckh05,rmse,n,skipped\n";
        for (const auto& r : report.rows) {
            out += std::string(to_string(r.encoding)) + "," + to_string(r.decoder) + "," +
                   fmt6(r.noise.pixel_noise_std) + "," + fmt6(r.noise.center_jitter_std) + "," +
                   fmt6(r.noise.sigma_jitter_std) + "," + fmt6(pckh_or_nan(r.metrics, 0.1)) + "," +
                   fmt6(pckh_or_nan(r.metrics, 0.5)) + "," + fmt6(r.metrics.rmse) + "," +
                   std::to_string(r.n_samples) + "," + std::to_string(r.skipped) + "\n";
        }
        return out;
    }

    using nlohmann::json;
    const auto& c = report.config;
    json config = {
        {"grid", {c.grid.width, c.grid.height}},
        {"lambda", {c.lambda.lambda_u, c.lambda.lambda_v}},
        {"sigma", c.sigma},
        {"n_samples", c.n_samples},
        {"joints", c.joints},
        {"seed", c.seed},
        {"margin", c.margin},
        {"kernel_sigma", c.smoothing.kernel_sigma},
        {"kernel_radius", c.smoothing.kernel_radius},
    };
    config["encodings"] = json::array();
    for (auto e : c.encodings) config["encodings"].push_back(to_string(e));
    config["decoders"] = json::array();
    for (auto d : c.decoders) config["decoders"].push_back(to_string(d));
    config["noise_grid"] = json::array();
    for (const auto& n : c.noise_grid) {
        config["noise_grid"].push_back({{"pixel_noise_std", n.pixel_noise_std},
                                        {"center_jitter_std", n.center_jitter_std},
                                        {"sigma_jitter_std", n.sigma_jitter_std}});
    }
    json rows = json::array();
    for (const auto& r : report.rows) {
        json pckh = json::array();
        for (const auto& [a, v] : r.metrics.pckh) pckh.push_back({a, v});
        rows.push_back({
            {"encoding", to_string(r.encoding)},
            {"decoder", to_string(r.decoder)},
            {"noise", {{"pixel_noise_std", r.noise.pixel_noise_std},
                       {"center_jitter_std", r.noise.center_jitter_std},
                       {"sigma_jitter_std", r.noise.sigma_jitter_std}}},
            {"rmse", number_or_null(r.metrics.rmse)},
            {"pckh", pckh},
            {"per_joint_rmse", r.metrics.per_joint_rmse},
            {"n_samples", r.n_samples},
            {"skipped", r.skipped},
            {"fallbacks", r.fallbacks},
            {"n_joints_evaluated", r.metrics.n_joints_evaluated},
            {"n_pckh_excluded", r.metrics.n_pckh_excluded},
        });
    }
    json root = {
        {"claim", report.claim},
        {"seed", report.seed},
        {"config_hash", report.config_hash},
        {"config", config},
        {"rows", rows},
    };
    return root.dump(2) + "\n";
}

BenchReport parse_report_json(std::string_view text) {
    using nlohmann::json;
    BenchReport report;
    try {
        const json root = json::parse(text);
        report.claim = root.at("claim").get<int>();
        report.seed = root.at("seed").get<std::uint64_t>();
        report.config_hash = root.at("config_hash").get<std::string>();
        const auto& c = root.at("config");
        BenchConfig& cfg = report.config;
        cfg.grid = {c.at("grid").at(0).get<std::size_t>(), c.at("grid").at(1).get<std::size_t>()};
        cfg.lambda = ScaleTransform(c.at("lambda").at(0).get<double>(), c.at("lambda").at(1).get<double>());
        cfg.sigma = c.at("sigma").get<double>();
        cfg.n_samples = c.at("n_samples").get<std::size_t>();
        cfg.joints = c.at("joints").get<std::size_t>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        cfg.margin = c.at("margin").get<double>();
        cfg.smoothing.kernel_sigma = c.at("kernel_sigma").get<double>();
        cfg.smoothing.kernel_radius = c.at("kernel_radius").get<int>();
        cfg.encodings.clear();
        for (const auto& e : c.at("encodings")) {
            const auto s = e.get<std::string>();
            cfg.encodings.push_back(s == "quantized" ? EncodeMode::Quantized : EncodeMode::Unbiased);
        }
        cfg.decoders.clear();
        for (const auto& d : c.at("decoders")) {
            const auto parsed = parse_bench_decoder(d.get<std::string>());
            if (!parsed) throw ContractError("unknown decoder in report");
            cfg.decoders.push_back(*parsed);
        }
        auto noise_from = [](const json& n) {
            return NoiseSpec{n.at("pixel_noise_std").get<double>(), n.at("center_jitter_std").get<double>(),
                             n.at("sigma_jitter_std").get<double>()};
        };
        cfg.noise_grid.clear();
        for (const auto& n : c.at("noise_grid")) cfg.noise_grid.push_back(noise_from(n));

        for (const auto& r : root.at("rows")) {
            BenchRow row;
            row.encoding = r.at("encoding").get<std::string>() == "quantized" ? EncodeMode::Quantized
                                                                             : EncodeMode::Unbiased;
            const auto d = parse_bench_decoder(r.at("decoder").get<std::string>());
            if (!d) throw ContractError("unknown decoder in report");
            row.decoder = *d;
            row.noise = noise_from(r.at("noise"));
            row.metrics.rmse = number_from(r.at("rmse"));
            for (const auto& p : r.at("pckh")) row.metrics.pckh.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            row.metrics.per_joint_rmse = r.at("per_joint_rmse").get<std::vector<double>>();
            row.n_samples = r.at("n_samples").get<std::size_t>();
            row.skipped = r.at("skipped").get<std::size_t>();
            row.fallbacks = r.at("fallbacks").get<std::size_t>();
            row.metrics.n_samples = row.n_samples - row.skipped;
            row.metrics.n_joints_evaluated = r.at("n_joints_evaluated").get<std::size_t>();
            row.metrics.n_pckh_excluded = r.at("n_pckh_excluded").get<std::size_t>();
            report.rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw ContractError(std::string("malformed bench report: ") + e.what());
    }
    return report;
}

}  // namespace heatcoord
