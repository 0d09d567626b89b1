#include "heatcoord/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatcoord/errors.hpp"

namespace heatcoord {

namespace {

struct Peak {
    std::size_t offset;
    double value;
};

// First index of the maximum, optionally skipping one offset.
std::optional<Peak> find_max(std::span<const double> ch, std::optional<std::size_t> skip = {}) {
    std::optional<Peak> best;
    for (std::size_t i = 0; i < ch.size(); ++i) {
        if (skip && *skip == i) continue;
        if (!best || ch[i] > best->value) best = Peak{i, ch[i]};
    }
    return best;
}

Peak require_peak(const Heatmap& h, std::size_t joint) {
    const auto peak = find_max(h.channel(joint));
    if (!peak || peak->value <= 0.0) {
        throw DegenerateHeatmapError(joint, "channel has no positive activation");
    }
    return *peak;
}

Keypoint offset_to_coord(const Heatmap& h, std::size_t offset) {
    return {static_cast<double>(offset % h.width()), static_cast<double>(offset / h.width())};
}

// Reflect-101 border: ... c b | a b c d | c b ...
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

std::vector<double> gaussian_kernel(const SmoothSpec& spec) {
    std::vector<double> k(static_cast<std::size_t>(2 * spec.kernel_radius + 1));
    double sum = 0.0;
    for (int i = -spec.kernel_radius; i <= spec.kernel_radius; ++i) {
        const double x = static_cast<double>(i);
        const double w = std::exp(-x * x / (2.0 * spec.kernel_sigma * spec.kernel_sigma));
        k[static_cast<std::size_t>(i + spec.kernel_radius)] = w;
        sum += w;
    }
    for (auto& w : k) w /= sum;
    return k;
}

}  // namespace

void validate(const SmoothSpec& spec) {
    if (!(std::isfinite(spec.kernel_sigma) && spec.kernel_sigma > 0.0)) {
        throw DomainError("kernel_sigma must be positive");
    }
    if (spec.kernel_radius < 1) throw DomainError("kernel_radius must be >= 1");
    if (spec.enabled && spec.kernel_radius < std::ceil(2.0 * spec.kernel_sigma)) {
        throw DomainError("kernel_radius " + std::to_string(spec.kernel_radius) +
                          " too small for kernel_sigma " + std::to_string(spec.kernel_sigma) +
                          " (need >= ceil(2*sigma))");
    }
}

const char* to_string(DecodeVariant variant) noexcept {
    switch (variant) {
        case DecodeVariant::ArgMax: return "argmax";
        case DecodeVariant::Standard: return "standard";
        case DecodeVariant::Dark: return "dark";
        case DecodeVariant::CoM: return "com";
    }
    return "?";
}

DecodeResult argmax_decode(const Heatmap& h, std::size_t joint) {
    const Peak m = require_peak(h, joint);
    return {offset_to_coord(h, m.offset), m.value, false};
}

DecodeResult standard_decode(const Heatmap& h, std::size_t joint) {
    const Peak m = require_peak(h, joint);
    const Peak s = *find_max(h.channel(joint), m.offset);
    const Keypoint mc = offset_to_coord(h, m.offset);
    const Keypoint sc = offset_to_coord(h, s.offset);
    const double du = sc.u - mc.u;
    const double dv = sc.v - mc.v;
    const double norm = std::hypot(du, dv);
    return {{mc.u + 0.25 * du / norm, mc.v + 0.25 * dv / norm}, m.value, false};
}

Heatmap gaussian_smooth(const Heatmap& h, std::size_t joint, const SmoothSpec& spec) {
    validate(spec);
    const auto in = h.channel(joint);
    const std::size_t w = h.width();
    const std::size_t hh = h.height();
    const auto kernel = gaussian_kernel(spec);
    const int r = spec.kernel_radius;

    // Padded position p maps to source index table[p], p in [0, n + 2r).
    auto table = [r](std::size_t n) {
        std::vector<std::size_t> t(n + 2 * static_cast<std::size_t>(r));
        for (std::size_t p = 0; p < t.size(); ++p) {
            t[p] = reflect_index(static_cast<std::ptrdiff_t>(p) - r, n);
        }
        return t;
    };
    const auto cols = table(w);
    const auto lines = table(hh);
    const std::size_t taps = kernel.size();

    std::vector<double> rows(in.size());
    for (std::size_t v = 0; v < hh; ++v) {
        const double* src = in.data() + v * w;
        for (std::size_t u = 0; u < w; ++u) {
            double acc = 0.0;
            for (std::size_t t = 0; t < taps; ++t) acc += kernel[t] * src[cols[u + t]];
            rows[v * w + u] = acc;
        }
    }
    std::vector<double> out(in.size());
    for (std::size_t v = 0; v < hh; ++v) {
        for (std::size_t u = 0; u < w; ++u) {
            double acc = 0.0;
            for (std::size_t t = 0; t < taps; ++t) acc += kernel[t] * rows[lines[v + t] * w + u];
            out[v * w + u] = acc;
        }
    }

    const double in_max = *std::max_element(in.begin(), in.end());
    const double out_max = *std::max_element(out.begin(), out.end());
    if (out_max > 0.0) {
        const double scale = in_max / out_max;
        for (auto& x : out) x = std::max(0.0, x * scale);
    }
    return Heatmap(1, h.shape(), std::move(out));
}

DecodeResult dark_decode(const Heatmap& h, std::size_t joint,
                         const std::optional<SmoothSpec>& smoothing) {
    const DecodeResult base = argmax_decode(h, joint);
    const auto mu = static_cast<std::size_t>(base.coord.u);
    const auto mv = static_cast<std::size_t>(base.coord.v);
    DecodeResult fallback = base;
    fallback.fallback_used = true;
    if (mu == 0 || mv == 0 || mu + 1 >= h.width() || mv + 1 >= h.height()) return fallback;

    std::optional<Heatmap> smoothed;
    if (smoothing && smoothing->enabled) smoothed = gaussian_smooth(h, joint, *smoothing);
    const auto ch = smoothed ? smoothed->channel(0) : h.channel(joint);
    const std::size_t w = h.width();
    auto L = [&](std::size_t u, std::size_t v) { return std::log(std::max(ch[v * w + u], kLogFloor)); };

    const double center = L(mu, mv);
    const double right = L(mu + 1, mv);
    const double left = L(mu - 1, mv);
    const double down = L(mu, mv + 1);
    const double up = L(mu, mv - 1);

    const double gu = 0.5 * (right - left);
    const double gv = 0.5 * (down - up);
    const double huu = right - 2.0 * center + left;
    const double hvv = down - 2.0 * center + up;
    const double huv = 0.25 * (L(mu + 1, mv + 1) - L(mu + 1, mv - 1) - L(mu - 1, mv + 1) +
                               L(mu - 1, mv - 1));

    const double det = huu * hvv - huv * huv;
    if (!(huu < 0.0) || !(det > kMinHessianDet)) return fallback;

    const double du = -(hvv * gu - huv * gv) / det;
    const double dv = -(huu * gv - huv * gu) / det;
    if (!std::isfinite(du) || !std::isfinite(dv) || std::max(std::abs(du), std::abs(dv)) > 1.0) {
        return fallback;
    }
    return {{base.coord.u + du, base.coord.v + dv}, base.peak_value, false};
}

DecodeResult com_decode(const Heatmap& h, std::size_t joint) {
    const auto ch = h.channel(joint);
    // Extended-precision sums keep the result stable under rescaling.
    long double mass = 0.0L;
    long double su = 0.0L;
    long double sv = 0.0L;
    for (std::size_t v = 0; v < h.height(); ++v) {
        for (std::size_t u = 0; u < h.width(); ++u) {
            const long double m = ch[v * h.width() + u];
            mass += m;
            su += m * static_cast<long double>(u);
            sv += m * static_cast<long double>(v);
        }
    }
    if (!(mass > 0.0L)) throw DegenerateHeatmapError(joint, "channel has zero total mass");
    const auto peak = *find_max(ch);
    return {{static_cast<double>(su / mass), static_cast<double>(sv / mass)}, peak.value, false};
}

DecodeResult decode(const Heatmap& h, std::size_t joint, const DecodeMethod& method) {
    switch (method.variant) {
        case DecodeVariant::ArgMax: return argmax_decode(h, joint);
        case DecodeVariant::Standard: return standard_decode(h, joint);
        case DecodeVariant::Dark: return dark_decode(h, joint, method.dark_smoothing);
        case DecodeVariant::CoM: return com_decode(h, joint);
    }
    throw ContractError("unknown decode variant");
}

DecodedPose decode_pose(const Heatmap& h, const DecodeMethod& method, const ScaleTransform& t) {
    if (method.dark_smoothing && method.variant != DecodeVariant::Dark) {
        throw ContractError("smoothing is only valid for the Dark decoder");
    }
    if (method.dark_smoothing) validate(*method.dark_smoothing);
    DecodedPose out;
    out.results.reserve(h.joints());
    std::vector<std::size_t> bad;
    std::string messages;
    for (std::size_t j = 0; j < h.joints(); ++j) {
        try {
            out.results.push_back(decode(h, j, method));
            out.pose.keypoints.push_back(to_original(t, out.results.back().coord));
        } catch (const DegenerateHeatmapError& e) {
            bad.push_back(j);
            messages += (messages.empty() ? "" : "; ") + std::string(e.what());
        }
    }
    if (!bad.empty()) throw DegenerateHeatmapError(std::move(bad), messages);
    return out;
}

}  // namespace heatcoord
