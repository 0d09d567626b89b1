#include "heatcoord/bench_config.hpp"

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

#include "heatcoord/errors.hpp"

namespace heatcoord {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_double(std::string_view key, std::string_view text) {
    // std::from_chars for double is available in libstdc++ >= 11.
    double x = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ConfigError(std::string(key), "expected a number, got \"" + std::string(text) + "\"");
    }
    return x;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
    std::uint64_t x = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ConfigError(std::string(key), "expected a non-negative integer, got \"" +
                                                std::string(text) + "\"");
    }
    return x;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void apply_setting(BenchConfig& c, std::string_view key, std::string_view value) {
    const std::string k(key);
    value = trim(value);
    if (key == "grid") {
        const auto x = value.find('x');
        if (x == std::string_view::npos) throw ConfigError(k, "expected WxH");
        c.grid = {static_cast<std::size_t>(parse_u64(key, value.substr(0, x))),
                  static_cast<std::size_t>(parse_u64(key, value.substr(x + 1)))};
    } else if (key == "lambda") {
        const auto parts = split(value, ',');
        if (parts.size() > 2) throw ConfigError(k, "expected f or f,f");
        const double lu = parse_double(key, parts[0]);
        const double lv = parts.size() == 2 ? parse_double(key, parts[1]) : lu;
        if (!(lu > 0.0 && lv > 0.0)) throw ConfigError(k, "must be positive");
        c.lambda = ScaleTransform(lu, lv);
    } else if (key == "sigma") {
        c.sigma = parse_double(key, value);
    } else if (key == "n_samples") {
        c.n_samples = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "joints") {
        c.joints = static_cast<std::size_t>(parse_u64(key, value));
    } else if (key == "seed") {
        c.seed = parse_u64(key, value);
    } else if (key == "margin") {
        c.margin = parse_double(key, value);
    } else if (key == "kernel_sigma") {
        c.smoothing.kernel_sigma = parse_double(key, value);
    } else if (key == "kernel_radius") {
        c.smoothing.kernel_radius = static_cast<int>(parse_u64(key, value));
    } else if (key == "encodings") {
        c.encodings.clear();
        for (auto name : split(value, ',')) {
            if (name == "quantized") c.encodings.push_back(EncodeMode::Quantized);
            else if (name == "unbiased") c.encodings.push_back(EncodeMode::Unbiased);
            else throw ConfigError(k, "unknown encoding \"" + std::string(name) + "\"");
        }
    } else if (key == "decoders") {
        c.decoders.clear();
        for (auto name : split(value, ',')) {
            const auto d = parse_bench_decoder(name);
            if (!d) throw ConfigError(k, "unknown decoder \"" + std::string(name) + "\"");
            c.decoders.push_back(*d);
        }
    } else if (key == "noise_grid") {
        c.noise_grid.clear();
        if (value.empty()) return;
        const auto cells = split(value, ';');
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto field = k + "[" + std::to_string(i) + "]";
            const auto parts = split(cells[i], '/');
            if (parts.size() != 3) throw ConfigError(field, "expected pixel/jitter/sigma_jitter");
            NoiseSpec n;
            n.pixel_noise_std = parse_double(field, parts[0]);
            n.center_jitter_std = parse_double(field, parts[1]);
            n.sigma_jitter_std = parse_double(field, parts[2]);
            c.noise_grid.push_back(n);
        }
    } else {
        throw ConfigError(k, "unknown key");
    }
}

BenchConfig parse_bench_config(std::string_view text, std::span<const std::string> overrides) {
    BenchConfig config;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        }
        apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError(o, "override must be key=value");
        apply_setting(config, trim(std::string_view(o).substr(0, eq)),
                      std::string_view(o).substr(eq + 1));
    }
    validate(config);
    return config;
}

std::string to_config_text(const BenchConfig& c) {
    std::string out;
    auto line = [&out](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    line("grid", std::to_string(c.grid.width) + "x" + std::to_string(c.grid.height));
    line("lambda", fmt(c.lambda.lambda_u) + "," + fmt(c.lambda.lambda_v));
    line("sigma", fmt(c.sigma));
    line("n_samples", std::to_string(c.n_samples));
    line("joints", std::to_string(c.joints));
    line("seed", std::to_string(c.seed));
    line("margin", fmt(c.margin));
    std::string list;
    for (auto e : c.encodings) list += (list.empty() ? "" : ",") + std::string(to_string(e));
    line("encodings", list);
    list.clear();
    for (auto d : c.decoders) list += (list.empty() ? "" : ",") + std::string(to_string(d));
    line("decoders", list);
    list.clear();
    for (const auto& n : c.noise_grid) {
        list += (list.empty() ? "" : "; ") + fmt(n.pixel_noise_std) + "/" + fmt(n.center_jitter_std) +
                "/" + fmt(n.sigma_jitter_std);
    }
    line("noise_grid", list);
    line("kernel_sigma", fmt(c.smoothing.kernel_sigma));
    line("kernel_radius", std::to_string(c.smoothing.kernel_radius));
    return out;
}

std::string config_hash(const BenchConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_config_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace heatcoord
