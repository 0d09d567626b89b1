#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatcoord/bench.hpp"
#include "heatcoord/bench_config.hpp"
#include "heatcoord/decoder.hpp"
#include "heatcoord/encoder.hpp"
#include "heatcoord/errors.hpp"
#include "heatcoord/io.hpp"
#include "heatcoord/metrics.hpp"

namespace heatcoord::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string format;
};

GridShape parse_grid(const std::string& text) {
    const auto x = text.find('x');
    std::size_t w = 0;
    std::size_t h = 0;
    char tail = 0;
    if (x == std::string::npos ||
        std::sscanf(text.c_str(), "%zux%zu%c", &w, &h, &tail) != 2) {
        throw UsageError("--grid expects WxH (e.g. 64x32), got \"" + text + "\"");
    }
    return {w, h};
}

ScaleTransform parse_lambda(const std::string& text) {
    double lu = 0.0;
    double lv = 0.0;
    char tail = 0;
    const int n = std::sscanf(text.c_str(), "%lf,%lf%c", &lu, &lv, &tail);
    if (n == 1 && text.find(',') == std::string::npos) lv = lu;
    else if (n != 2) throw UsageError("--lambda expects f or f,f, got \"" + text + "\"");
    if (!(lu > 0.0 && lv > 0.0 && std::isfinite(lu) && std::isfinite(lv))) {
        throw UsageError("--lambda must be positive");
    }
    return ScaleTransform(lu, lv);
}

std::vector<double> parse_alphas(const std::string& text) {
    std::vector<double> alphas;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double a = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0' || !(a > 0.0)) {
            throw UsageError("--alphas expects positive numbers separated by commas");
        }
        alphas.push_back(a);
    }
    if (alphas.empty()) throw UsageError("--alphas must not be empty");
    return alphas;
}

ReportFormat report_format(const GlobalOptions& g, ReportFormat fallback) {
    if (g.format.empty()) return fallback;
    return *parse_report_format(g.format);
}

void emit(const GlobalOptions& g, const std::string& text, std::ostream& out) {
    if (g.output.empty()) out << text;
    else write_text_file(g.output, text);
}

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

// --- encode ---------------------------------------------------------------

struct EncodeArgs {
    std::string pose;
    double sigma = 2.0;
    std::string grid;
    std::string mode = "unbiased";
    std::string out;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
    const GridShape grid = parse_grid(a.grid);
    const EncodeSpec spec{a.sigma, a.mode == "quantized" ? EncodeMode::Quantized : EncodeMode::Unbiased};
    const PoseDocument doc = load_pose_json(a.pose);
    const Pose pose = doc.lambda ? to_heatmap(*doc.lambda, doc.pose) : doc.pose;
    const Heatmap h = encode_pose(pose, spec, grid);
    save_khm(a.out, h);
    out << "encoded " << h.joints() << " joint(s) on " << grid.width << "x" << grid.height
        << " grid, mode=" << to_string(spec.mode) << ", sigma=" << fmt(spec.sigma) << " -> "
        << a.out << "\n";
    return kExitOk;
}

// --- decode ---------------------------------------------------------------

struct DecodeArgs {
    std::string heatmap;
    std::string method = "dark";
    std::string lambda = "1";
    std::optional<double> kernel_sigma;
    std::string out;
};

int cmd_decode(const DecodeArgs& a, std::ostream& out, std::ostream& err) {
    const auto bench_decoder = parse_bench_decoder(a.method);
    if (!bench_decoder) throw UsageError("unknown --method \"" + a.method + "\"");
    const ScaleTransform lambda = parse_lambda(a.lambda);
    SmoothSpec smoothing;
    if (a.kernel_sigma) {
        smoothing.kernel_sigma = *a.kernel_sigma;
        smoothing.kernel_radius = std::max(smoothing.kernel_radius,
                                           static_cast<int>(std::ceil(2.0 * *a.kernel_sigma)));
    }
    const DecodeMethod method = to_method(*bench_decoder, smoothing);
    const Heatmap h = load_khm(a.heatmap);
    const DecodedPose decoded = decode_pose(h, method, lambda);
    for (std::size_t j = 0; j < decoded.results.size(); ++j) {
        if (decoded.results[j].fallback_used) {
            err << "warning: joint " << j << ": Taylor step rejected, using argmax\n";
        }
    }
    PoseDocument doc;
    doc.pose = decoded.pose;
    doc.lambda = lambda;
    save_pose_json(a.out, doc);
    out << "decoded " << h.joints() << " joint(s) with " << a.method << " -> " << a.out << "\n";
    return kExitOk;
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string alphas = "0.1,0.5";
    bool heatmap_scale = false;
};

std::map<std::string, fs::path> json_files(const fs::path& dir) {
    std::map<std::string, fs::path> files;
    std::error_code ec;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
        if (it->is_regular_file() && it->path().extension() == ".json") {
            files.emplace(it->path().filename().string(), it->path());
        }
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    return files;
}

int cmd_eval(const EvalArgs& a, const GlobalOptions& g, std::ostream& out) {
    const std::vector<double> alphas = parse_alphas(a.alphas);
    const bool pred_dir = fs::is_directory(a.pred);
    const bool gt_dir = fs::is_directory(a.gt);
    if (pred_dir != gt_dir) throw UsageError("--pred and --gt must both be files or both directories");

    std::vector<std::pair<fs::path, fs::path>> pairs;
    if (pred_dir) {
        const auto preds = json_files(a.pred);
        const auto gts = json_files(a.gt);
        std::vector<std::string> orphans;
        for (const auto& [name, path] : preds) {
            if (!gts.contains(name)) orphans.push_back("pred/" + name);
        }
        for (const auto& [name, path] : gts) {
            if (!preds.contains(name)) orphans.push_back("gt/" + name);
            else pairs.emplace_back(preds.at(name), path);
        }
        if (!orphans.empty()) {
            std::string list;
            for (const auto& o : orphans) list += " " + o;
            throw UsageError("unmatched files:" + list);
        }
        if (pairs.empty()) throw UsageError("no .json pose files found");
    } else {
        pairs.emplace_back(a.pred, a.gt);
    }

    std::vector<Pose> pred;
    std::vector<Pose> gt;
    for (const auto& [p, t] : pairs) {
        PoseDocument pd = load_pose_json(p);
        PoseDocument gd = load_pose_json(t);
        if (a.heatmap_scale) {
            const ScaleTransform lg = gd.lambda.value_or(ScaleTransform{});
            const ScaleTransform lp = pd.lambda.value_or(lg);
            pd.pose = to_heatmap(lp, pd.pose);
            gd.pose = to_heatmap(lg, gd.pose);
        }
        pred.push_back(std::move(pd.pose));
        gt.push_back(std::move(gd.pose));
    }
    const MetricReport report = evaluate(pred, gt, alphas);

    std::string text;
    if (report_format(g, ReportFormat::Json) == ReportFormat::Csv) {
        text = "metric,value\nrmse," + fmt(report.rmse) + "\n";
        for (const auto& [alpha, value] : report.pckh) text += "pckh@" + fmt(alpha) + "," + fmt(value) + "\n";
        text += "n_samples," + std::to_string(report.n_samples) + "\n";
        text += "n_joints_evaluated," + std::to_string(report.n_joints_evaluated) + "\n";
        text += "n_pckh_excluded," + std::to_string(report.n_pckh_excluded) + "\n";
    } else {
        nlohmann::json j;
        j["rmse"] = report.rmse;
        j["pckh"] = nlohmann::json::array();
        for (const auto& [alpha, value] : report.pckh) j["pckh"].push_back({{"alpha", alpha}, {"value", value}});
        j["per_joint_rmse"] = report.per_joint_rmse;
        j["n_samples"] = report.n_samples;
        j["n_joints_evaluated"] = report.n_joints_evaluated;
        j["n_pckh_excluded"] = report.n_pckh_excluded;
        j["resolution"] = a.heatmap_scale ? "heatmap" : "original";
        text = j.dump(2) + "\n";
    }
    emit(g, text, out);
    return kExitOk;
}

// --- bench ----------------------------------------------------------------

struct BenchArgs {
    std::string config;
    std::string claim = "all";
    std::vector<std::string> overrides;
    unsigned workers = 1;
};

std::string with_suffix(const std::string& path, const std::string& tag) {
    const fs::path p(path);
    return (p.parent_path() / (p.stem().string() + "." + tag + p.extension().string())).string();
}

int cmd_bench(const BenchArgs& a, const GlobalOptions& g, std::ostream& out) {
    std::vector<std::string> overrides = a.overrides;
    if (g.seed) overrides.push_back("seed=" + std::to_string(*g.seed));
    const BenchConfig config = parse_bench_config(read_text_file(a.config), overrides);
    const ReportFormat format = report_format(g, ReportFormat::Csv);
    const RunOptions options{std::max(1u, a.workers)};

    std::vector<int> claims;
    if (a.claim == "1" || a.claim == "all") claims.push_back(1);
    if (a.claim == "2" || a.claim == "all") claims.push_back(2);

    std::string summary;
    for (int claim : claims) {
        const BenchReport report = claim == 1 ? run_claim1(config, options) : run_claim2(config, options);
        const std::string text = emit_report(report, format);
        if (g.output.empty()) out << text;
        else write_text_file(claims.size() > 1 ? with_suffix(g.output, "claim" + std::to_string(claim)) : g.output, text);
        const auto checks = claim == 1 ? check_claim1(report) : check_claim2(report);
        for (const auto& c : checks) {
            summary += "claim " + std::to_string(claim) + " " + c.label + ": " + (c.pass ? "PASS" : "FAIL") + "\n";
        }
    }
    out << summary;
    return kExitOk;
}

// --- gen ------------------------------------------------------------------

struct GenArgs {
    std::size_t n = 0;
    std::string grid;
    std::size_t joints = 0;
    std::string out_dir;
};

int cmd_gen(const GenArgs& a, const GlobalOptions& g, std::ostream& out) {
    BenchConfig config;
    config.grid = parse_grid(a.grid);
    config.joints = a.joints;
    config.seed = g.seed.value_or(0);
    validate(config);

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec || !fs::is_directory(a.out_dir)) throw IoError("cannot create directory " + a.out_dir);

    for (std::size_t i = 0; i < a.n; ++i) {
        // Same derivation as the bench so gt_<i> equals bench sample i.
        Rng rng(derive_seed(derive_seed(config.seed, i), 0));
        PoseDocument doc;
        doc.pose = sample_pose(rng, config);
        doc.lambda = config.lambda;
        char name[32];
        std::snprintf(name, sizeof name, "gt_%06zu.json", i);
        save_pose_json(fs::path(a.out_dir) / name, doc);
    }
    out << "wrote " << a.n << " pose file(s) to " << a.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heatmap keypoint encoding, decoding, evaluation and synthetic benchmarks"};
    app.name("heatcoord");
    app.fallthrough();
    app.require_subcommand(1, 1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Random seed (u64)");
    app.add_option("--output", global.output, "Write the report to this path instead of stdout");
    app.add_option("--format", global.format, "Report format")->check(CLI::IsMember({"csv", "json"}));

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "Render ground-truth Gaussian heatmaps from a pose file");
    encode->add_option("--pose", enc.pose, "Pose JSON")->required();
    encode->add_option("--sigma", enc.sigma, "Gaussian sigma in heatmap px")->capture_default_str();
    encode->add_option("--grid", enc.grid, "Heatmap size WxH")->required();
    encode->add_option("--mode", enc.mode, "Center placement")
        ->check(CLI::IsMember({"quantized", "unbiased"}))
        ->capture_default_str();
    encode->add_option("--out", enc.out, "Output KHM1 file")->required();

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "Decode a KHM1 heatmap into a pose file");
    decode->add_option("--heatmap", dec.heatmap, "Input KHM1 file")->required();
    decode->add_option("--method", dec.method, "argmax|standard|dark|dark-nosmooth|com")->capture_default_str();
    decode->add_option("--lambda", dec.lambda, "Original px per heatmap px: f or f,f")->capture_default_str();
    decode->add_option("--kernel-sigma", dec.kernel_sigma, "Low-pass sigma for dark");
    decode->add_option("--out", dec.out, "Output pose JSON")->required();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "RMSE and PCKh of predicted against ground-truth poses");
    eval->add_option("--pred", ev.pred, "Pose JSON file or directory")->required();
    eval->add_option("--gt", ev.gt, "Pose JSON file or directory")->required();
    eval->add_option("--alphas", ev.alphas, "PCKh thresholds")->capture_default_str();
    eval->add_flag("--heatmap-scale", ev.heatmap_scale, "Evaluate at heatmap resolution using the files' lambda");

    BenchArgs be;
    auto* bench = app.add_subcommand("bench", "Run the synthetic encoding/decoding benchmark");
    bench->add_option("--config", be.config, "Bench config file")->required();
    bench->add_option("--claim", be.claim, "1, 2 or all")->check(CLI::IsMember({"1", "2", "all"}))->capture_default_str();
    bench->add_option("--override", be.overrides, "key=value, may repeat");
    bench->add_option("--workers", be.workers, "Worker threads")->capture_default_str();

    GenArgs ge;
    auto* gen = app.add_subcommand("gen", "Write synthetic ground-truth pose files");
    gen->add_option("--n", ge.n, "Number of poses")->required();
    gen->add_option("--grid", ge.grid, "Heatmap size WxH")->required();
    gen->add_option("--joints", ge.joints, "Joints per pose (>= 2)")->required();
    gen->add_option("--out-dir", ge.out_dir, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitValidation;
    }

    try {
        if (encode->parsed()) return cmd_encode(enc, out);
        if (decode->parsed()) return cmd_decode(dec, out, err);
        if (eval->parsed()) return cmd_eval(ev, global, out);
        if (bench->parsed()) return cmd_bench(be, global, out);
        if (gen->parsed()) return cmd_gen(ge, global, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        err << app.get_subcommands().front()->help();
        return kExitValidation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}

}  // namespace heatcoord::cli
