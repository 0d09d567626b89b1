// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "heatcoord/bench.hpp"
#include "heatcoord/cli.hpp"
#include "heatcoord/decoder.hpp"
#include "heatcoord/encoder.hpp"
#include "heatcoord/io.hpp"
#include "heatcoord/metrics.hpp"
#include "heatcoord/rng.hpp"
#include "oracles.hpp"

using namespace heatcoord;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// Interior sub-pixel centers shared by criteria 1, 4 and 5.
std::vector<Keypoint> clean_centers() {
    Rng rng(20240601);
    std::vector<Keypoint> c(1000);
    for (auto& k : c) k = {rng.uniform(6.0, 57.0), rng.uniform(6.0, 57.0)};
    return c;
}

const GridShape kGrid{64, 64};

Outcome dark_exactness() {
    Outcome o;
    const auto centers = clean_centers();
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t fallbacks = 0;
    for (const auto& c : centers) {
        const auto h = encode(c, {2.0, EncodeMode::Unbiased}, kGrid);
        const auto r = dark_decode(h, 0, std::nullopt);
        fallbacks += r.fallback_used;
        worst = std::max({worst, std::abs(r.coord.u - c.u), std::abs(r.coord.v - c.v)});
    }
    const double elapsed = seconds_since(t0);
    o.require(worst <= 1e-6, "max axis error " + num(worst) + " <= 1e-6");
    o.require(fallbacks == 0, std::to_string(fallbacks) + " fallbacks");
    o.require(elapsed < 10.0, "runtime " + num(elapsed) + " s < 10 s");
    return o;
}

Outcome decoder_ordering() {
    Outcome o;
    BenchConfig c;
    c.n_samples = 10000;
    c.lambda = ScaleTransform(1.0);
    c.seed = 1;
    c.noise_grid = {NoiseSpec{0.02, 0.0, 0.0}};
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_claim1(c, {worker_count()});
    const double elapsed = seconds_since(t0);
    auto rmse_of = [&](BenchDecoder d) { return r.find(EncodeMode::Unbiased, d, 0)->metrics.rmse; };
    const double arg = rmse_of(BenchDecoder::ArgMax);
    const double stdd = rmse_of(BenchDecoder::Standard);
    const double com = rmse_of(BenchDecoder::CoM);
    for (auto d : {BenchDecoder::Dark, BenchDecoder::DarkNoSmooth}) {
        const double dark = rmse_of(d);
        o.require(dark <= 0.95 * stdd,
                  std::string(to_string(d)) + " " + num(dark) + " < 0.95 x standard " + num(stdd));
        o.require(stdd <= 0.95 * arg, "standard " + num(stdd) + " < 0.95 x argmax " + num(arg));
        o.require(com >= 0.5 * dark && com <= 1.5 * stdd, "com " + num(com) + " in [" + num(0.5 * dark) + ", " +
                                                               num(1.5 * stdd) + "] (vs " + to_string(d) + ")");
    }
    o.require(elapsed < 60.0, "runtime " + num(elapsed) + " s < 60 s");
    return o;
}

Outcome encoding_bias() {
    Outcome o;
    BenchConfig c;
    c.n_samples = 10000;
    c.seed = 2;
    c.noise_grid = {NoiseSpec{}};
    const auto clean = run_claim2(c, {worker_count()});
    const double target = 0.4082 * 4.0;
    for (auto d : {BenchDecoder::Dark, BenchDecoder::DarkNoSmooth}) {
        const double q = clean.find(EncodeMode::Quantized, d, 0)->metrics.rmse;
        o.require(std::abs(q - target) <= 0.05 * target,
                  std::string("quantized ") + to_string(d) + " " + num(q) + " within 5% of " + num(target));
    }
    // Exactness is judged on the unsmoothed Taylor step; the low-pass
    // kernel's truncation perturbs a clean Gaussian slightly.
    const double u = clean.find(EncodeMode::Unbiased, BenchDecoder::DarkNoSmooth, 0)->metrics.rmse;
    o.require(u <= 1e-5, "unbiased dark-nosmooth " + num(u) + " <= 1e-5");
    const double us = clean.find(EncodeMode::Unbiased, BenchDecoder::Dark, 0)->metrics.rmse;
    o.detail += "; unbiased dark (smoothed) " + num(us) + " (info)";

    c.noise_grid = default_noise_grid();
    const auto full = run_claim2(c, {worker_count()});
    std::size_t failed = 0;
    std::string which;
    for (const auto& chk : check_claim2(full)) {
        if (!chk.pass) {
            ++failed;
            which += " {" + chk.label + "}";
        }
    }
    o.require(failed == 0, "unbiased <= quantized in every cell, " + std::to_string(failed) + " cells fail" + which);
    return o;
}

Outcome argmax_statistics() {
    Outcome o;
    double su = 0.0;
    double sv = 0.0;
    const auto centers = clean_centers();
    for (const auto& c : centers) {
        const auto a = argmax_decode(encode(c, {2.0, EncodeMode::Unbiased}, kGrid), 0).coord;
        su += (a.u - c.u) * (a.u - c.u);
        sv += (a.v - c.v) * (a.v - c.v);
    }
    const double ru = std::sqrt(su / centers.size());
    const double rv = std::sqrt(sv / centers.size());
    o.require(ru >= 0.25 && ru <= 0.33, "u " + num(ru) + " in [0.25, 0.33]");
    o.require(rv >= 0.25 && rv <= 0.33, "v " + num(rv) + " in [0.25, 0.33]");
    return o;
}

Outcome com_oracle() {
    Outcome o;
    Rng rng(5);
    double worst_oracle = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t w = 3 + static_cast<std::size_t>(rng.uniform() * 62);
        const std::size_t h = 3 + static_cast<std::size_t>(rng.uniform() * 62);
        std::vector<double> d(w * h);
        for (auto& x : d) x = rng.uniform(1e-6, 1.0);
        const Heatmap hm(1, {w, h}, d);
        const auto got = com_decode(hm, 0).coord;
        const auto want = oracle::naive_centroid(hm.channel(0), w);
        worst_oracle = std::max({worst_oracle, std::abs(got.u - want.u), std::abs(got.v - want.v)});
    }
    o.require(worst_oracle <= 1e-12, "oracle gap " + num(worst_oracle) + " <= 1e-12");
    double worst = 0.0;
    for (const auto& c : clean_centers()) {
        const auto r = com_decode(encode(c, {1.0, EncodeMode::Unbiased}, kGrid), 0).coord;
        worst = std::max(worst, std::hypot(r.u - c.u, r.v - c.v));
    }
    o.require(worst <= 1e-3, "clean sigma=1 error " + num(worst) + " <= 1e-3");
    return o;
}

Outcome metric_units() {
    Outcome o;
    const std::vector<Pose> gt{Pose{{{1, 1}, {1, 1}}, std::nullopt}};
    const std::vector<Pose> pred{Pose{{{1, 1}, {4, 5}}, std::nullopt}};
    const double r = rmse(pred, gt);
    o.require(std::abs(r - std::sqrt(12.5)) <= 1e-9, "rmse " + num(r) + " = sqrt(12.5)");

    const std::vector<Pose> g{Pose{{{0, 0}, {0, 10}}, HeadNeck{}}};
    const std::vector<Pose> in{Pose{{{4.9, 0}, {0, 10}}, HeadNeck{}}};
    const std::vector<Pose> out{Pose{{{5.1, 0}, {0, 10}}, HeadNeck{}}};
    o.require(pckh(in, g, 0.5) == 100.0 && pckh(out, g, 0.5) == 50.0, "4.9 correct, 5.1 incorrect at L=10");

    Rng rng(6);
    std::size_t violations = 0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<Pose> gts;
        std::vector<Pose> preds;
        const double sd = rng.uniform(0.1, 15.0);
        for (int s = 0; s < 5; ++s) {
            Pose p{{}, HeadNeck{}};
            for (int j = 0; j < 4; ++j) p.keypoints.push_back({rng.uniform(0, 64), rng.uniform(0, 64)});
            Pose q = p;
            for (auto& k : q.keypoints) k = {k.u + rng.normal(0, sd), k.v + rng.normal(0, sd)};
            gts.push_back(p);
            preds.push_back(q);
        }
        if (pckh(preds, gts, 0.1) > pckh(preds, gts, 0.5)) ++violations;
    }
    o.require(violations == 0, "PCKh-0.1 <= PCKh-0.5 in 1000 trials, " + std::to_string(violations) + " violations");
    return o;
}

int run_cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    return cli::run(args, out, err);
}

Outcome determinism_and_formats() {
    Outcome o;
    BenchConfig c;
    c.n_samples = 200;
    c.seed = 7;
    const auto one = run_claim2(c, {1});
    const auto two = run_claim2(c, {2});
    const auto eight = run_claim2(c, {8});
    const auto bytes = emit_report(one, ReportFormat::Json) + emit_report(one, ReportFormat::Csv);
    o.require(one == two && one == eight &&
                  bytes == emit_report(eight, ReportFormat::Json) + emit_report(eight, ReportFormat::Csv),
              "bench report identical for 1/2/8 workers");

    Rng rng(8);
    std::size_t khm_bad = 0;
    std::size_t json_bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t j = 1 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t h = 3 + static_cast<std::size_t>(rng.uniform() * 20);
        const std::size_t w = 3 + static_cast<std::size_t>(rng.uniform() * 20);
        std::vector<double> d(j * h * w);
        for (auto& x : d) x = static_cast<float>(rng.uniform(0.0, 10.0));
        const Heatmap hm(j, {w, h}, d);
        if (!(read_khm(write_khm(hm)) == hm)) ++khm_bad;

        PoseDocument doc;
        for (std::size_t k = 0; k < 2 + j; ++k) doc.pose.keypoints.push_back({rng.normal(0, 500), rng.uniform(-1, 1)});
        doc.pose.head_neck = HeadNeck{};
        doc.lambda = ScaleTransform(rng.uniform(0.5, 8.0), rng.uniform(0.5, 8.0));
        if (!(read_pose_json(write_pose_json(doc)) == doc)) ++json_bad;
    }
    o.require(khm_bad == 0, "KHM1 round-trip, " + std::to_string(khm_bad) + " mismatches");
    o.require(json_bad == 0, "PoseJson round-trip, " + std::to_string(json_bad) + " mismatches");

    const fs::path dir = fs::temp_directory_path() / ("heatcoord_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir / "pred");
    fs::create_directories(dir / "gt");
    auto p = [&](const std::string& name) { return (dir / name).string(); };
    save_pose_json(p("pose.json"), PoseDocument{Pose{{{7.3, 6.6}}, std::nullopt}, std::nullopt, std::nullopt});
    save_pose_json(p("two.json"), PoseDocument{Pose{{{1, 1}, {9, 9}}, HeadNeck{}}, std::nullopt, std::nullopt});
    save_pose_json(p("three.json"), PoseDocument{Pose{{{1, 1}, {9, 9}, {4, 4}}, HeadNeck{}}, std::nullopt, std::nullopt});
    save_pose_json(p("pred/a.json"), PoseDocument{Pose{{{1, 1}, {9, 9}}, HeadNeck{}}, std::nullopt, std::nullopt});
    save_pose_json(p("gt/b.json"), PoseDocument{Pose{{{1, 1}, {9, 9}}, HeadNeck{}}, std::nullopt, std::nullopt});
    save_khm(p("zero.khm"), Heatmap(1, {8, 8}));
    write_text_file(p("ok.cfg"), "n_samples = 5\nnoise_grid = 0/0/0\n");
    write_text_file(p("bad.cfg"), "margin = 1\n");
    write_text_file(p("file"), "x");

    struct Case {
        std::vector<std::string> args;
        int expected;
    };
    const std::vector<Case> cases{
        {{"--help"}, cli::kExitOk},
        {{"encode", "--help"}, cli::kExitOk},
        {{"decode", "--help"}, cli::kExitOk},
        {{"eval", "--help"}, cli::kExitOk},
        {{"bench", "--help"}, cli::kExitOk},
        {{"gen", "--help"}, cli::kExitOk},
        {{}, cli::kExitValidation},
        {{"gen", "--unknown-flag"}, cli::kExitValidation},
        {{"encode", "--pose", p("pose.json"), "--grid", "64x32", "--mode", "unbiased", "--out", p("h.khm")}, cli::kExitOk},
        {{"encode", "--pose", p("missing.json"), "--grid", "64x32", "--out", p("h2.khm")}, cli::kExitIo},
        {{"encode", "--pose", p("pose.json"), "--grid", "64", "--out", p("h2.khm")}, cli::kExitValidation},
        {{"encode", "--pose", p("pose.json"), "--grid", "64x32", "--out", p("file/h.khm")}, cli::kExitIo},
        {{"decode", "--heatmap", p("h.khm"), "--method", "banana", "--out", p("d.json")}, cli::kExitValidation},
        {{"decode", "--heatmap", p("zero.khm"), "--out", p("d.json")}, cli::kExitValidation},
        {{"decode", "--heatmap", p("missing.khm"), "--out", p("d.json")}, cli::kExitIo},
        {{"eval", "--pred", p("pred"), "--gt", p("gt")}, cli::kExitValidation},
        {{"eval", "--pred", p("two.json"), "--gt", p("three.json")}, cli::kExitValidation},
        {{"eval", "--pred", p("missing.json"), "--gt", p("two.json")}, cli::kExitIo},
        {{"bench", "--config", p("bad.cfg")}, cli::kExitValidation},
        {{"bench", "--config", p("missing.cfg")}, cli::kExitIo},
        {{"bench", "--config", p("ok.cfg"), "--claim", "1"}, cli::kExitOk},
        {{"gen", "--n", "3", "--grid", "64x64", "--joints", "1", "--out-dir", p("g")}, cli::kExitValidation},
        {{"gen", "--n", "3", "--grid", "64x64", "--joints", "4", "--out-dir", p("file/g")}, cli::kExitIo},
    };
    std::size_t wrong = 0;
    std::string which;
    for (const auto& cs : cases) {
        const int code = run_cli(cs.args);
        if (code != cs.expected) {
            ++wrong;
            which += " {" + (cs.args.empty() ? std::string("<none>") : cs.args[0]) + " -> " + std::to_string(code) + "}";
        }
    }
    fs::remove_all(dir);
    o.require(wrong == 0, std::to_string(cases.size()) + " CLI exit paths, " + std::to_string(wrong) + " wrong" + which);
    return o;
}

Outcome scale_invariance() {
    Outcome o;
    Rng rng(9);
    const std::vector<DecodeMethod> methods{DecodeMethod::argmax(), DecodeMethod::standard(), DecodeMethod::dark(),
                                            DecodeMethod::com()};
    std::vector<std::size_t> mismatches(methods.size(), 0);
    double dark_gap = 0.0;
    std::size_t channels = 0;
    for (int t = 0; t < 300; ++t) {
        Pose pose;
        for (int j = 0; j < 3; ++j) pose.keypoints.push_back({rng.uniform(2.0, 61.0), rng.uniform(2.0, 61.0)});
        const auto clean = encode_pose(pose, {rng.uniform(1.0, 3.0), EncodeMode::Unbiased}, kGrid);
        const double noise = t % 3 == 0 ? 0.0 : 0.02;
        std::vector<double> d(clean.data().begin(), clean.data().end());
        for (auto& x : d) x = std::max(0.0, x + (noise > 0.0 ? rng.normal(0.0, noise) : 0.0));
        const Heatmap base(3, kGrid, d);
        const std::size_t j = static_cast<std::size_t>(t % 3);
        for (double k : {1e-3, 1.0, 1e3}) {
            auto e = d;
            for (std::size_t i = 0; i < 64 * 64; ++i) e[j * 64 * 64 + i] *= k;
            const Heatmap scaled(3, kGrid, std::move(e));
            ++channels;
            for (std::size_t m = 0; m < methods.size(); ++m) {
                const auto a = decode(base, j, methods[m]).coord;
                const auto b = decode(scaled, j, methods[m]).coord;
                if (methods[m].variant == DecodeVariant::Dark) {
                    const double gap = std::max(std::abs(a.u - b.u), std::abs(a.v - b.v));
                    dark_gap = std::max(dark_gap, gap);
                    if (gap > 1e-9) ++mismatches[m];
                } else if (!(a == b)) {
                    ++mismatches[m];
                }
            }
        }
    }
    o.require(mismatches[0] == 0, "argmax exact, " + std::to_string(mismatches[0]) + "/" + std::to_string(channels) + " differ");
    o.require(mismatches[1] == 0, "standard exact, " + std::to_string(mismatches[1]) + "/" + std::to_string(channels) + " differ");
    o.require(mismatches[2] == 0, "dark max gap " + num(dark_gap) + " <= 1e-9");
    o.require(mismatches[3] == 0, "com exact, " + std::to_string(mismatches[3]) + "/" + std::to_string(channels) + " differ");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"DARK exactness on clean unbiased Gaussians", dark_exactness},
        {"decoder ordering under pixel noise", decoder_ordering},
        {"encoding bias (quantized vs unbiased)", encoding_bias},
        {"argmax per-axis error statistics", argmax_statistics},
        {"centre of mass oracle equivalence", com_oracle},
        {"metric unit values", metric_units},
        {"determinism and formats", determinism_and_formats},
        {"decoder scale invariance", scale_invariance},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
    return failures == 0 ? 0 : 1;
}
