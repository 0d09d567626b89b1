#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "heatcoord/errors.hpp"
#include "heatcoord/io.hpp"
#include "heatcoord/rng.hpp"

using namespace heatcoord;

namespace {

std::vector<std::byte> bytes_of(std::string_view s) {
    std::vector<std::byte> b(s.size());
    std::memcpy(b.data(), s.data(), s.size());
    return b;
}

void put_u32(std::vector<std::byte>& b, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::byte>((x >> (8 * i)) & 0xff));
}

std::vector<std::byte> header(std::uint32_t j, std::uint32_t h, std::uint32_t w) {
    auto b = bytes_of("KHM1");
    b.push_back(std::byte{1});
    put_u32(b, j);
    put_u32(b, h);
    put_u32(b, w);
    return b;
}

KhmParseError parse_error(std::span<const std::byte> b) {
    try {
        read_khm(b);
    } catch (const KhmParseError& e) {
        return e;
    }
    FAIL("expected KhmParseError");
    throw;
}

Heatmap random_float_heatmap(Rng& rng) {
    const std::size_t j = 1 + static_cast<std::size_t>(rng.uniform() * 4);
    const std::size_t h = 3 + static_cast<std::size_t>(rng.uniform() * 12);
    const std::size_t w = 3 + static_cast<std::size_t>(rng.uniform() * 12);
    std::vector<double> d(j * h * w);
    for (auto& x : d) {
        const double r = rng.uniform();
        if (r < 0.1) x = 0.0;
        else if (r < 0.15) x = static_cast<double>(std::numeric_limits<float>::denorm_min());
        else x = static_cast<double>(static_cast<float>(rng.uniform(0.0, 1e3)));
    }
    return Heatmap(j, {w, h}, std::move(d));
}

}  // namespace

TEST_CASE("KHM1 layout") {
    const auto b = write_khm(Heatmap(1, {3, 3}));
    CHECK(b.size() == kKhmHeaderSize + 4 * 9);
    CHECK(b.size() == 53);
    CHECK(std::vector<std::byte>(b.begin(), b.begin() + 17) == header(1, 3, 3));

    Heatmap h(2, {3, 4});
    h.set(1, 3, 2, 1.0);  // last value
    const auto hb = write_khm(h);
    CHECK(hb.size() == 17 + 4 * 24);
    // 1.0f little-endian: 00 00 80 3f
    CHECK(hb[hb.size() - 2] == std::byte{0x80});
    CHECK(hb[hb.size() - 1] == std::byte{0x3f});
    CHECK(std::vector<std::byte>(hb.begin(), hb.begin() + 17) == header(2, 4, 3));
}

TEST_CASE("KHM1 tiny 2x2 stream has the layout size but fails the minimum side") {
    auto b = header(1, 2, 2);
    b.resize(b.size() + 16, std::byte{0});
    CHECK(b.size() == 33);
    const auto e = parse_error(b);
    CHECK(e.kind() == KhmErrorKind::BadDimensions);
    CHECK(e.offset() == 9);
}

TEST_CASE("KHM1 parse errors name the failing byte") {
    const auto good = write_khm(Heatmap(1, {3, 3}));
    SUBCASE("bad magic") {
        auto b = good;
        b[1] = std::byte{'X'};
        const auto e = parse_error(b);
        CHECK(e.kind() == KhmErrorKind::BadMagic);
        CHECK(e.offset() == 0);
    }
    SUBCASE("future magic") {
        auto b = good;
        b[3] = std::byte{'2'};
        const auto e = parse_error(b);
        CHECK(e.kind() == KhmErrorKind::UnsupportedVersion);
        CHECK(e.offset() == 3);
    }
    SUBCASE("version byte") {
        auto b = good;
        b[4] = std::byte{2};
        const auto e = parse_error(b);
        CHECK(e.kind() == KhmErrorKind::UnsupportedVersion);
        CHECK(e.offset() == 4);
    }
    SUBCASE("header truncated") {
        const std::vector<std::byte> b(good.begin(), good.begin() + 10);
        CHECK(parse_error(b).kind() == KhmErrorKind::Truncated);
        CHECK(parse_error(std::vector<std::byte>(good.begin(), good.begin() + 2)).kind() ==
              KhmErrorKind::Truncated);
    }
    SUBCASE("payload truncated") {
        const std::vector<std::byte> b(good.begin(), good.end() - 1);
        const auto e = parse_error(b);
        CHECK(e.kind() == KhmErrorKind::Truncated);
        CHECK(e.offset() == 52);
    }
    SUBCASE("trailing bytes") {
        auto b = good;
        b.push_back(std::byte{0});
        const auto e = parse_error(b);
        CHECK(e.kind() == KhmErrorKind::TrailingBytes);
        CHECK(e.offset() == 53);
    }
    SUBCASE("zero joints") {
        auto b = header(0, 3, 3);
        const auto e = parse_error(b);
        CHECK(e.kind() == KhmErrorKind::BadDimensions);
        CHECK(e.offset() == 5);
    }
    SUBCASE("narrow width") {
        auto b = header(1, 3, 2);
        b.resize(b.size() + 24);
        const auto e = parse_error(b);
        CHECK(e.kind() == KhmErrorKind::BadDimensions);
        CHECK(e.offset() == 13);
    }
    SUBCASE("negative and non-finite values") {
        for (float bad : {-1.0f, std::numeric_limits<float>::infinity(), std::numeric_limits<float>::quiet_NaN()}) {
            auto b = good;
            const auto bits = std::bit_cast<std::uint32_t>(bad);
            for (int i = 0; i < 4; ++i) b[17 + 4 * 5 + i] = static_cast<std::byte>((bits >> (8 * i)) & 0xff);
            const auto e = parse_error(b);
            CHECK(e.kind() == KhmErrorKind::InvalidValue);
            CHECK(e.offset() == 37);
        }
    }
}

TEST_CASE("KHM1 write rejects values beyond float32") {
    Heatmap h(1, {3, 3});
    h.set(0, 0, 0, 1e300);
    CHECK_THROWS_AS(write_khm(h), DomainError);
}

TEST_CASE("KHM1 randomized round-trip") {
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const auto h = random_float_heatmap(rng);
        const auto b = write_khm(h);
        CHECK(b.size() == 17 + 4 * h.data().size());
        const auto back = read_khm(b);
        CHECK(back == h);
        CHECK(write_khm(back) == b);
    }
}

TEST_CASE("KHM1 file round-trip and missing file") {
    const auto dir = std::filesystem::temp_directory_path() / "heatcoord_test_io";
    std::filesystem::create_directories(dir);
    Rng rng(2);
    const auto h = random_float_heatmap(rng);
    save_khm(dir / "a.khm", h);
    CHECK(load_khm(dir / "a.khm") == h);
    CHECK_THROWS_AS(load_khm(dir / "missing.khm"), IoError);
    CHECK_THROWS_AS(save_khm(dir / "no" / "such" / "dir.khm", h), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("PoseJson round-trip at full precision") {
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        PoseDocument doc;
        const std::size_t j = 2 + static_cast<std::size_t>(rng.uniform() * 16);
        for (std::size_t i = 0; i < j; ++i) {
            doc.pose.keypoints.push_back({rng.uniform(-1e4, 1e4) * rng.uniform(), rng.normal(0.0, 1e3)});
        }
        if (rng.uniform() < 0.8) {
            const auto head = static_cast<std::size_t>(rng.uniform() * j);
            doc.pose.head_neck = HeadNeck{head, (head + 1) % j};
        }
        if (rng.uniform() < 0.5) {
            std::vector<std::string> names;
            for (std::size_t i = 0; i < j; ++i) names.push_back("joint \"" + std::to_string(i) + "\"");
            doc.names = names;
        }
        if (rng.uniform() < 0.5) doc.lambda = ScaleTransform(rng.uniform(0.1, 8.0), rng.uniform(0.1, 8.0));
        const auto text = write_pose_json(doc);
        const auto back = read_pose_json(text);
        CHECK(back == doc);
        CHECK(write_pose_json(back) == text);
    }
}

TEST_CASE("PoseJson accepts minimal documents") {
    const auto d = read_pose_json(R"({"joints": [[1.5, 2], [3, 4]], "head_index": 1, "neck_index": 0})");
    CHECK(d.pose.keypoints == std::vector<Keypoint>{{1.5, 2.0}, {3.0, 4.0}});
    CHECK(d.pose.head_neck == HeadNeck{1, 0});
    CHECK_FALSE(d.names);
    CHECK_FALSE(d.lambda);

    const auto single = read_pose_json(R"({"joints": [[7.3, 6.6]]})");
    CHECK(single.pose.size() == 1);
    CHECK_FALSE(single.pose.head_neck);
}

TEST_CASE("PoseJson errors carry the field path") {
    auto path_of = [](std::string_view text) {
        try {
            read_pose_json(text);
        } catch (const PoseJsonError& e) {
            return e.path();
        }
        return std::string("<no error>");
    };
    CHECK(path_of("{") == "$");
    CHECK(path_of("[]") == "$");
    CHECK(path_of(R"({"head_index": 0})") == "$.joints");
    CHECK(path_of(R"({"joints": []})") == "$.joints");
    CHECK(path_of(R"({"joints": [[1, 2], [3]]})") == "$.joints[1]");
    CHECK(path_of(R"({"joints": [[1, 2], [3, "x"]]})") == "$.joints[1][1]");
    CHECK(path_of(R"({"joints": [[1, 2], [3, 4]], "head_index": 0})") == "$.neck_index");
    CHECK(path_of(R"({"joints": [[1, 2], [3, 4]], "neck_index": 0})") == "$.head_index");
    CHECK(path_of(R"({"joints": [[1, 2], [3, 4]], "head_index": 2, "neck_index": 0})") == "$.head_index");
    CHECK(path_of(R"({"joints": [[1, 2], [3, 4]], "head_index": 0, "neck_index": -1})") == "$.neck_index");
    CHECK(path_of(R"({"joints": [[1, 2], [3, 4]], "head_index": 1, "neck_index": 1})") == "$.neck_index");
    CHECK(path_of(R"({"joints": [[1, 2]], "head_index": 0, "neck_index": 0})") != "<no error>");
    CHECK(path_of(R"({"joints": [[1, 2]], "names": ["a", "b"]})") == "$.names");
    CHECK(path_of(R"({"joints": [[1, 2]], "lambda": [4]})") == "$.lambda");
    CHECK(path_of(R"({"joints": [[1, 2]], "lambda": [4, 0]})") == "$.lambda[1]");
}
