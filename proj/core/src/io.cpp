#include "heatcoord/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace heatcoord {

namespace {

constexpr char kMagic[4] = {'K', 'H', 'M', '1'};

void put_u32(std::vector<std::byte>& out, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((x >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
        x |= static_cast<std::uint32_t>(bytes[offset + static_cast<std::size_t>(i)]) << (8 * i);
    }
    return x;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

std::vector<std::byte> write_khm(const Heatmap& h) {
    std::vector<std::byte> out;
    out.reserve(kKhmHeaderSize + 4 * h.data().size());
    for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
    out.push_back(static_cast<std::byte>(kKhmVersion));
    put_u32(out, static_cast<std::uint32_t>(h.joints()));
    put_u32(out, static_cast<std::uint32_t>(h.height()));
    put_u32(out, static_cast<std::uint32_t>(h.width()));
    for (std::size_t i = 0; i < h.data().size(); ++i) {
        const double x = h.data()[i];
        if (x > static_cast<double>(std::numeric_limits<float>::max())) {
            throw DomainError("activation at offset " + std::to_string(i) + " overflows float32");
        }
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
    return out;
}

Heatmap read_khm(std::span<const std::byte> bytes) {
    if (bytes.size() < 4) throw KhmParseError(KhmErrorKind::Truncated, bytes.size(), "missing magic");
    if (std::memcmp(bytes.data(), kMagic, 3) != 0) {
        throw KhmParseError(KhmErrorKind::BadMagic, 0, "bad magic, expected \"KHM1\"");
    }
    if (static_cast<char>(bytes[3]) != kMagic[3]) {
        throw KhmParseError(KhmErrorKind::UnsupportedVersion, 3,
                            std::string("unsupported format \"KHM") + static_cast<char>(bytes[3]) + "\"");
    }
    if (bytes.size() < kKhmHeaderSize) {
        throw KhmParseError(KhmErrorKind::Truncated, bytes.size(), "header truncated");
    }
    if (static_cast<std::uint8_t>(bytes[4]) != kKhmVersion) {
        throw KhmParseError(KhmErrorKind::UnsupportedVersion, 4,
                            "unsupported version " + std::to_string(static_cast<int>(bytes[4])));
    }
    const std::uint32_t joints = get_u32(bytes, 5);
    const std::uint32_t height = get_u32(bytes, 9);
    const std::uint32_t width = get_u32(bytes, 13);
    if (joints == 0) throw KhmParseError(KhmErrorKind::BadDimensions, 5, "J must be >= 1");
    if (height < Heatmap::kMinSide) throw KhmParseError(KhmErrorKind::BadDimensions, 9, "H must be >= 3");
    if (width < Heatmap::kMinSide) throw KhmParseError(KhmErrorKind::BadDimensions, 13, "W must be >= 3");

    const std::uint64_t count = std::uint64_t{joints} * height * width;
    const std::uint64_t expected = kKhmHeaderSize + 4 * count;
    if (bytes.size() < expected) {
        throw KhmParseError(KhmErrorKind::Truncated, bytes.size(),
                            "payload truncated, expected " + std::to_string(expected) + " bytes");
    }
    if (bytes.size() > expected) {
        throw KhmParseError(KhmErrorKind::TrailingBytes, static_cast<std::size_t>(expected),
                            "unexpected bytes after payload");
    }
    std::vector<double> data(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t offset = kKhmHeaderSize + 4 * i;
        const float x = std::bit_cast<float>(get_u32(bytes, offset));
        if (!std::isfinite(x) || x < 0.0f) {
            throw KhmParseError(KhmErrorKind::InvalidValue, offset, "activation must be finite and >= 0");
        }
        data[i] = static_cast<double>(x);
    }
    return Heatmap(joints, GridShape{width, height}, std::move(data));
}

void save_khm(const std::filesystem::path& path, const Heatmap& h) {
    const auto bytes = write_khm(h);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Heatmap load_khm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + path.string());
    return read_khm(std::as_bytes(std::span<const char>(raw)));
}

std::string write_pose_json(const PoseDocument& doc) {
    validate(doc.pose);
    std::ostringstream out;
    out << "{\n  \"joints\": [";
    for (std::size_t j = 0; j < doc.pose.size(); ++j) {
        const auto& k = doc.pose.keypoints[j];
        out << (j ? ", " : "") << '[' << format_double(k.u) << ", " << format_double(k.v) << ']';
    }
    out << ']';
    if (doc.pose.head_neck) {
        out << ",\n  \"head_index\": " << doc.pose.head_neck->head;
        out << ",\n  \"neck_index\": " << doc.pose.head_neck->neck;
    }
    if (doc.names) {
        out << ",\n  \"names\": [";
        for (std::size_t i = 0; i < doc.names->size(); ++i) {
            out << (i ? ", " : "") << json_string((*doc.names)[i]);
        }
        out << ']';
    }
    if (doc.lambda) {
        out << ",\n  \"lambda\": [" << format_double(doc.lambda->lambda_u) << ", "
            << format_double(doc.lambda->lambda_v) << ']';
    }
    out << "\n}\n";
    return out.str();
}

PoseDocument read_pose_json(std::string_view text) {
    using nlohmann::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PoseJsonError("$", std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw PoseJsonError("$", "expected an object");

    auto number = [](const json& v, const std::string& path) {
        if (!v.is_number()) throw PoseJsonError(path, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw PoseJsonError(path, "must be finite");
        return x;
    };
    auto index = [](const json& root, const char* key) -> std::optional<std::size_t> {
        if (!root.contains(key)) return std::nullopt;
        const auto& v = root.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            throw PoseJsonError(std::string("$.") + key, "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    };

    PoseDocument doc;
    if (!root.contains("joints")) throw PoseJsonError("$.joints", "missing field");
    const auto& joints = root.at("joints");
    if (!joints.is_array() || joints.empty()) throw PoseJsonError("$.joints", "expected a non-empty array");
    for (std::size_t j = 0; j < joints.size(); ++j) {
        const std::string path = "$.joints[" + std::to_string(j) + "]";
        const auto& pair = joints[j];
        if (!pair.is_array() || pair.size() != 2) throw PoseJsonError(path, "expected [u, v]");
        doc.pose.keypoints.push_back({number(pair[0], path + "[0]"), number(pair[1], path + "[1]")});
    }

    const auto head = index(root, "head_index");
    const auto neck = index(root, "neck_index");
    if (head.has_value() != neck.has_value()) {
        throw PoseJsonError(head ? "$.neck_index" : "$.head_index",
                            "head_index and neck_index must be given together");
    }
    if (head) {
        const std::size_t n = doc.pose.size();
        if (*head >= n) throw PoseJsonError("$.head_index", "index out of range for " + std::to_string(n) + " joints");
        if (*neck >= n) throw PoseJsonError("$.neck_index", "index out of range for " + std::to_string(n) + " joints");
        if (*head == *neck) throw PoseJsonError("$.neck_index", "must differ from head_index");
        doc.pose.head_neck = HeadNeck{*head, *neck};
    }

    if (root.contains("names")) {
        const auto& names = root.at("names");
        if (!names.is_array()) throw PoseJsonError("$.names", "expected an array of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!names[i].is_string()) {
                throw PoseJsonError("$.names[" + std::to_string(i) + "]", "expected a string");
            }
            out.push_back(names[i].get<std::string>());
        }
        if (out.size() != doc.pose.size()) throw PoseJsonError("$.names", "length must match joints");
        doc.names = std::move(out);
    }
    if (root.contains("lambda")) {
        const auto& l = root.at("lambda");
        if (!l.is_array() || l.size() != 2) throw PoseJsonError("$.lambda", "expected [lambda_u, lambda_v]");
        const double lu = number(l[0], "$.lambda[0]");
        const double lv = number(l[1], "$.lambda[1]");
        if (!(lu > 0.0)) throw PoseJsonError("$.lambda[0]", "scale factor must be positive");
        if (!(lv > 0.0)) throw PoseJsonError("$.lambda[1]", "scale factor must be positive");
        doc.lambda = ScaleTransform(lu, lv);
    }
    return doc;
}

void save_pose_json(const std::filesystem::path& path, const PoseDocument& doc) {
    write_text_file(path, write_pose_json(doc));
}

PoseDocument load_pose_json(const std::filesystem::path& path) {
    return read_pose_json(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace heatcoord
