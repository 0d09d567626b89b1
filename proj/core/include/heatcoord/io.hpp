#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatcoord/errors.hpp"
#include "heatcoord/grid.hpp"

namespace heatcoord {

// KHM1 layout (all little-endian):
//
//   offset  size      field
//   0       4         magic "KHM1"
//   4       1         version = 1
//   5       4         J (u32)
//   9       4         H (u32)
//   13      4         W (u32)
//   17      4*J*H*W   float32 payload, joint-major, row-major
inline constexpr std::size_t kKhmHeaderSize = 17;
inline constexpr std::uint8_t kKhmVersion = 1;

enum class KhmErrorKind {
    BadMagic,
    UnsupportedVersion,
    BadDimensions,
    Truncated,
    TrailingBytes,
    InvalidValue,
};

class KhmParseError : public Error {
public:
    KhmParseError(KhmErrorKind kind, std::size_t offset, const std::string& what)
        : Error("KHM byte " + std::to_string(offset) + ": " + what), kind_(kind), offset_(offset) {}

    KhmErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    KhmErrorKind kind_;
    std::size_t offset_;
};

/// Activations are stored as float32. Throws DomainError if a value
/// overflows float32.
std::vector<std::byte> write_khm(const Heatmap& h);

/// Exact inverse of write_khm for float32-representable heatmaps.
Heatmap read_khm(std::span<const std::byte> bytes);

void save_khm(const std::filesystem::path& path, const Heatmap& h);
Heatmap load_khm(const std::filesystem::path& path);

/// Pose file with optional metadata. `head_index`/`neck_index` may be
/// omitted together (decoded predictions carry none).
struct PoseDocument {
    Pose pose;
    std::optional<std::vector<std::string>> names;
    std::optional<ScaleTransform> lambda;

    friend bool operator==(const PoseDocument&, const PoseDocument&) = default;
};

class PoseJsonError : public Error {
public:
    PoseJsonError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}

    /// JSON path of the offending field, e.g. "$.joints[2][0]".
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Coordinates are written with 17 significant digits.
std::string write_pose_json(const PoseDocument& doc);
PoseDocument read_pose_json(std::string_view text);

void save_pose_json(const std::filesystem::path& path, const PoseDocument& doc);
PoseDocument load_pose_json(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace heatcoord
