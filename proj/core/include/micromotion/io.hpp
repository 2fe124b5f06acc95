#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "micromotion/config.hpp"
#include "micromotion/numerov.hpp"

namespace micromotion {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Round-trip decimal form ("%.17g"); the same double always prints the same bytes.
std::string format_number(double v);

/// Deterministic description of one run: the command, the full config and
/// every run-specific setting. Timing is kept out so that reruns hash alike.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value) { set(key, format_number(value)); }
    /// `key = value` lines, in insertion order, preceded by `command = ...`.
    std::string text() const;
    std::string hash() const { return sha256_hex(text()); }
};

/// Manifest seeded with `describe(cfg)`.
RunManifest make_manifest(const std::string& command, const RunConfig& cfg);

/// Plain CSV with `#` comment lines before the header row.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    template <class... T>
    void add(const T&... values) {
        rows.push_back({cell(values)...});
    }

    std::string str() const;
    /// Throws ConfigError when the file cannot be written.
    void write(const std::filesystem::path& path) const;

    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    template <class T>
    static std::string cell(const T& v) {
        if constexpr (std::is_integral_v<T>)
            return std::to_string(v);
        else
            return format_number(static_cast<double>(v));
    }
};

/// Writes `text` to `path`, creating parent directories. Throws ConfigError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Hash of the config fields the d = 0 basis depends on.
std::string basis_cache_key(const RunConfig& cfg);

/// Binary cache of everything in the basis except the grid and the sampled
/// states. Doubles are stored in native byte order.
void save_basis(const UnperturbedBasis& basis, const std::string& key, const std::filesystem::path& path);

/// Empty when the file is missing or was written for another key; throws
/// NumericalError for a truncated or corrupt file.
std::optional<UnperturbedBasis> load_basis(const std::string& key, const std::filesystem::path& path);

/// Loads `<dir>/basis-<key>.bin` or solves and stores it. With
/// `allow_compute = false` a cache miss throws ConfigError.
UnperturbedBasis cached_basis(const RunConfig& cfg, const std::filesystem::path& dir, bool allow_compute,
                              bool* hit = nullptr);

}  // namespace micromotion
