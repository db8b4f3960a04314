#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace fcs::io {

inline constexpr const char* kToolVersion = "1.0.0";

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex(std::uint64_t h);

// 17 significant digits, classic locale.
std::string number(double x);

class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> header, std::string manifest_hash);
  void row(const std::vector<double>& values);
  // First line is "# manifest <hash>".
  std::string str() const;

 private:
  std::size_t width_;
  std::string text_;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string subcommand;
  nlohmann::json parameters;
  double wall_time = 0.0;
  std::vector<std::string> outputs;

  // Hash over everything except wall time and the output list, so it is known before outputs are written.
  std::string hash() const;
  nlohmann::json to_json() const;
};

void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fcs::io
