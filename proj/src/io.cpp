#include "fcs/io.hpp"

#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>

#include "fcs/errors.hpp"

namespace fcs::io {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string number(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

CsvWriter::CsvWriter(std::vector<std::string> header, std::string manifest_hash) : width_(header.size()) {
  text_ = "# manifest " + manifest_hash + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) fail(ErrorCode::ConfigError, "CSV row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) text_ += (i ? "," : "") + number(values[i]);
  text_ += "\n";
}

std::string CsvWriter::str() const { return text_; }

std::string RunManifest::hash() const {
  const nlohmann::json key = {
      {"config_hash", config_hash}, {"tool_version", tool_version}, {"subcommand", subcommand}, {"parameters", parameters}};
  return hex(fnv1a(key.dump()));
}

nlohmann::json RunManifest::to_json() const {
  return {{"manifest_hash", hash()},   {"config_hash", config_hash}, {"tool_version", tool_version},
          {"subcommand", subcommand},  {"parameters", parameters},   {"wall_time", wall_time},
          {"outputs", outputs}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
}

}  // namespace fcs::io
