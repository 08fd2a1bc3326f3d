#pragma once

#include "invertlab/run_config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace invertlab {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Report of one CLI run. Everything outside `meta` is a function of the
/// config and seed only; timestamps, host and wall-clock times live in meta.
class RunReport {
 public:
  RunReport(std::string command, const RunConfig& config);

  void add_stage(const std::string& name, nlohmann::json result, double seconds);
  /// Hashes a file already written below the output directory.
  void add_artifact(const std::filesystem::path& out_dir, const std::string& relative_path);
  void set_status(std::string status, int exit_code, std::string message = {});

  nlohmann::json to_json() const;
  /// to_json() without meta: the part that must be reproducible.
  nlohmann::json numerical_content() const;

  /// Writes report.json (pretty-printed, sorted keys) into out_dir.
  std::filesystem::path write(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  nlohmann::json config_;
  nlohmann::json stages_ = nlohmann::json::object();
  nlohmann::json artifacts_ = nlohmann::json::array();
  nlohmann::json status_ = nlohmann::json::object();
  nlohmann::json meta_ = nlohmann::json::object();
};

/// Writes `text` to out_dir / relative_path, creating directories.
std::filesystem::path write_text_file(const std::filesystem::path& out_dir, const std::string& relative_path,
                                      const std::string& text);

}  // namespace invertlab
