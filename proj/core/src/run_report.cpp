#include "invertlab/run_report.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace invertlab {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("SHA-256 final failed");
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json config_json(const RunConfig& c) {
  return {{"map", c.map},
          {"q", c.q},
          {"box", c.box},
          {"plane", c.plane},
          {"points", c.points},
          {"tolerances", {{"solve", c.solve_tol}, {"mesh", c.mesh_tol}, {"dedup", c.dedup_tol}}},
          {"radii", c.radii},
          {"h", c.h},
          {"ball_radius", c.ball_radius},
          {"level", c.level},
          {"mesh_source", c.mesh_source},
          {"seed", c.seed},
          {"construction", c.construction},
          {"starts", c.starts},
          {"out", c.out},
          {"config_text", serialize(c)}};
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

RunReport::RunReport(std::string command, const RunConfig& config)
    : command_(std::move(command)), config_(config_json(config)) {
  meta_["started"] = utc_now();
  meta_["jobs"] = config.jobs;
  meta_["hardware_threads"] = std::thread::hardware_concurrency();
  meta_["wall_clock_s"] = nlohmann::json::object();
}

void RunReport::add_stage(const std::string& name, nlohmann::json result, double seconds) {
  stages_[name] = std::move(result);
  meta_["wall_clock_s"][name] = seconds;
}

void RunReport::add_artifact(const std::filesystem::path& out_dir, const std::string& relative_path) {
  const auto full = out_dir / relative_path;
  artifacts_.push_back({{"path", relative_path},
                        {"sha256", sha256_file(full)},
                        {"bytes", std::filesystem::file_size(full)}});
}

void RunReport::set_status(std::string status, int exit_code, std::string message) {
  status_ = {{"status", std::move(status)}, {"exit_code", exit_code}};
  if (!message.empty()) status_["message"] = std::move(message);
}

nlohmann::json RunReport::numerical_content() const {
  return {{"command", command_}, {"config", config_}, {"stages", stages_}, {"artifacts", artifacts_},
          {"result", status_}};
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j = numerical_content();
  nlohmann::json meta = meta_;
  meta["finished"] = utc_now();
  j["meta"] = std::move(meta);
  return j;
}

std::filesystem::path RunReport::write(const std::filesystem::path& out_dir) const {
  return write_text_file(out_dir, "report.json", to_json().dump(2) + "\n");
}

std::filesystem::path write_text_file(const std::filesystem::path& out_dir, const std::string& relative_path,
                                      const std::string& text) {
  const auto full = out_dir / relative_path;
  std::filesystem::create_directories(full.parent_path());
  std::ofstream out(full, std::ios::binary);
  if (!out) throw Error("cannot write " + full.string());
  out << text;
  if (!out) throw Error("write failed for " + full.string());
  return full;
}

}  // namespace invertlab
