#include "gpr/service/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "gpr/data/corrections.hpp"
#include "gpr/tensor/errors.hpp"
#include "gpr/train/prediction_io.hpp"

namespace gpr {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("sha256 update");
  }
  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest, &len) != 1) throw std::runtime_error("sha256 final");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)), started_(utc_timestamp()) {}

void RunManifest::add_input(const std::filesystem::path& path) { inputs_[path.string()] = sha256_file(path); }

void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path.string()); }

nlohmann::json RunManifest::to_json() const {
  return {{"command", command_},
          {"config", config_},
          {"seed", seed},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"timings", {{"started", started_}, {"finished", finished_}, {"seconds", seconds_}}}};
}

void RunManifest::write(const std::filesystem::path& path) {
  finished_ = utc_timestamp();
  seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_file_atomic(path, to_json().dump(2) + "\n");
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  RunManifest m(j.value("command", ""));
  m.config_ = j.value("config", nlohmann::json::object());
  m.seed = j.value("seed", std::uint64_t{0});
  m.inputs_ = j.value("inputs", std::map<std::string, std::string>{});
  m.outputs_ = j.value("outputs", std::vector<std::string>{});
  const auto t = j.value("timings", nlohmann::json::object());
  m.started_ = t.value("started", "");
  m.finished_ = t.value("finished", "");
  m.seconds_ = t.value("seconds", 0.0);
  return m;
}

std::vector<std::string> RunManifest::changed_inputs() const {
  std::vector<std::string> out;
  for (const auto& [path, hash] : inputs_) {
    if (!std::filesystem::exists(path) || sha256_file(path) != hash) out.push_back(path);
  }
  return out;
}

}  // namespace gpr
