#include "gpr/data/corrections.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "gpr/data/tsv.hpp"

namespace gpr {

nlohmann::json CorrectionRecord::to_json() const {
  return {{"sample_id", sample_id},
          {"old_label", label_name(old_label)},
          {"new_label", label_name(new_label)},
          {"note", note},
          {"timestamp", timestamp}};
}

CorrectionRecord CorrectionRecord::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("correction record must be a JSON object");
  CorrectionRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.old_label = parse_label(j.at("old_label").get<std::string>());
    r.new_label = parse_label(j.at("new_label").get<std::string>());
    r.note = j.value("note", "");
    r.timestamp = j.value("timestamp", "");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("correction record: ") + e.what());
  }
  if (r.sample_id.empty()) throw DataError("correction record has an empty sample_id");
  if (r.old_label == r.new_label) {
    throw DataError("correction for " + r.sample_id + " does not change the label");
  }
  return r;
}

std::vector<CorrectionRecord> load_corrections(const std::filesystem::path& path) {
  std::vector<CorrectionRecord> out;
  std::ifstream in(path);
  if (!in) {
    if (!std::filesystem::exists(path)) return out;
    throw DataError("cannot read " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(CorrectionRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_corrections(const std::filesystem::path& path, const std::vector<CorrectionRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << r.to_json().dump() << '\n';
}

void append_correction(const std::filesystem::path& path, const CorrectionRecord& record) {
  const std::string line = record.to_json().dump() + "\n";
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw DataError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw DataError("write to " + path.string() + " failed: " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw DataError("fsync of " + path.string() + " failed");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::array<std::size_t, 3> label_counts(const std::vector<GapSample>& samples) {
  std::array<std::size_t, 3> counts{};
  for (const auto& s : samples) ++counts[static_cast<std::size_t>(s.label())];
  return counts;
}

std::string DeltaReport::table() const {
  std::ostringstream os;
  const std::string name = corpus.empty() ? "corpus" : corpus;
  const int w = static_cast<int>(std::max<std::size_t>(name.size(), 8)) + 2;
  os << std::left << std::setw(w) << "" << std::setw(24) << "Before sanitization" << std::setw(48)
     << "After sanitization" << '\n';
  os << std::setw(w) << "" << std::setw(8) << "A" << std::setw(8) << "B" << std::setw(8) << "NEITHER"
     << std::setw(16) << "A" << std::setw(16) << "B" << std::setw(16) << "NEITHER" << "Total" << '\n';
  os << std::setw(w) << name;
  for (const auto& c : classes) os << std::setw(8) << c.before;
  for (const auto& c : classes) {
    os << std::setw(16)
       << (std::to_string(c.after) + "(-" + std::to_string(c.moved_out) + ")(+" + std::to_string(c.moved_in) + ")");
  }
  os << total << '\n';
  return os.str();
}

nlohmann::json DeltaReport::to_json() const {
  nlohmann::json cls = nlohmann::json::object();
  for (Label l : kAllLabels) {
    const auto& c = classes[static_cast<std::size_t>(l)];
    cls[std::string(label_name(l))] = {
        {"before", c.before}, {"after", c.after}, {"moved_out", c.moved_out}, {"moved_in", c.moved_in}};
  }
  return {{"corpus", corpus},
          {"classes", cls},
          {"total", total},
          {"changed_samples", changed_samples},
          {"records_applied", records_applied}};
}

CorrectionResult apply_corrections(const std::vector<GapSample>& samples,
                                   const std::vector<CorrectionRecord>& corrections, const std::string& corpus) {
  CorrectionResult result{samples, {}};
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) index.emplace(samples[i].id, i);

  for (const auto& c : corrections) {
    auto it = index.find(c.sample_id);
    if (it == index.end()) throw UnknownSampleError("correction targets unknown sample '" + c.sample_id + "'");
    GapSample& s = result.samples[it->second];
    if (s.label() != c.old_label) {
      throw StaleCorrectionError("stale correction for " + c.sample_id + ": expected " +
                                 std::string(label_name(c.old_label)) + ", current label is " +
                                 std::string(label_name(s.label())));
    }
    s.set_label(c.new_label);
  }

  DeltaReport& r = result.report;
  r.corpus = corpus;
  r.total = samples.size();
  r.records_applied = corrections.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto before = static_cast<std::size_t>(samples[i].label());
    const auto after = static_cast<std::size_t>(result.samples[i].label());
    ++r.classes[before].before;
    ++r.classes[after].after;
    if (before != after) {
      ++r.classes[before].moved_out;
      ++r.classes[after].moved_in;
      ++r.changed_samples;
    }
  }
  return result;
}

std::vector<CorrectionRecord> revert_corrections(const std::vector<CorrectionRecord>& corrections) {
  std::vector<CorrectionRecord> out;
  out.reserve(corrections.size());
  for (auto it = corrections.rbegin(); it != corrections.rend(); ++it) {
    CorrectionRecord r = *it;
    std::swap(r.old_label, r.new_label);
    r.note = "revert: " + it->note;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gpr
