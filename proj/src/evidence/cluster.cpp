#include "gpr/evidence/cluster.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gpr/data/utf8.hpp"
#include "gpr/tensor/log.hpp"

namespace gpr {

void EvidenceCluster::canonicalize() {
  std::sort(mentions.begin(), mentions.end());
  mentions.erase(std::unique(mentions.begin(), mentions.end()), mentions.end());
}

bool EvidenceCluster::contains(const Span& span) const {
  return std::find(mentions.begin(), mentions.end(), span) != mentions.end();
}

const std::vector<EvidenceCluster>& EvidenceSet::for_sample(const std::string& sample_id) const {
  static const std::vector<EvidenceCluster> kEmpty;
  auto it = by_sample_.find(sample_id);
  return it == by_sample_.end() ? kEmpty : it->second;
}

void EvidenceSet::put(EvidenceCluster cluster) {
  auto pos = std::find(providers_.begin(), providers_.end(), cluster.provider);
  if (pos == providers_.end()) {
    providers_.push_back(cluster.provider);
    pos = providers_.end() - 1;
  }
  const auto rank = pos - providers_.begin();
  auto& group = by_sample_[cluster.sample_id];
  auto slot = std::find_if(group.begin(), group.end(),
                           [&](const EvidenceCluster& c) { return c.provider == cluster.provider; });
  if (slot != group.end()) {
    *slot = std::move(cluster);
    return;
  }
  auto at = std::find_if(group.begin(), group.end(), [&](const EvidenceCluster& c) {
    return std::find(providers_.begin(), providers_.end(), c.provider) - providers_.begin() > rank;
  });
  group.insert(at, std::move(cluster));
}

std::size_t EvidenceSet::cluster_count() const {
  std::size_t n = 0;
  for (const auto& [id, group] : by_sample_) n += group.size();
  return n;
}

EvidenceSet load_evidence(const std::filesystem::path& path, const std::vector<GapSample>& samples,
                          const std::vector<std::string>& providers) {
  std::unordered_map<std::string, const GapSample*> by_id;
  for (const auto& s : samples) by_id.emplace(s.id, &s);
  std::ifstream in(path);
  if (!in) throw DataError("cannot read evidence file " + path.string());

  std::vector<EvidenceCluster> clusters;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::set<std::string> names;
  std::size_t dropped = 0;
  std::size_t duplicates = 0;
  std::size_t unknown = 0;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    EvidenceCluster c;
    try {
      c.sample_id = j.at("sample_id").get<std::string>();
      c.provider = j.at("provider").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!providers.empty() && std::find(providers.begin(), providers.end(), c.provider) == providers.end()) continue;
    auto sample = by_id.find(c.sample_id);
    if (sample == by_id.end()) {
      ++unknown;
      continue;
    }
    const std::string& body = sample->second->text;
    const Utf8Index idx(body);
    for (const auto& m : j.value("mentions", nlohmann::json::array())) {
      const auto cp = m.value("offset", static_cast<std::int64_t>(-1));
      const auto len = m.value("length", static_cast<std::int64_t>(-1));
      if (cp < 0 || len <= 0 || static_cast<std::size_t>(cp + len) > idx.code_points()) {
        log_warning(where + ": mention [" + std::to_string(cp) + ", +" + std::to_string(len) +
                    ") out of bounds for " + c.sample_id + ", dropped");
        ++dropped;
        continue;
      }
      const std::size_t b = idx.to_byte(static_cast<std::size_t>(cp));
      c.mentions.push_back({b, idx.to_byte(static_cast<std::size_t>(cp + len)) - b});
    }
    c.canonicalize();
    names.insert(c.provider);
    const auto key = std::make_pair(c.sample_id, c.provider);
    if (auto it = seen.find(key); it != seen.end()) {
      log_warning(where + ": duplicate line for (" + c.sample_id + ", " + c.provider + "), keeping the last");
      ++duplicates;
      clusters[it->second] = std::move(c);
    } else {
      seen.emplace(key, clusters.size());
      clusters.push_back(std::move(c));
    }
  }
  if (unknown > 0) log_warning(path.string() + ": " + std::to_string(unknown) + " lines name samples not in the corpus");

  EvidenceSet set(providers.empty() ? std::vector<std::string>(names.begin(), names.end()) : providers);
  for (auto& c : clusters) set.put(std::move(c));
  set.dropped_mentions = dropped;
  set.duplicate_lines = duplicates;
  set.unknown_samples = unknown;
  return set;
}

void save_evidence(const std::filesystem::path& path, const EvidenceSet& evidence,
                   const std::vector<GapSample>& samples) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : samples) {
    const auto& group = evidence.for_sample(s.id);
    if (group.empty()) continue;
    const Utf8Index idx(s.text);
    for (const auto& c : group) {
      EvidenceCluster canon = c;
      canon.canonicalize();
      nlohmann::json ms = nlohmann::json::array();
      for (const auto& m : canon.mentions) {
        const std::size_t cp = idx.to_code_point(m.offset);
        ms.push_back({{"offset", cp}, {"length", idx.to_code_point(m.end()) - cp}});
      }
      out << nlohmann::json{{"sample_id", s.id}, {"provider", c.provider}, {"mentions", ms}}.dump() << '\n';
    }
  }
}

std::vector<std::string> parse_provider_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) throw ConfigError("empty provider name in '" + csv + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace gpr
