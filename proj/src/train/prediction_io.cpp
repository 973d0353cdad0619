#include "gpr/train/prediction_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "gpr/data/tsv.hpp"
#include "gpr/tensor/errors.hpp"

namespace gpr {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "ID,A,B,NEITHER\n";
  for (const auto& p : predictions) os << p.id << "," << p.probs[0] << "," << p.probs[1] << "," << p.probs[2] << "\n";
  write_file_atomic(path, os.str());
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions file " + path.string());
  auto fail = [&](std::size_t line, const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  std::size_t number = 1;
  if (!std::getline(in, line)) fail(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ID,A,B,NEITHER") fail(1, "expected header ID,A,B,NEITHER");
  PredictionSet out;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) fail(number, "expected 4 fields, found " + std::to_string(fields.size()));
    PredictionRecord p;
    p.id = fields[0];
    if (p.id.empty()) fail(number, "empty id");
    if (!seen.insert(p.id).second) fail(number, "duplicate id '" + p.id + "'");
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t used = 0;
      try {
        p.probs[k] = std::stod(fields[k + 1], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[k + 1].size() || !std::isfinite(p.probs[k]) || p.probs[k] < 0.0) {
        fail(number, "bad probability '" + fields[k + 1] + "'");
      }
      total += p.probs[k];
    }
    if (std::abs(total - 1.0) > 1e-6) fail(number, "probabilities sum to " + std::to_string(total));
    out.push_back(std::move(p));
  }
  return out;
}

PredictionSet predictions_from_gold(const std::vector<GapSample>& gold) {
  PredictionSet out;
  for (const auto& s : gold) {
    PredictionRecord p;
    p.id = s.id;
    p.probs[static_cast<std::size_t>(s.label())] = 1.0;
    p.gold = s.label();
    p.gender = s.gender;
    out.push_back(std::move(p));
  }
  return out;
}

void write_report(const std::filesystem::path& stem, const ScoreReport& report, const std::string& row_name) {
  std::filesystem::path json_path = stem, txt_path = stem;
  json_path += ".json";
  txt_path += ".txt";
  write_file_atomic(json_path, report.to_json().dump(2) + "\n");
  write_file_atomic(txt_path, report.table(row_name));
}

}  // namespace gpr
