#include "gpr/service/review_service.hpp"

#include <httplib.h>

#include "gpr/data/utf8.hpp"
#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/log.hpp"

namespace gpr {

namespace {

nlohmann::json char_span(const Utf8Index& index, const std::string& text, const Span& span) {
  const std::size_t begin = index.to_code_point(span.offset);
  const std::size_t end = index.to_code_point(span.end());
  return {{"offset", begin}, {"length", end - begin}, {"text", text.substr(span.offset, span.length)}};
}

nlohmann::json probs_json(const std::array<double, 3>& p) {
  return {{"A", p[0]}, {"B", p[1]}, {"NEITHER", p[2]}};
}

ServiceResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

void reply(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

ReviewService::ReviewService(ReviewData data, std::filesystem::path ledger)
    : data_(std::move(data)), ledger_(std::move(ledger)) {
  for (std::size_t i = 0; i < data_.samples.size(); ++i) {
    if (!index_.emplace(data_.samples[i].id, i).second) {
      throw DataError("duplicate sample id '" + data_.samples[i].id + "'");
    }
  }
  records_ = load_corrections(ledger_);
  apply_corrections(data_.samples, records_);  // validates the replay
  for (std::size_t r = 0; r < records_.size(); ++r) {
    records_by_sample_[records_[r].sample_id].push_back(r);
    current_[records_[r].sample_id] = records_[r].new_label;
  }
}

ReviewService::~ReviewService() { stop(); }

Label ReviewService::current_label(std::size_t index) const {
  auto it = current_.find(data_.samples[index].id);
  return it == current_.end() ? data_.samples[index].label() : it->second;
}

nlohmann::json ReviewService::sample_summary(std::size_t index) const {
  const GapSample& s = data_.samples[index];
  const Label current = current_label(index);
  return {{"id", s.id},
          {"gold_label", label_name(s.label())},
          {"current_label", label_name(current)},
          {"corrected", current != s.label()},
          {"corrections", records_by_sample_.count(s.id) ? records_by_sample_.at(s.id).size() : 0}};
}

ServiceResponse ReviewService::list_samples(std::size_t page, std::size_t per_page) const {
  if (per_page == 0 || per_page > 1000) return error(400, "per_page must be in [1, 1000]");
  std::shared_lock lock(state_mutex_);
  const std::size_t total = data_.samples.size();
  const std::size_t pages = (total + per_page - 1) / per_page;
  if (page >= std::max<std::size_t>(pages, 1)) return error(400, "page " + std::to_string(page) + " out of range");
  nlohmann::json items = nlohmann::json::array();
  for (std::size_t i = page * per_page; i < std::min(total, (page + 1) * per_page); ++i) {
    items.push_back(sample_summary(i));
  }
  return {200, {{"page", page}, {"per_page", per_page}, {"total", total}, {"pages", pages}, {"samples", items}}};
}

ServiceResponse ReviewService::get_sample(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return error(404, "unknown sample '" + id + "'");
  const GapSample& s = data_.samples[it->second];
  const Utf8Index utf8(s.text);
  nlohmann::json body;
  {
    std::shared_lock lock(state_mutex_);
    body = sample_summary(it->second);
    nlohmann::json history = nlohmann::json::array();
    if (records_by_sample_.count(id)) {
      for (std::size_t r : records_by_sample_.at(id)) history.push_back(records_[r].to_json());
    }
    body["history"] = history;
  }
  body["text"] = s.text;
  body["url"] = s.url;
  body["gender"] = s.gender == Gender::kMasculine ? "M" : "F";
  body["offsets"] = "code_points";
  body["spans"] = {{"P", char_span(utf8, s.text, s.pronoun.span())},
                   {"A", char_span(utf8, s.text, s.a.span())},
                   {"B", char_span(utf8, s.text, s.b.span())}};
  nlohmann::json providers = nlohmann::json::array();
  const auto& clusters = data_.evidence.for_sample(id);
  const auto& order = data_.evidence.providers();
  for (const EvidenceCluster& c : clusters) {
    const auto pos = std::find(order.begin(), order.end(), c.provider);
    nlohmann::json mentions = nlohmann::json::array();
    for (const Span& m : c.mentions) mentions.push_back(char_span(utf8, s.text, m));
    providers.push_back({{"provider", c.provider},
                         {"color_index", pos - order.begin()},
                         {"clusters", {{{"cluster_index", 0}, {"mentions", mentions}}}}});
  }
  body["providers"] = providers;
  nlohmann::json probs = nlohmann::json::object();
  for (const auto& [model, set] : data_.predictions) {
    for (const auto& p : set) {
      if (p.id == id) probs[model] = probs_json(p.probs);
    }
  }
  body["probs"] = probs;
  auto trace = data_.traces.find(id);
  body["trace"] = trace == data_.traces.end() ? nlohmann::json(nullptr) : trace->second;
  return {200, body};
}

ServiceResponse ReviewService::post_label(const std::string& id, const std::string& body) {
  auto it = index_.find(id);
  if (it == index_.end()) return error(404, "unknown sample '" + id + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return error(400, "body is not valid JSON");
  }
  if (!j.is_object() || !j.contains("new_label") || !j["new_label"].is_string()) {
    return error(400, "body must be an object with a string new_label");
  }
  if (j.contains("note") && !j["note"].is_string()) return error(400, "note must be a string");
  Label new_label;
  try {
    new_label = parse_label(j["new_label"].get<std::string>());
  } catch (const std::exception& e) {
    return error(400, e.what());
  }

  std::unique_lock lock(state_mutex_);
  const Label current = current_label(it->second);
  if (current == new_label) {
    return error(409, "sample '" + id + "' is already labeled " + std::string(label_name(current)));
  }
  CorrectionRecord record;
  record.sample_id = id;
  record.old_label = current;
  record.new_label = new_label;
  record.note = j.value("note", "");
  record.timestamp = utc_timestamp();
  try {
    append_correction(ledger_, record);
  } catch (const std::exception& e) {
    log_warning(std::string("ledger append failed: ") + e.what());
    return error(500, "could not persist the correction");
  }
  records_by_sample_[id].push_back(records_.size());
  records_.push_back(record);
  current_[id] = new_label;
  nlohmann::json out = record.to_json();
  out["ledger_lines"] = records_.size();
  return {200, out};
}

ServiceResponse ReviewService::metrics() const {
  std::vector<GapSample> current = data_.samples;
  {
    std::shared_lock lock(state_mutex_);
    for (std::size_t i = 0; i < current.size(); ++i) current[i].set_label(current_label(i));
  }
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [model, set] : data_.predictions) models[model] = gap_f1(set, current).to_json();
  return {200, {{"models", models}}};
}

ServiceResponse ReviewService::health() const {
  std::shared_lock lock(state_mutex_);
  return {200, {{"status", "ok"}, {"samples", data_.samples.size()}, {"corrections", records_.size()}}};
}

void ReviewService::bind(httplib::Server& server) {
  server.Get("/health", [this](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
  server.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) { reply(res, metrics()); });
  server.Get("/samples", [this](const httplib::Request& req, httplib::Response& res) {
    auto number = [&](const char* key, std::size_t fallback) -> std::optional<std::size_t> {
      if (!req.has_param(key)) return fallback;
      const std::string v = req.get_param_value(key);
      if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos || v.size() > 9) return std::nullopt;
      return static_cast<std::size_t>(std::stoul(v));
    };
    const auto page = number("page", 0);
    const auto per_page = number("per_page", 50);
    if (!page || !per_page) return reply(res, error(400, "page and per_page must be nonnegative integers"));
    reply(res, list_samples(*page, *per_page));
  });
  server.Get(R"(/samples/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_sample(req.matches[1]));
  });
  server.Post(R"(/samples/([^/]+)/label)", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, post_label(req.matches[1], req.body));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    reply(res, error(500, what));
  });
}

bool ReviewService::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  bind(*server_);
  return server_->listen(host, port);
}

int ReviewService::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  bind(*server_);
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw std::runtime_error("could not bind to " + host);
  thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void ReviewService::stop() {
  if (server_) server_->stop();
  if (thread_ && thread_->joinable()) thread_->join();
  thread_.reset();
}

}  // namespace gpr
