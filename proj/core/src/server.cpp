#include "splitaudit/server.hpp"

#include <atomic>
#include <charconv>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "httplib.h"
#include "json_codec.hpp"
#include "splitaudit/diagnostics.hpp"
#include "splitaudit/error.hpp"
#include "splitaudit/ingest.hpp"
#include "splitaudit/preprocess.hpp"
#include "splitaudit/report.hpp"
#include "splitaudit/serialize.hpp"
#include "splitaudit/split.hpp"
#include "splitaudit/stats.hpp"
#include "splitaudit/time_util.hpp"

namespace splitaudit {

namespace {

// Carries an HTTP status other than the default 400 for typed errors.
struct HttpError {
  int status;
  std::string code;
  std::string message;
};

HttpError not_found(const std::string& what) { return {404, "NotFound", what}; }

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  Json body{{"error", Json{{"code", code}, {"message", message}}}};
  return {status, body.dump(2, ' ', false, Json::error_handler_t::replace) + "\n", "application/json"};
}

ApiResponse json_response(int status, const Json& body) {
  return {status, body.dump(2, ' ', false, Json::error_handler_t::replace) + "\n", "application/json"};
}

struct DatasetEntry {
  std::string id;
  std::string name;
  InteractionLog log;
  std::size_t skipped_rows = 0;
};

struct BundleEntry {
  std::string id;
  std::shared_ptr<const DatasetEntry> dataset;
  InteractionLog source;  // the split's input, after preprocessing
  SplitBundle bundle;
};

std::optional<std::string> param(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

Timestamp parse_time_param(const std::string& key, const std::string& value) {
  std::int64_t ms = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), ms);
  if (ec == std::errc() && end == value.data() + value.size()) return ms;
  if (auto ts = parse_iso8601(value)) return *ts;
  throw Error(ErrorCode::kInvalidArgument, "parameter '" + key + "' is neither epoch milliseconds nor ISO-8601");
}

Granularity granularity_param(const QueryParams& q, Granularity fallback) {
  auto v = param(q, "granularity");
  if (!v) return fallback;
  auto g = granularity_from_name(*v);
  if (!g) throw Error(ErrorCode::kInvalidArgument, "unknown granularity '" + *v + "'");
  return *g;
}

EvalSide eval_param(const QueryParams& q) {
  auto v = param(q, "eval");
  if (!v) return EvalSide::kTest;
  auto s = eval_side_from_name(*v);
  if (!s) throw Error(ErrorCode::kInvalidArgument, "eval must be 'test' or 'validation', got '" + *v + "'");
  return *s;
}

// Accepts either a full document envelope or the bare report object.
template <typename T>
T decode_payload(const Json& j) {
  if constexpr (!std::is_same_v<T, ColumnMapping>) {
    if (j.is_object() && j.contains("schema_version")) return from_json_as<T>(j.dump());
  }
  try {
    return j.get<T>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

Json parse_body(std::string_view body) {
  if (body.empty()) throw Error(ErrorCode::kMalformedDocument, "request body is empty");
  return parse_json_text(body);
}

std::string document_body(const Document& doc) { return to_json(doc); }

}  // namespace

struct ApiService::State {
  ServerOptions options;

  mutable std::shared_mutex registry_mutex;
  std::map<std::string, std::shared_ptr<const DatasetEntry>> datasets;
  std::map<std::string, std::shared_ptr<const BundleEntry>> bundles;
  std::map<std::string, ThresholdConfig> thresholds;
  std::uint64_t next_id = 1;

  std::mutex cache_mutex;
  std::unordered_map<std::string, std::shared_ptr<const std::string>> cache;

  std::string allocate_id(char prefix) {
    // Caller holds registry_mutex exclusively.
    return std::string(1, prefix) + "-" + std::to_string(next_id++);
  }

  std::shared_ptr<const DatasetEntry> find_dataset(const std::string& id) const {
    std::shared_lock lock(registry_mutex);
    auto it = datasets.find(id);
    return it == datasets.end() ? nullptr : it->second;
  }
  std::shared_ptr<const BundleEntry> find_bundle(const std::string& id) const {
    std::shared_lock lock(registry_mutex);
    auto it = bundles.find(id);
    return it == bundles.end() ? nullptr : it->second;
  }

  // Computes outside the lock; the first published body wins so concurrent
  // identical requests all observe one complete value.
  template <typename F>
  std::shared_ptr<const std::string> cached(const std::string& key, F&& compute) {
    {
      std::lock_guard lock(cache_mutex);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
    }
    auto body = std::make_shared<const std::string>(compute());
    std::lock_guard lock(cache_mutex);
    return cache.emplace(key, std::move(body)).first->second;
  }

  // Resolves a subset role of a dataset or bundle.
  const InteractionLog& subset(const DatasetEntry* ds, const BundleEntry* b, const std::string& role) const {
    if (ds) {
      if (role == "raw") return ds->log;
      throw Error(ErrorCode::kInvalidArgument, "datasets only have the 'raw' role, got '" + role + "'");
    }
    if (role == "raw") return b->dataset->log;
    if (role == "preprocessed") return b->source;
    auto r = role_from_name(role);
    if (!r) throw Error(ErrorCode::kInvalidArgument, "unknown subset role '" + role + "'");
    return b->bundle.subset(*r);
  }

  ApiResponse register_dataset(const QueryParams& q, std::string_view body, std::string_view content_type);
  ApiResponse register_split(std::string_view body);
  ApiResponse register_thresholds(std::string_view body);
  ApiResponse compare(std::string_view body);
  ApiResponse list() const;
  ApiResponse entity_get(const std::string& id, const std::string& op, const QueryParams& q);
};

ApiResponse ApiService::State::register_dataset(const QueryParams& q, std::string_view body,
                                                std::string_view content_type) {
  ColumnMapping mapping;
  ParseOptions parse;
  std::string name;
  std::optional<std::string> path;
  std::string csv_storage;
  std::string_view csv;

  if (content_type.starts_with("application/json")) {
    Json j = parse_body(body);
    if (!j.is_object()) throw Error(ErrorCode::kMalformedDocument, "dataset registration must be an object");
    if (j.contains("mapping")) mapping = decode_payload<ColumnMapping>(j.at("mapping"));
    if (j.contains("skip_malformed")) parse.skip_malformed = j.at("skip_malformed").get<bool>();
    if (j.contains("name")) name = j.at("name").get<std::string>();
    if (j.contains("path")) path = j.at("path").get<std::string>();
    if (j.contains("csv")) {
      csv_storage = j.at("csv").get<std::string>();
      csv = csv_storage;
    }
    if (path.has_value() == j.contains("csv")) {
      throw Error(ErrorCode::kInvalidArgument, "give exactly one of 'path' or 'csv'");
    }
  } else {
    csv = body;
    if (auto v = param(q, "user_col")) mapping.user_column = *v;
    if (auto v = param(q, "item_col")) mapping.item_column = *v;
    if (auto v = param(q, "time_col")) mapping.timestamp_column = *v;
    if (auto v = param(q, "ordinal_col")) mapping.ordinal_column = *v;
    if (auto v = param(q, "time_format")) {
      auto f = timestamp_format_from_name(*v);
      if (!f) throw Error(ErrorCode::kInvalidArgument, "unknown time format '" + *v + "'");
      mapping.timestamp_format = *f;
    }
    if (auto v = param(q, "skip_malformed")) parse.skip_malformed = *v == "true" || *v == "1";
    if (auto v = param(q, "name")) name = *v;
  }
  mapping.validate();

  ParsedLog parsed;
  if (path) {
    if (!options.data_root) {
      throw Error(ErrorCode::kInvalidArgument,
                  "registering files by path is disabled; start the server with a data root");
    }
    const auto root = std::filesystem::weakly_canonical(*options.data_root);
    const auto file = std::filesystem::weakly_canonical(root / *path);
    auto [r, f] = std::mismatch(root.begin(), root.end(), file.begin(), file.end());
    if (r != root.end()) throw Error(ErrorCode::kInvalidArgument, "path escapes the data root");
    parsed = read_log(file, mapping, SubsetRole::kRaw, parse);
    if (name.empty()) name = file.filename().string();
  } else {
    if (name.empty()) name = "upload";
    parsed = read_log_text(csv, name, mapping, SubsetRole::kRaw, parse);
  }

  auto entry = std::make_shared<DatasetEntry>();
  entry->name = name;
  entry->log = std::move(parsed.log);
  entry->skipped_rows = parsed.skipped_rows;
  {
    std::unique_lock lock(registry_mutex);
    entry->id = allocate_id('d');
    datasets.emplace(entry->id, entry);
  }
  return json_response(201, Json{{"id", entry->id},
                                 {"name", entry->name},
                                 {"n_users", entry->log.user_count()},
                                 {"n_items", entry->log.item_count()},
                                 {"n_interactions", entry->log.size()},
                                 {"skipped_rows", entry->skipped_rows},
                                 {"fingerprint", log_fingerprint(entry->log)}});
}

ApiResponse ApiService::State::register_split(std::string_view body) {
  Json j = parse_body(body);
  if (!j.is_object() || !j.contains("dataset")) {
    throw Error(ErrorCode::kInvalidArgument, "split request needs a 'dataset' id");
  }
  const std::string dataset_id = j.at("dataset").get<std::string>();
  auto ds = find_dataset(dataset_id);
  if (!ds) throw not_found("unknown dataset '" + dataset_id + "'");
  SplitSpec spec = j.contains("split") ? decode_payload<SplitSpec>(j.at("split")) : SplitSpec{};
  PreprocessSpec pre = j.contains("preprocess") ? decode_payload<PreprocessSpec>(j.at("preprocess")) : PreprocessSpec{};
  spec.validate();
  pre.validate();

  auto entry = std::make_shared<BundleEntry>();
  entry->dataset = ds;
  entry->source = preprocess(ds->log, pre);
  Provenance prov{ds->name, log_fingerprint(ds->log), pre};
  entry->bundle = make_split(entry->source, spec, prov);
  const auto description = describe_split(entry->bundle);
  {
    std::unique_lock lock(registry_mutex);
    entry->id = allocate_id('b');
    bundles.emplace(entry->id, entry);
  }
  return json_response(201, Json{{"id", entry->id}, {"dataset", dataset_id}, {"description", envelope(description)}});
}

ApiResponse ApiService::State::register_thresholds(std::string_view body) {
  ThresholdConfig t = decode_payload<ThresholdConfig>(parse_body(body));
  t.validate();
  std::string id;
  {
    std::unique_lock lock(registry_mutex);
    id = allocate_id('t');
    thresholds.emplace(id, t);
  }
  return json_response(201, Json{{"id", id}, {"thresholds", envelope(t)}});
}

ApiResponse ApiService::State::compare(std::string_view body) {
  Json j = parse_body(body);
  if (!j.is_object() || !j.contains("bundles") || !j.at("bundles").is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "compare request needs a 'bundles' array of ids");
  }
  std::vector<std::shared_ptr<const BundleEntry>> entries;
  for (const auto& id : j.at("bundles")) {
    auto b = find_bundle(id.get<std::string>());
    if (!b) throw not_found("unknown bundle '" + id.get<std::string>() + "'");
    entries.push_back(std::move(b));
  }
  CompareOptions opts;
  if (j.contains("allow_provenance_mismatch")) opts.allow_provenance_mismatch = j.at("allow_provenance_mismatch").get<bool>();
  std::vector<NamedBundle> named;
  for (const auto& e : entries) named.push_back({e->id, &e->bundle});
  const InteractionLog* reference = entries.empty() ? nullptr : &entries.front()->source;
  return {200, document_body(compare_splits(named, reference, opts)), "application/json"};
}

ApiResponse ApiService::State::list() const {
  Json ds = Json::array(), bs = Json::array();
  std::shared_lock lock(registry_mutex);
  for (const auto& [id, d] : datasets) {
    ds.push_back(Json{{"id", id}, {"name", d->name}, {"n_interactions", d->log.size()}});
  }
  for (const auto& [id, b] : bundles) {
    bs.push_back(Json{{"id", id}, {"dataset", b->dataset->id}, {"split", b->bundle.spec}});
  }
  return json_response(200, Json{{"datasets", ds}, {"bundles", bs}});
}

ApiResponse ApiService::State::entity_get(const std::string& id, const std::string& op, const QueryParams& q) {
  auto ds = find_dataset(id);
  auto b = ds ? nullptr : find_bundle(id);
  if (!ds && !b) throw not_found("unknown dataset or bundle '" + id + "'");
  const std::string default_role = ds ? "raw" : "preprocessed";

  std::string key = id + "|" + op;
  std::function<std::string()> compute;

  if (op == "stats" || op == "temporal" || op == "repeats") {
    const std::string role = param(q, "role").value_or(default_role);
    const auto reference = param(q, "reference");
    const InteractionLog& log = subset(ds.get(), b.get(), role);
    const InteractionLog* ref = reference ? &subset(ds.get(), b.get(), *reference) : nullptr;
    key += "|" + role + "|" + reference.value_or("");
    compute = [&op, &log, ref] {
      auto stats = [&op](const InteractionLog& l) -> StatsReport {
        if (op == "stats") return core_stats(l);
        if (op == "temporal") return temporal_stats(l);
        return repeat_stats(l);
      };
      if (ref) return document_body(compare_stats(stats(log), stats(*ref)));
      return std::visit([](auto&& r) { return document_body(r); }, stats(log));
    };
  } else if (op == "timeline") {
    std::vector<std::string> roles;
    if (auto v = param(q, "roles")) {
      std::string_view rest = *v;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        roles.emplace_back(rest.substr(0, comma));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    } else if (ds) {
      roles = {"raw"};
    } else {
      roles = {"train", "val_input", "val_target", "test_input", "test_target"};
    }
    const Granularity g = granularity_param(q, Granularity::kDay);
    const auto start = param(q, "start");
    const auto end = param(q, "end");
    std::optional<TimeRange> range;
    if (start || end) {
      if (!start || !end) throw Error(ErrorCode::kInvalidArgument, "give both 'start' and 'end'");
      range = TimeRange{parse_time_param("start", *start), parse_time_param("end", *end)};
      if (range->start > range->end) throw Error(ErrorCode::kInvalidRange, "start is after end");
    }
    std::vector<NamedLog> logs;
    for (const auto& r : roles) {
      logs.push_back({r, &subset(ds.get(), b.get(), r)});
      key += "|" + r;
    }
    key += "|" + std::string(granularity_name(g));
    if (range) key += "|" + std::to_string(range->start) + "|" + std::to_string(range->end);
    compute = [logs, g, range] { return document_body(timeline(logs, g, range)); };
  } else if (op == "leakage" || op == "coldstart" || op == "shift") {
    if (!b) throw Error(ErrorCode::kInvalidArgument, "'" + op + "' needs a bundle id, not a dataset");
    const EvalSide side = eval_param(q);
    key += "|" + std::string(eval_side_name(side));
    if (op == "shift") {
      const std::string role = param(q, "reference").value_or("preprocessed");
      const InteractionLog& ref = subset(nullptr, b.get(), role);
      key += "|" + role;
      compute = [&b, &ref, side] { return document_body(distribution_shift(b->bundle, ref, side)); };
    } else {
      const Granularity g = granularity_param(q, Granularity::kDay);
      key += "|" + std::string(granularity_name(g));
      if (op == "leakage") {
        compute = [&b, side, g] { return document_body(leakage(b->bundle, side, g)); };
      } else {
        compute = [&b, side, g] { return document_body(cold_start(b->bundle, side, g)); };
      }
    }
  } else if (op == "summary" || op == "audit") {
    ThresholdConfig thresholds = ThresholdConfig::defaults();
    if (auto inline_json = param(q, "thresholds")) {
      thresholds = decode_payload<ThresholdConfig>(parse_json_text(*inline_json));
    } else if (auto tid = param(q, "thresholds_id")) {
      std::shared_lock lock(registry_mutex);
      auto it = this->thresholds.find(*tid);
      if (it == this->thresholds.end()) throw not_found("unknown thresholds '" + *tid + "'");
      thresholds = it->second;
    }
    thresholds.validate();
    const Granularity g = granularity_param(q, Granularity::kDay);
    key += "|" + std::string(granularity_name(g)) + "|" + to_json(thresholds);
    const bool want_summary = op == "summary";
    compute = [&ds, &b, thresholds, g, want_summary] {
      AuditOptions opts;
      opts.granularity = g;
      SummaryIdentity identity;
      AuditDetails details;
      if (ds) {
        identity.dataset = ds->name;
        details = run_audit(ds->log, nullptr, opts);
      } else {
        identity.dataset = b->dataset->name;
        identity.provenance = b->bundle.provenance;
        identity.split = b->bundle.spec;
        details = run_audit(b->source, &b->bundle, opts);
      }
      if (!want_summary) return document_body(details);
      return document_body(summarize(details, thresholds, identity));
    };
  } else {
    throw not_found("unknown endpoint '" + op + "'");
  }

  auto body = cached(key, compute);
  return {200, *body, "application/json"};
}

ApiService::ApiService(ServerOptions options) : state_(std::make_unique<State>()) {
  state_->options = std::move(options);
}

ApiService::~ApiService() = default;

const ServerOptions& ApiService::options() const { return state_->options; }

ApiResponse ApiService::handle(std::string_view method, std::string_view path, const QueryParams& query,
                               std::string_view body, std::string_view content_type) {
  try {
    if (body.size() > state_->options.max_upload_bytes) {
      throw HttpError{413, "PayloadTooLarge", "request body exceeds " +
                                                  std::to_string(state_->options.max_upload_bytes) + " bytes"};
    }
    constexpr std::string_view kPrefix = "/api/v1/";
    if (!path.starts_with(kPrefix)) throw not_found("unknown path");
    std::vector<std::string> parts;
    std::string_view rest = path.substr(kPrefix.size());
    while (!rest.empty()) {
      const auto slash = rest.find('/');
      if (slash != 0) parts.emplace_back(rest.substr(0, slash));
      rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
    }
    if (method == "POST" && parts.size() == 1) {
      if (parts[0] == "datasets") return state_->register_dataset(query, body, content_type);
      if (parts[0] == "splits") return state_->register_split(body);
      if (parts[0] == "thresholds") return state_->register_thresholds(body);
      if (parts[0] == "compare") return state_->compare(body);
    }
    if (method == "GET" && parts.size() == 1 && (parts[0] == "datasets" || parts[0] == "bundles")) {
      return state_->list();
    }
    if (method == "GET" && parts.size() == 2) return state_->entity_get(parts[0], parts[1], query);
    if (method != "GET" && method != "POST") throw HttpError{405, "MethodNotAllowed", "method not allowed"};
    throw not_found("unknown endpoint");
  } catch (const HttpError& e) {
    return error_response(e.status, e.code, e.message);
  } catch (const Error& e) {
    return error_response(400, error_code_name(e.code()), e.what());
  } catch (const Json::exception& e) {
    return error_response(400, error_code_name(ErrorCode::kMalformedDocument), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

struct ApiServer::Impl {
  explicit Impl(ServerOptions options) : service(options), options(std::move(options)) {}
  ApiService service;
  ServerOptions options;
  httplib::Server http;
  int port = -1;
};

ApiServer::ApiServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  auto& http = impl_->http;
  auto* service = &impl_->service;
  const std::string origin = impl_->options.cors_origin;
  http.set_payload_max_length(impl_->options.max_upload_bytes);
  http.set_default_headers({{"Access-Control-Allow-Origin", origin},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  auto forward = [service](const httplib::Request& req, httplib::Response& res) {
    QueryParams query(req.params.begin(), req.params.end());
    auto r = service->handle(req.method, req.path, query, req.body, req.get_header_value("Content-Type"));
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  http.Get(R"(/api/v1/.*)", forward);
  http.Post(R"(/api/v1/.*)", forward);
  http.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 413 ? "PayloadTooLarge" : (res.status == 404 ? "NotFound" : "HttpError");
    auto r = error_response(res.status, code, httplib::status_message(res.status));
    res.set_content(r.body, r.content_type);
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  auto& i = *impl_;
  i.port = i.options.port == 0 ? i.http.bind_to_any_port(i.options.host) : (i.http.bind_to_port(i.options.host, i.options.port) ? i.options.port : -1);
  if (i.port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + i.options.host + ":" + std::to_string(i.options.port));
  }
  return i.port;
}

void ApiServer::serve() { impl_->http.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

void ApiServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

ApiService& ApiServer::service() { return impl_->service; }

}  // namespace splitaudit
