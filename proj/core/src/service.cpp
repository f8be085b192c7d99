#include "tsv/service.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "tsv/exchange_json.hpp"

namespace tsv {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kExtractKeys = {
    "op",     "id",       "mesh",     "eps",  "eps_major", "eps_medium", "eps_minor",
    "levels", "types",    "strategy", "scheme", "step_rel", "seed",      "slice",
    "scalar", "frames"};

double positive_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ParamError(field, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) throw ParamError(field, "must be positive");
  return x;
}

std::string string_value(const json& v, const std::string& field) {
  if (!v.is_string()) throw ParamError(field, "expected a string");
  return v.get<std::string>();
}

template <typename Parse>
auto parse_name(const json& v, const std::string& field, Parse parse) {
  const std::string s = string_value(v, field);
  try {
    return parse(s);
  } catch (const std::invalid_argument& e) {
    throw ParamError(field, e.what());
  }
}

std::array<bool, 3> parse_types(const json& v) {
  std::vector<std::string> names;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::size_t start = 0;
    while (start <= s.size()) {
      const std::size_t end = std::min(s.find(',', start), s.size());
      if (end > start) names.push_back(s.substr(start, end - start));
      start = end + 1;
    }
  } else if (v.is_array()) {
    for (const json& x : v) names.push_back(string_value(x, "types"));
  } else {
    throw ParamError("types", "expected a list of PSL types");
  }
  std::array<bool, 3> enabled{false, false, false};
  for (const std::string& n : names) {
    try {
      enabled[static_cast<std::size_t>(index_of(parse_psl_type(n)))] = true;
    } catch (const std::invalid_argument& e) {
      throw ParamError("types", e.what());
    }
  }
  if (!enabled[0] && !enabled[1] && !enabled[2]) throw ParamError("types", "no PSL type selected");
  return enabled;
}

ExtractionRequest parse_params(const json& j) {
  for (const auto& item : j.items()) {
    if (!kExtractKeys.contains(item.key())) throw ParamError(item.key(), "unknown parameter");
  }
  ExtractionRequest req;
  if (const auto it = j.find("mesh"); it != j.end()) req.mesh = string_value(*it, "mesh");
  if (const auto it = j.find("eps"); it != j.end()) {
    if (it->is_array()) {
      if (it->size() != 3) throw ParamError("eps", "expected one value or three values");
      for (std::size_t t = 0; t < 3; ++t) req.eps[t] = positive_number((*it)[t], "eps");
    } else {
      req.eps.fill(positive_number(*it, "eps"));
    }
  }
  const char* per_type[3] = {"eps_major", "eps_medium", "eps_minor"};
  for (std::size_t t = 0; t < 3; ++t) {
    if (const auto it = j.find(per_type[t]); it != j.end()) {
      req.eps[t] = positive_number(*it, per_type[t]);
    }
  }
  if (const auto it = j.find("levels"); it != j.end()) {
    if (!it->is_number_integer()) throw ParamError("levels", "expected an integer");
    req.levels = it->get<int>();
    if (req.levels < 1 || req.levels > 30) throw ParamError("levels", "must lie in [1, 30]");
  }
  if (const auto it = j.find("types"); it != j.end()) req.enabled = parse_types(*it);
  if (const auto it = j.find("strategy"); it != j.end()) {
    req.strategy = parse_name(*it, "strategy", [](const std::string& s) { return parse_strategy(s); });
  }
  if (const auto it = j.find("scheme"); it != j.end()) {
    req.scheme = parse_name(*it, "scheme", [](const std::string& s) { return parse_scheme(s); });
  }
  if (const auto it = j.find("step_rel"); it != j.end()) req.step_rel = positive_number(*it, "step_rel");
  if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 3) throw ParamError("seed", "expected [x, y, z]");
    Vec3 s;
    for (std::size_t a = 0; a < 3; ++a) {
      if (!(*it)[a].is_number()) throw ParamError("seed", "expected [x, y, z]");
      s[a] = (*it)[a].get<double>();
    }
    req.seed = s;
  }
  if (const auto it = j.find("slice"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 3) throw ParamError("slice", "expected three levels");
    std::array<int, 3> s{};
    for (std::size_t t = 0; t < 3; ++t) {
      if (!(*it)[t].is_number_integer()) throw ParamError("slice", "expected integers");
      s[t] = (*it)[t].get<int>();
    }
    req.slice = s;
  }
  if (const auto it = j.find("scalar"); it != j.end()) {
    req.scalar = parse_name(*it, "scalar", [](const std::string& s) { return parse_scalar_selector(s); });
  }
  if (const auto it = j.find("frames"); it != j.end()) {
    if (!it->is_boolean()) throw ParamError("frames", "expected true or false");
    req.frames = it->get<bool>();
  }
  return req;
}

// Canonical form used as the result cache key.
json canonical(const ExtractionRequest& r) {
  json j = {{"mesh", r.mesh},
            {"eps", r.eps},
            {"levels", r.levels},
            {"enabled", r.enabled},
            {"strategy", std::string(to_string(r.strategy))},
            {"scheme", std::string(to_string(r.scheme))},
            {"step_rel", r.step_rel},
            {"scalar", std::string(to_string(r.scalar))},
            {"frames", r.frames}};
  j["seed"] = r.seed ? json::array({r.seed->x, r.seed->y, r.seed->z}) : json();
  j["slice"] = r.slice ? json(*r.slice) : json();
  return j;
}

json stats_json(const ExtractionStats& s) {
  json levels = json::array();
  std::array<int, 3> per_type{0, 0, 0};
  for (const auto& l : s.per_level) {
    levels.push_back({{"major", l[0]}, {"medium", l[1]}, {"minor", l[2]}});
    for (int t = 0; t < 3; ++t) per_type[t] += l[t];
  }
  return {{"psls", s.psl_count},
          {"exported", s.exported},
          {"per_type", {{"major", per_type[0]}, {"medium", per_type[1]}, {"minor", per_type[2]}}},
          {"per_level", std::move(levels)},
          {"seeds", s.candidates},
          {"wall_time", s.wall_time},
          {"job_id", s.job_id},
          {"started_ns", s.started_ns},
          {"finished_ns", s.finished_ns},
          {"cached", s.cached}};
}

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

json error_reply(const json& id, const std::string& code, const std::string& message,
                 const std::string& field = {}) {
  json err = {{"code", code}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  json reply = {{"status", "error"}, {"error", std::move(err)}};
  if (!id.is_null()) reply["id"] = id;
  return reply;
}

}  // namespace

json mesh_info(const HexMesh& m) {
  const Aabb& b = m.bbox();
  return {{"kind", m.kind() == MeshKind::cartesian ? "cartesian" : "unstructured"},
          {"cells", m.cell_count()},
          {"vertices", m.vertex_count()},
          {"d0", m.d0()},
          {"min_edge", m.min_edge_length()},
          {"bbox", json::array({json::array({b.min.x, b.min.y, b.min.z}),
                                json::array({b.max.x, b.max.y, b.max.z})})},
          {"boundary_faces", m.boundary_faces().size()},
          {"loaded_vertices", m.loaded_vertices().size()},
          {"fixed_vertices", m.fixed_vertices().size()}};
}

SeedingConfig make_seeding_config(const HexMesh& mesh, const ExtractionRequest& req) {
  for (std::size_t t = 0; t < 3; ++t) {
    if (!(req.eps[t] > 0.0) || !std::isfinite(req.eps[t])) throw ParamError("eps", "must be positive");
  }
  if (req.levels < 1 || req.levels > 30) throw ParamError("levels", "must lie in [1, 30]");
  if (!(req.step_rel > 0.0) || !std::isfinite(req.step_rel)) {
    throw ParamError("step_rel", "must be positive");
  }
  SeedingConfig cfg;
  cfg.eps_rel = req.eps;
  cfg.levels = req.levels;
  cfg.enabled = req.enabled;
  cfg.strategy = req.strategy;
  cfg.initial_seed = req.seed;
  cfg.trace = default_trace_config(mesh, req.step_rel);
  cfg.trace.scheme = req.scheme;
  if (!req.enabled[0] && !req.enabled[1] && !req.enabled[2]) {
    throw ParamError("types", "no PSL type selected");
  }
  if (req.strategy == SeedStrategy::loaded_fixed && mesh.loaded_vertices().empty() &&
      mesh.fixed_vertices().empty()) {
    throw ParamError("strategy", "mesh has no loaded or fixed vertices");
  }
  try {
    cfg.validate(mesh);
  } catch (const ConfigError& e) {
    throw ParamError("eps", e.what());
  }
  if (req.slice) {
    for (int l : *req.slice) {
      if (l < 0 || l > req.levels) throw ParamError("slice", "levels must lie in [0, levels]");
    }
  }
  return cfg;
}

ExtractionResult run_extraction(const CellLocator& locator, const ExtractionRequest& req) {
  const HexMesh& mesh = locator.mesh();
  const SeedingConfig cfg = make_seeding_config(mesh, req);
  const auto t0 = std::chrono::steady_clock::now();
  ExtractionResult out;
  out.stats.started_ns = now_ns();
  PslSet set;
  try {
    set = build_lod(locator, cfg);
  } catch (const ConfigError& e) {
    throw ParamError("strategy", e.what());
  }
  const std::array<int, 3> slice = req.slice.value_or(std::array<int, 3>{req.levels, req.levels, req.levels});
  const PslSliceView view = lod_slice(set, slice);
  out.document = export_psls(mesh, view, req.scalar, req.frames);
  out.stats.per_level = set.tallies;
  out.stats.psl_count = set.psls.size();
  out.stats.exported = view.size();
  out.stats.candidates = set.candidate_count;
  out.stats.finished_ns = now_ns();
  out.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ExtractionRequest parse_extraction_request(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParamError("request", e.what());
  }
  if (!j.is_object()) throw ParamError("request", "expected a JSON object");
  return parse_params(j);
}

void MeshCatalog::add(const std::string& name, HexMesh mesh) {
  auto entry = std::make_shared<const LoadedMesh>(std::move(mesh));
  std::lock_guard lock(mutex_);
  for (auto& [n, e] : entries_) {
    if (n == name) {
      e = std::move(entry);
      return;
    }
  }
  entries_.emplace_back(name, std::move(entry));
}

void MeshCatalog::add_file(const std::string& name, const std::filesystem::path& path) {
  add(name, load_mesh_file(path));
}

std::shared_ptr<const LoadedMesh> MeshCatalog::find(const std::string& name) const {
  std::lock_guard lock(mutex_);
  for (const auto& [n, e] : entries_) {
    if (n == name) return e;
  }
  return nullptr;
}

std::vector<std::string> MeshCatalog::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& entry : entries_) out.push_back(entry.first);
  return out;
}

struct ExtractionService::Impl {
  struct Cached {
    json key;
    json payload;
    ExtractionStats stats;
  };
  struct Outcome {
    json payload;
    ExtractionStats stats;
  };

  Impl(MeshCatalog& c, ServiceOptions o) : catalog(c), options(o), worker([this] { loop(); }) {}

  ~Impl() {
    {
      std::lock_guard lock(mutex);
      stopping = true;
    }
    wake.notify_all();
    worker.join();
  }

  void loop() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mutex);
        wake.wait(lock, [this] { return stopping || !queue.empty(); });
        if (queue.empty()) return;
        job = std::move(queue.front());
        queue.pop_front();
      }
      job();
    }
  }

  // Runs on the worker thread, so jobs never overlap.
  Outcome execute(const LoadedMesh& mesh, const ExtractionRequest& req, const json& key) {
    if (cache && cache->key == key) {
      Outcome hit{cache->payload, cache->stats};
      hit.stats.cached = true;
      return hit;
    }
    const std::uint64_t id = ++jobs;
    ExtractionResult r = run_extraction(mesh.locator, req);
    r.stats.job_id = id;
    json payload = detail::exchange_to_json(r.document);
    spdlog::info("job {}: {} PSLs on '{}' in {:.3f} s", id, r.stats.psl_count, req.mesh,
                 r.stats.wall_time);
    cache = Cached{key, payload, r.stats};
    return {std::move(payload), r.stats};
  }

  Outcome submit(std::shared_ptr<const LoadedMesh> mesh, ExtractionRequest req, json key) {
    auto task = std::make_shared<std::packaged_task<Outcome()>>(
        [this, mesh = std::move(mesh), req = std::move(req), key = std::move(key)] {
          return execute(*mesh, req, key);
        });
    auto future = task->get_future();
    {
      std::lock_guard lock(mutex);
      queue.emplace_back([task] { (*task)(); });
    }
    wake.notify_one();
    return future.get();
  }

  std::shared_ptr<const LoadedMesh> resolve(const std::string& name) {
    if (name.empty()) throw ParamError("mesh", "missing mesh reference");
    if (auto m = catalog.find(name)) return m;
    if (!options.load_paths) return nullptr;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(name, ec)) return nullptr;
    std::lock_guard lock(load_mutex);
    if (auto m = catalog.find(name)) return m;
    try {
      catalog.add_file(name, name);
    } catch (const Error& e) {
      throw ParamError("mesh", e.what());
    }
    spdlog::info("loaded mesh '{}'", name);
    return catalog.find(name);
  }

  json dispatch(const json& request, const json& id) {
    std::string op = "extract";
    if (const auto it = request.find("op"); it != request.end()) op = string_value(*it, "op");
    if (op == "ping") return {{"status", "ok"}, {"op", "ping"}};
    if (op == "list") return {{"status", "ok"}, {"op", "list"}, {"meshes", catalog.names()}};
    if (op == "info") {
      const auto it = request.find("mesh");
      const std::string name = it == request.end() ? std::string() : string_value(*it, "mesh");
      auto mesh = resolve(name);
      if (!mesh) return error_reply(id, "not_found", "unknown mesh '" + name + "'", "mesh");
      return {{"status", "ok"}, {"op", "info"}, {"info", mesh_info(mesh->mesh)}};
    }
    if (op != "extract") throw ParamError("op", "unknown operation '" + op + "'");
    ExtractionRequest req = parse_params(request);
    auto mesh = resolve(req.mesh);
    if (!mesh) return error_reply(id, "not_found", "unknown mesh '" + req.mesh + "'", "mesh");
    make_seeding_config(mesh->mesh, req);
    json key = canonical(req);
    Outcome outcome = submit(std::move(mesh), std::move(req), std::move(key));
    return {{"status", "ok"},
            {"op", "extract"},
            {"stats", stats_json(outcome.stats)},
            {"payload", std::move(outcome.payload)}};
  }

  MeshCatalog& catalog;
  ServiceOptions options;
  std::mutex mutex;
  std::condition_variable wake;
  std::deque<std::function<void()>> queue;
  bool stopping = false;
  std::mutex load_mutex;
  std::optional<Cached> cache;  // accessed on the worker thread only
  std::atomic<std::uint64_t> jobs{0};
  std::thread worker;  // last, so it starts after the other members exist
};

ExtractionService::ExtractionService(MeshCatalog& catalog, ServiceOptions options)
    : impl_(std::make_unique<Impl>(catalog, options)) {}

ExtractionService::~ExtractionService() = default;

std::uint64_t ExtractionService::jobs_started() const { return impl_->jobs.load(); }

std::string ExtractionService::bad_frame_reply(const std::string& message) {
  return error_reply(json(), "bad_frame", message).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string ExtractionService::handle(std::string_view message) {
  json request;
  try {
    request = json::parse(message.begin(), message.end());
  } catch (const json::parse_error& e) {
    spdlog::debug("bad frame: {}", e.what());
    return bad_frame_reply(std::string("request is not valid JSON: ") + e.what());
  }
  if (!request.is_object()) return bad_frame_reply("request must be a JSON object");
  json id;
  if (const auto it = request.find("id"); it != request.end()) id = *it;
  json reply;
  try {
    reply = impl_->dispatch(request, id);
    if (!id.is_null()) reply["id"] = id;
  } catch (const ParamError& e) {
    reply = error_reply(id, "bad_params", e.what(), e.field());
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    reply = error_reply(id, "internal", e.what());
  }
  return reply.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace tsv
