#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef TSV_CLI11_PACKAGED
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <pthread.h>

#include "tsv/compression.hpp"
#include "tsv/logging.hpp"
#include "tsv/server.hpp"
#include "tsv/service.hpp"
#include "tsv/validate.hpp"

namespace tsv::cli {
namespace {

// Flag values wrapped in an exception that carries the offending flag.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& flag, const std::string& what)
      : std::runtime_error(flag + ": " + what) {}
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(flag, "'" + text + "' is not a number");
  return v;
}

std::array<double, 3> parse_triple(const std::string& text, const std::string& flag) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw UsageError(flag, "expected three comma-separated values");
  return {parse_double(parts[0], flag), parse_double(parts[1], flag), parse_double(parts[2], flag)};
}

std::string flag_for_field(const std::string& field) {
  static const std::map<std::string, std::string> flags = {
      {"eps", "--eps"},           {"eps_major", "--eps-major"}, {"eps_medium", "--eps-medium"},
      {"eps_minor", "--eps-minor"}, {"levels", "--levels"},     {"strategy", "--strategy"},
      {"scheme", "--scheme"},     {"step_rel", "--step-rel"},   {"seed", "--seed"},
      {"types", "--types"},       {"scalar", "--scalar"},       {"slice", "--slice"},
  };
  const auto it = flags.find(field);
  return it == flags.end() ? field : it->second;
}

// Extraction flags shared by `extract` and `validate`.
struct ExtractionFlags {
  std::string mesh;
  std::optional<double> eps;
  std::optional<double> eps_major, eps_medium, eps_minor;
  int levels = 1;
  std::string strategy = "volume";
  std::string scheme = "rk2";
  double step_rel = 0.5;
  std::string seed;
  std::string types;
  std::string scalar = "von_mises";

  void add_to(CLI::App& app) {
    app.add_option("--mesh", mesh, "Mesh file")->required();
    app.add_option("--eps", eps, "Line spacing for all types, relative to D0 (default 0.2)");
    app.add_option("--eps-major", eps_major, "Major line spacing, relative to D0");
    app.add_option("--eps-medium", eps_medium, "Medium line spacing, relative to D0");
    app.add_option("--eps-minor", eps_minor, "Minor line spacing, relative to D0");
    app.add_option("--levels", levels, "Number of LoD levels");
    app.add_option("--strategy", strategy, "Seed candidates: volume, boundary or loaded");
    app.add_option("--scheme", scheme, "Integrator: euler, rk2 or rk4");
    app.add_option("--step-rel", step_rel, "Step length relative to the shortest mesh edge");
    app.add_option("--seed", seed, "Initial seed position x,y,z");
    app.add_option("--types", types, "Comma-separated PSL types (default: major,medium,minor)");
    app.add_option("--scalar", scalar,
                   "Color attribute: von_mises, sigma1, sigma2, sigma3, sxx, syy, szz, txy, tyz, txz");
  }

  ExtractionRequest request() const {
    nlohmann::json j = {{"mesh", mesh}, {"levels", levels},   {"strategy", strategy},
                        {"scheme", scheme}, {"step_rel", step_rel}, {"scalar", scalar}};
    if (eps) j["eps"] = *eps;
    if (eps_major) j["eps_major"] = *eps_major;
    if (eps_medium) j["eps_medium"] = *eps_medium;
    if (eps_minor) j["eps_minor"] = *eps_minor;
    if (!types.empty()) j["types"] = types;
    if (!seed.empty()) {
      const auto s = parse_triple(seed, "--seed");
      j["seed"] = {s[0], s[1], s[2]};
    }
    try {
      return parse_extraction_request(j.dump());
    } catch (const ParamError& e) {
      throw UsageError(flag_for_field(e.field()), e.what());
    }
  }
};

std::shared_ptr<const LoadedMesh> load(const std::string& path) {
  try {
    return std::make_shared<const LoadedMesh>(load_mesh_file(path));
  } catch (const std::exception& e) {
    throw DataError("cannot load mesh '" + path + "': " + e.what());
  }
}

void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << bytes;
    if (!bytes.empty() && bytes.back() != '\n') out << '\n';
    return;
  }
  std::ofstream file(path, std::ios::binary);
  file << bytes;
  file.close();
  if (!file) throw DataError("cannot write '" + path + "'");
}

int run_extract(const ExtractionFlags& flags, const std::string& out_path, const std::string& slice,
                bool gzip, bool frames, std::ostream& out, std::ostream& err) {
  ExtractionRequest req = flags.request();
  req.frames = frames;
  if (!slice.empty()) {
    const auto s = parse_triple(slice, "--slice");
    std::array<int, 3> levels{};
    for (int t = 0; t < 3; ++t) {
      levels[t] = static_cast<int>(s[t]);
      if (levels[t] != s[t]) throw UsageError("--slice", "levels must be integers");
    }
    req.slice = levels;
  }
  const auto mesh = load(req.mesh);
  ExtractionResult result;
  try {
    result = run_extraction(mesh->locator, req);
  } catch (const ParamError& e) {
    throw UsageError(flag_for_field(e.field()), e.what());
  }
  std::string bytes = to_json(result.document);
  if (gzip) bytes = gzip_compress(bytes);
  write_output(out_path, bytes, out);
  std::array<int, 3> per_type{};
  for (const auto& level : result.stats.per_level) {
    for (int t = 0; t < 3; ++t) per_type[t] += level[t];
  }
  err << "extracted " << result.stats.psl_count << " PSLs (major " << per_type[0] << ", medium "
      << per_type[1] << ", minor " << per_type[2] << "), exported " << result.stats.exported
      << ", " << result.stats.candidates << " seed candidates, " << result.stats.wall_time
      << " s\n";
  return kExitOk;
}

int run_info(const std::string& path, bool as_json, std::ostream& out) {
  const auto mesh = load(path);
  const nlohmann::json info = mesh_info(mesh->mesh);
  if (as_json) {
    out << info.dump(2) << '\n';
    return kExitOk;
  }
  const auto& bb = info["bbox"];
  out << "kind: " << info["kind"].get<std::string>() << '\n'
      << "cells: " << info["cells"] << '\n'
      << "vertices: " << info["vertices"] << '\n'
      << "d0: " << info["d0"] << '\n'
      << "min_edge: " << info["min_edge"] << '\n'
      << "bbox: [" << bb[0][0] << ", " << bb[0][1] << ", " << bb[0][2] << "] - [" << bb[1][0]
      << ", " << bb[1][1] << ", " << bb[1][2] << "]\n"
      << "boundary_faces: " << info["boundary_faces"] << '\n'
      << "loaded_vertices: " << info["loaded_vertices"] << '\n'
      << "fixed_vertices: " << info["fixed_vertices"] << '\n';
  return kExitOk;
}

int run_validate(const ExtractionFlags& flags, bool structure_only, std::ostream& out) {
  ValidationOptions options;
  if (!structure_only) options.extraction = flags.request();
  const auto mesh = load(flags.mesh);
  bool ok = true;
  for (const ValidationCheck& c : validate_mesh(*mesh, options)) {
    out << (c.ok ? "[ok]   " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.ok;
  }
  return ok ? kExitOk : kExitData;
}

int run_serve(const std::vector<std::string>& preload, const std::string& host, int port,
              std::optional<int> ws_port, std::size_t max_frame, bool load_paths, std::ostream& out) {
  const auto check_port = [](int p, const char* flag) {
    if (p < 0 || p > 65535) throw UsageError(flag, "port must be in [0, 65535]");
    return static_cast<std::uint16_t>(p);
  };
  ServerOptions opts;
  opts.host = host;
  opts.port = check_port(port, "--port");
  if (ws_port) opts.ws_port = check_port(*ws_port, "--ws-port");
  opts.max_frame = max_frame;

  MeshCatalog catalog;
  for (const std::string& entry : preload) {
    const auto eq = entry.find('=');
    const std::string name = eq == std::string::npos ? entry : entry.substr(0, eq);
    const std::string path = eq == std::string::npos ? entry : entry.substr(eq + 1);
    try {
      catalog.add_file(name, path);
    } catch (const std::exception& e) {
      throw DataError("cannot preload '" + path + "': " + e.what());
    }
  }

  // Signals are taken synchronously by this thread; workers inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ExtractionService service(catalog, {.load_paths = load_paths});
  std::unique_ptr<Server> server;
  try {
    server = std::make_unique<Server>(service, opts);
  } catch (const std::exception& e) {
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    throw DataError(e.what());
  }
  server->start();
  out << "listening on " << host << ':' << server->port();
  if (server->ws_port()) out << ", websocket on port " << *server->ws_port();
  out << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server->stop();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (!init_logging_from_env()) err << "warning: unknown TSV_LOG value, using info\n";

  CLI::App app{"Principal stress line extraction and serving"};
  app.name("tsv");
  app.require_subcommand(1);

  auto* extract = app.add_subcommand("extract", "Extract PSLs from a mesh into an exchange file");
  ExtractionFlags extract_flags;
  extract_flags.add_to(*extract);
  std::string out_path;
  std::string slice;
  bool gzip = false;
  bool frames = false;
  extract->add_option("--out", out_path, "Output file (default: standard output)");
  extract->add_option("--slice", slice, "Exported levels per type major,medium,minor (default: all)");
  extract->add_flag("--gzip", gzip, "Gzip the output");
  extract->add_flag("--frames", frames, "Include per-point tube frames");

  auto* serve = app.add_subcommand("serve", "Serve extraction requests over TCP and WebSocket");
  std::vector<std::string> preload;
  std::string host = "127.0.0.1";
  int port = 7070;
  std::optional<int> ws_port;
  std::size_t max_frame = kDefaultMaxFrame;
  bool no_load_paths = false;
  serve->add_option("--mesh,--preload", preload, "Mesh to preload, as PATH or NAME=PATH")->take_all();
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Framed TCP port (0 picks a free port)");
  serve->add_option("--ws-port", ws_port, "WebSocket port for browsers");
  serve->add_option("--max-frame", max_frame, "Largest accepted request in bytes");
  serve->add_flag("--no-load-paths", no_load_paths, "Only serve preloaded meshes");

  auto* info = app.add_subcommand("info", "Print mesh statistics");
  std::string info_mesh;
  bool info_json = false;
  info->add_option("--mesh", info_mesh, "Mesh file")->required();
  info->add_flag("--json", info_json, "Print as JSON");

  auto* validate = app.add_subcommand("validate", "Run mesh and seeding self-checks");
  ExtractionFlags validate_flags;
  validate_flags.add_to(*validate);
  bool structure_only = false;
  validate->add_flag("--structure-only", structure_only, "Skip the extraction checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (extract->parsed()) {
      return run_extract(extract_flags, out_path, slice, gzip, frames, out, err);
    }
    if (info->parsed()) return run_info(info_mesh, info_json, out);
    if (validate->parsed()) return run_validate(validate_flags, structure_only, out);
    if (serve->parsed()) {
      return run_serve(preload, host, port, ws_port, max_frame, !no_load_paths, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tsv::cli
