#include "tsv/exchange.hpp"

#include <nlohmann/json.hpp>

#include "tsv/errors.hpp"
#include "tsv/exchange_json.hpp"

namespace tsv {

using nlohmann::json;

ExchangeDocument export_psls(const HexMesh& mesh, const PslSliceView& slice,
                             ScalarSelector scalar, bool with_frames) {
  ExchangeDocument doc;
  doc.d0 = mesh.d0();
  doc.bbox = mesh.bbox();
  doc.psls.reserve(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const Psl& psl = slice[i];
    ExchangePsl out;
    out.id = psl.id;
    out.type = psl.type;
    out.level = psl.level;
    out.seed_index = psl.seed_index;
    out.points = psl.points;
    const std::size_t n = psl.samples.size();
    for (auto* v : {&out.attrs.sigma1, &out.attrs.sigma2, &out.attrs.sigma3, &out.attrs.deg,
                    &out.attrs.scalar}) {
      v->reserve(n);
    }
    for (const PslSample& s : psl.samples) {
      out.attrs.sigma1.push_back(s.principal.sigma[0]);
      out.attrs.sigma2.push_back(s.principal.sigma[1]);
      out.attrs.sigma3.push_back(s.principal.sigma[2]);
      out.attrs.deg.push_back(s.deg);
      out.attrs.scalar.push_back(scalar_field(s.tensor, s.principal, scalar));
    }
    if (with_frames && psl.points.size() >= 2) {
      const FrameSeries frames = compute_frames(psl, default_alignment(psl.type));
      std::vector<std::array<double, 6>> packed;
      packed.reserve(frames.size());
      for (const Frame& f : frames) packed.push_back({f.n.x, f.n.y, f.n.z, f.b.x, f.b.y, f.b.z});
      out.frames = std::move(packed);
    }
    doc.psls.push_back(std::move(out));
  }
  return doc;
}

namespace detail {

namespace {

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw SchemaError("exchange document: " + where + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema(where, std::string("missing '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) schema(where, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) schema(where, "expected an integer");
  return v.get<int>();
}

Vec3 point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) schema(where, "expected [x, y, z]");
  return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

std::vector<double> series(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array()) schema(where, "expected an array");
  if (v.size() != n) schema(where, "length does not match points");
  std::vector<double> out;
  out.reserve(n);
  for (const json& x : v) out.push_back(number(x, where));
  return out;
}

}  // namespace

json exchange_to_json(const ExchangeDocument& doc) {
  json psls = json::array();
  for (const ExchangePsl& p : doc.psls) {
    json points = json::array();
    for (const Vec3& v : p.points) points.push_back(vec(v));
    json entry = {
        {"id", p.id},
        {"type", std::string(to_string(p.type))},
        {"level", p.level},
        {"seed_index", p.seed_index},
        {"points", std::move(points)},
        {"attrs",
         {{"sigma1", p.attrs.sigma1},
          {"sigma2", p.attrs.sigma2},
          {"sigma3", p.attrs.sigma3},
          {"deg", p.attrs.deg},
          {"scalar", p.attrs.scalar}}},
    };
    if (p.frames) entry["frames"] = *p.frames;
    psls.push_back(std::move(entry));
  }
  return {{"version", doc.version},
          {"d0", doc.d0},
          {"bbox", json::array({vec(doc.bbox.min), vec(doc.bbox.max)})},
          {"psls", std::move(psls)}};
}

ExchangeDocument exchange_from_json(const json& j) {
  if (!j.is_object()) schema("document", "expected an object");
  ExchangeDocument doc;
  doc.version = integer(member(j, "version", "document"), "version");
  if (doc.version != kExchangeVersion) schema("version", "unsupported version");
  doc.d0 = number(member(j, "d0", "document"), "d0");
  const json& bbox = member(j, "bbox", "document");
  if (!bbox.is_array() || bbox.size() != 2) schema("bbox", "expected [min, max]");
  doc.bbox = {point(bbox[0], "bbox"), point(bbox[1], "bbox")};
  const json& psls = member(j, "psls", "document");
  if (!psls.is_array()) schema("psls", "expected an array");
  for (std::size_t i = 0; i < psls.size(); ++i) {
    const std::string where = "psls[" + std::to_string(i) + "]";
    const json& e = psls[i];
    if (!e.is_object()) schema(where, "expected an object");
    ExchangePsl p;
    p.id = integer(member(e, "id", where), where + ".id");
    const json& type = member(e, "type", where);
    if (!type.is_string()) schema(where + ".type", "expected a string");
    try {
      p.type = parse_psl_type(type.get<std::string>());
    } catch (const std::invalid_argument&) {
      schema(where + ".type", "unknown PSL type");
    }
    p.level = integer(member(e, "level", where), where + ".level");
    p.seed_index = integer(member(e, "seed_index", where), where + ".seed_index");
    const json& points = member(e, "points", where);
    if (!points.is_array()) schema(where + ".points", "expected an array");
    for (const json& v : points) p.points.push_back(point(v, where + ".points"));
    const std::size_t n = p.points.size();
    const json& attrs = member(e, "attrs", where);
    if (!attrs.is_object()) schema(where + ".attrs", "expected an object");
    p.attrs.sigma1 = series(member(attrs, "sigma1", where), n, where + ".attrs.sigma1");
    p.attrs.sigma2 = series(member(attrs, "sigma2", where), n, where + ".attrs.sigma2");
    p.attrs.sigma3 = series(member(attrs, "sigma3", where), n, where + ".attrs.sigma3");
    p.attrs.deg = series(member(attrs, "deg", where), n, where + ".attrs.deg");
    p.attrs.scalar = series(member(attrs, "scalar", where), n, where + ".attrs.scalar");
    if (const auto it = e.find("frames"); it != e.end() && !it->is_null()) {
      if (!it->is_array() || it->size() != n) schema(where + ".frames", "length does not match points");
      std::vector<std::array<double, 6>> frames;
      frames.reserve(n);
      for (const json& f : *it) {
        if (!f.is_array() || f.size() != 6) schema(where + ".frames", "expected 6 numbers per frame");
        std::array<double, 6> row{};
        for (std::size_t k = 0; k < 6; ++k) row[k] = number(f[k], where + ".frames");
        frames.push_back(row);
      }
      p.frames = std::move(frames);
    }
    doc.psls.push_back(std::move(p));
  }
  return doc;
}

}  // namespace detail

std::string to_json(const ExchangeDocument& doc) { return detail::exchange_to_json(doc).dump(); }

ExchangeDocument parse_exchange(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("exchange document is not valid JSON: ") + e.what());
  }
  return detail::exchange_from_json(j);
}

}  // namespace tsv
