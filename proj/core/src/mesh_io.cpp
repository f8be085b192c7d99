#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "tsv/errors.hpp"
#include "tsv/mesh.hpp"

namespace tsv {
namespace {

// Line-oriented tokenizer: '#' starts a comment, blank lines are skipped.
class LineReader {
 public:
  explicit LineReader(std::string text) : text_(std::move(text)) {}

  /// Advances to the next non-empty logical line; false at end of input.
  bool next() {
    tokens_.clear();
    while (pos_ < text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
      std::string_view line(text_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      split(line);
      if (!tokens_.empty()) return true;
    }
    return false;
  }

  void require(const char* what) {
    if (!next()) throw ParseError(line_no_ + 1, std::string("unexpected end of input, expected ") + what);
  }

  std::size_t line() const { return line_no_; }
  const std::vector<std::string_view>& tokens() const { return tokens_; }

  void expect_count(std::size_t n, const std::string& what) const {
    if (tokens_.size() != n) {
      throw ParseError(line_no_, what + ": expected " + std::to_string(n) + " values, got " +
                                     std::to_string(tokens_.size()));
    }
  }

  double real(std::size_t i) const {
    const std::string_view t = tokens_[i];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ParseError(line_no_, "invalid number '" + std::string(t) + "'");
    }
    return v;
  }

  long long integer(std::size_t i) const {
    const std::string_view t = tokens_[i];
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ParseError(line_no_, "invalid integer '" + std::string(t) + "'");
    }
    return v;
  }

 private:
  void split(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens_.push_back(line.substr(i, j - i));
      i = j;
    }
  }

  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  std::vector<std::string_view> tokens_;
};

std::vector<StressTensor> read_tensors(LineReader& in, std::size_t count) {
  std::vector<StressTensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    in.require("stress tensor row");
    in.expect_count(6, "stress tensor " + std::to_string(i));
    out.push_back({in.real(0), in.real(1), in.real(2), in.real(3), in.real(4), in.real(5)});
  }
  return out;
}

// Optional trailing "LOADED k" / "FIXED k" sections of vertex ids.
void read_vertex_subsets(LineReader& in, HexMesh& mesh) {
  bool have_line = in.next();
  while (have_line) {
    const std::string_view key = in.tokens()[0];
    if (key != "LOADED" && key != "FIXED") {
      throw ParseError(in.line(), "unexpected trailing content '" + std::string(key) + "'");
    }
    in.expect_count(2, std::string(key) + " header");
    const long long n = in.integer(1);
    if (n < 0) throw ParseError(in.line(), "negative vertex count");
    std::vector<VertexId> ids;
    ids.reserve(static_cast<std::size_t>(n));
    while (static_cast<long long>(ids.size()) < n) {
      in.require("vertex ids");
      for (std::size_t i = 0; i < in.tokens().size(); ++i) {
        ids.push_back(static_cast<VertexId>(in.integer(i)));
      }
    }
    if (static_cast<long long>(ids.size()) != n) {
      throw ParseError(in.line(), std::string(key) + " section has too many ids");
    }
    if (key == "LOADED") {
      mesh.set_loaded_vertices(std::move(ids));
    } else {
      mesh.set_fixed_vertices(std::move(ids));
    }
    have_line = in.next();
  }
}

HexMesh read_cartesian(LineReader& in) {
  in.expect_count(10, "CARTESIAN header");
  CartesianLayout layout;
  for (int a = 0; a < 3; ++a) {
    const long long n = in.integer(1 + a);
    if (n < 2 || n > (1ll << 30)) throw SchemaError("cartesian vertex count must be >= 2 per axis");
    layout.dims[a] = static_cast<int>(n);
  }
  layout.origin = {in.real(4), in.real(5), in.real(6)};
  layout.spacing = {in.real(7), in.real(8), in.real(9)};
  for (int a = 0; a < 3; ++a) {
    if (!(layout.spacing[a] > 0.0)) throw SchemaError("cartesian spacing must be positive");
  }
  const std::size_t nv =
      static_cast<std::size_t>(layout.dims[0]) * layout.dims[1] * layout.dims[2];
  auto tensors = read_tensors(in, nv);
  HexMesh mesh = HexMesh::cartesian(layout, std::move(tensors));
  read_vertex_subsets(in, mesh);
  return mesh;
}

HexMesh read_unstructured(LineReader& in) {
  in.expect_count(3, "HEX header");
  const long long nv = in.integer(1);
  const long long nc = in.integer(2);
  if (nv <= 0 || nc <= 0) throw SchemaError("HEX mesh needs positive vertex and cell counts");
  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    in.require("vertex row");
    in.expect_count(3, "vertex " + std::to_string(i));
    vertices.push_back({in.real(0), in.real(1), in.real(2)});
  }
  std::vector<HexCell> cells;
  cells.reserve(static_cast<std::size_t>(nc));
  for (long long c = 0; c < nc; ++c) {
    in.require("cell row");
    in.expect_count(8, "cell " + std::to_string(c));
    HexCell cell;
    for (int i = 0; i < 8; ++i) cell[i] = static_cast<VertexId>(in.integer(i));
    cells.push_back(cell);
  }
  auto tensors = read_tensors(in, static_cast<std::size_t>(nv));
  HexMesh mesh = HexMesh::unstructured(std::move(vertices), std::move(cells), std::move(tensors));
  read_vertex_subsets(in, mesh);
  return mesh;
}

void write_real(std::ostream& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

void write_tensors_and_subsets(std::ostream& out, const HexMesh& mesh) {
  for (const StressTensor& t : mesh.tensors()) {
    const auto c = t.components();
    for (int i = 0; i < 6; ++i) {
      if (i) out << ' ';
      write_real(out, c[i]);
    }
    out << '\n';
  }
  auto subset = [&](const char* name, const std::vector<VertexId>& ids) {
    if (ids.empty()) return;
    out << name << ' ' << ids.size() << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out << ids[i] << ((i + 1) % 16 == 0 || i + 1 == ids.size() ? '\n' : ' ');
    }
  };
  subset("LOADED", mesh.loaded_vertices());
  subset("FIXED", mesh.fixed_vertices());
}

}  // namespace

HexMesh load_mesh(std::istream& in, MeshFormat format) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  LineReader reader(std::move(text));
  if (!reader.next()) throw ParseError(1, "empty mesh file");
  const std::string_view tag = reader.tokens()[0];
  if (tag == "CARTESIAN") {
    if (format == MeshFormat::unstructured) {
      throw ParseError(reader.line(), "expected HEX header, found CARTESIAN");
    }
    return read_cartesian(reader);
  }
  if (tag == "HEX") {
    if (format == MeshFormat::cartesian) {
      throw ParseError(reader.line(), "expected CARTESIAN header, found HEX");
    }
    return read_unstructured(reader);
  }
  throw ParseError(reader.line(), "unknown mesh header '" + std::string(tag) + "'");
}

HexMesh load_mesh_file(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open mesh file '" + path.string() + "'");
  return load_mesh(in, format);
}

void write_mesh(std::ostream& out, const HexMesh& mesh) {
  if (mesh.kind() != MeshKind::cartesian) {
    write_unstructured(out, mesh);
    return;
  }
  const CartesianLayout& l = mesh.layout();
  out << "CARTESIAN " << l.dims[0] << ' ' << l.dims[1] << ' ' << l.dims[2];
  for (double v : {l.origin.x, l.origin.y, l.origin.z, l.spacing.x, l.spacing.y, l.spacing.z}) {
    out << ' ';
    write_real(out, v);
  }
  out << '\n';
  write_tensors_and_subsets(out, mesh);
}

void write_unstructured(std::ostream& out, const HexMesh& mesh) {
  out << "HEX " << mesh.vertex_count() << ' ' << mesh.cell_count() << '\n';
  for (const Vec3& v : mesh.vertices()) {
    write_real(out, v.x);
    out << ' ';
    write_real(out, v.y);
    out << ' ';
    write_real(out, v.z);
    out << '\n';
  }
  for (const HexCell& c : mesh.cells()) {
    for (int i = 0; i < 8; ++i) out << c[i] << (i == 7 ? '\n' : ' ');
  }
  write_tensors_and_subsets(out, mesh);
}

}  // namespace tsv
