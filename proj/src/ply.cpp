#include "pushability/ply.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "pushability/errors.hpp"

namespace pushability {
namespace {

struct Property {
  std::string name;
  bool is_list = false;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

bool is_scalar_type(const std::string& t) {
  static const char* kTypes[] = {"char",  "uchar",  "short",  "ushort",  "int",     "uint",    "float",
                                 "double", "int8",  "uint8",  "int16",   "uint16",  "int32",   "uint32",
                                 "float32", "float64"};
  for (const char* k : kTypes) {
    if (t == k) return true;
  }
  return false;
}

int find_property(const Element& e, const char* name) {
  for (std::size_t i = 0; i < e.properties.size(); ++i) {
    if (e.properties[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

double parse_number(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw PlyParseError(line, "not a number: '" + token + "'");
  }
  if (used != token.size()) throw PlyParseError(line, "not a number: '" + token + "'");
  return v;
}

}  // namespace

PlyData read_ply(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw PlyParseError(line_no == 0 ? 1 : line_no, "missing 'ply' magic");

  std::vector<Element> elements;
  bool have_format = false;
  for (;;) {
    if (!next_line()) throw PlyParseError(line_no + 1, "unexpected end of header");
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.empty() || key == "comment" || key == "obj_info") continue;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt == "binary_little_endian" || fmt == "binary_big_endian") {
        throw PlyParseError(line_no, "unsupported binary encoding '" + fmt + "'");
      }
      if (fmt != "ascii") throw PlyParseError(line_no, "unknown format '" + fmt + "'");
      have_format = true;
    } else if (key == "element") {
      Element e;
      long long count = -1;
      ls >> e.name >> count;
      if (e.name.empty() || !ls || count < 0) throw PlyParseError(line_no, "malformed element line");
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) throw PlyParseError(line_no, "property before any element");
      std::string type;
      ls >> type;
      Property p;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
      } else {
        if (!is_scalar_type(type)) throw PlyParseError(line_no, "unknown property type '" + type + "'");
        ls >> p.name;
      }
      if (p.name.empty()) throw PlyParseError(line_no, "property without a name");
      elements.back().properties.push_back(std::move(p));
    } else {
      throw PlyParseError(line_no, "unexpected header keyword '" + key + "'");
    }
  }
  if (!have_format) throw PlyParseError(line_no, "header has no format line");

  PlyData data;
  bool seen_vertex = false;
  for (const Element& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!next_line()) throw PlyParseError(line_no + 1, "unexpected end of file in element '" + e.name + "'");
      }
      continue;
    }
    if (seen_vertex) throw PlyParseError(line_no, "duplicate vertex element");
    seen_vertex = true;
    for (const Property& p : e.properties) {
      if (p.is_list) throw PlyParseError(line_no, "list property on vertex element is not supported");
    }
    const int ix = find_property(e, "x"), iy = find_property(e, "y"), iz = find_property(e, "z");
    if (ix < 0 || iy < 0 || iz < 0) throw PlyParseError(line_no, "vertex element lacks x, y, z");
    const int inx = find_property(e, "nx"), iny = find_property(e, "ny"), inz = find_property(e, "nz");
    const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;
    const int ilabel = find_property(e, "label");

    data.cloud.points.reserve(e.count);
    if (has_normals) {
      data.normals.emplace();
      data.normals->normals.reserve(e.count);
      data.normals->valid.reserve(e.count);
    }
    if (ilabel >= 0) data.labels.emplace().reserve(e.count);

    std::vector<double> values(e.properties.size());
    for (std::size_t v = 0; v < e.count; ++v) {
      if (!next_line()) throw PlyParseError(line_no + 1, "unexpected end of file: expected vertex " + std::to_string(v));
      std::istringstream ls(line);
      std::string token;
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(ls >> token)) throw PlyParseError(line_no, "too few values on vertex line");
        values[k] = parse_number(token, line_no);
      }
      if (ls >> token) throw PlyParseError(line_no, "too many values on vertex line");
      const Point3 p(values[ix], values[iy], values[iz]);
      if (!p.allFinite()) throw PlyParseError(line_no, "non-finite coordinate");
      data.cloud.points.push_back(p);
      if (has_normals) {
        const Vec3 n(values[inx], values[iny], values[inz]);
        if (!n.allFinite()) throw PlyParseError(line_no, "non-finite normal");
        const double len = n.norm();
        const bool ok = len > 0.5;
        data.normals->normals.push_back(ok ? Vec3(n / len) : Vec3::Zero());
        data.normals->valid.push_back(ok ? 1 : 0);
      }
      if (ilabel >= 0) {
        const double l = values[ilabel];
        if (l != std::floor(l)) throw PlyParseError(line_no, "label is not an integer");
        data.labels->push_back(static_cast<int>(l));
      }
    }
  }
  if (!seen_vertex) throw PlyParseError(line_no, "no vertex element");
  return data;
}

PlyData load_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return read_ply(in);
  } catch (const PlyParseError& e) {
    throw PlyParseError(e.line(), e.detail(), path.string());
  }
}

void write_ply(std::ostream& out, const PointCloud& cloud, const NormalField* normals,
               const std::vector<int>* labels) {
  const std::size_t n = cloud.size();
  if (normals && (normals->normals.size() != n || normals->valid.size() != n)) {
    throw DomainError("normal field length does not match cloud size");
  }
  if (labels && labels->size() != n) throw DomainError("label array length does not match cloud size");

  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << n << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
  if (labels) out << "property int label\n";
  out << "end_header\n";

  char buf[160];
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = cloud.points[i];
    int len = std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f", p.x(), p.y(), p.z());
    out.write(buf, len);
    if (normals) {
      const Vec3 nv = normals->is_valid(i) ? normals->normals[i] : Vec3::Zero();
      len = std::snprintf(buf, sizeof buf, " %.6f %.6f %.6f", nv.x(), nv.y(), nv.z());
      out.write(buf, len);
    }
    if (labels) out << ' ' << (*labels)[i];
    out << '\n';
  }
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud, const NormalField* normals,
              const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path.string() + "'");
  write_ply(out, cloud, normals, labels);
  if (!out) throw DomainError("write failed for '" + path.string() + "'");
}

}  // namespace pushability
