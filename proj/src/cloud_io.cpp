#include "n2s3/cloud_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "n2s3/errors.hpp"
#include "n2s3/num_text.hpp"

namespace n2s3 {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path);
  return data;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(data.data(), std::streamsize(data.size()));
  if (!out) throw IoError("failed writing " + path);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(std::uint8_t(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(std::uint8_t(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

}  // namespace

PointCloud read_xyz(const std::string& path) {
  const std::string data = read_file(path);
  PointCloud pc;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos <= data.size()) {
    if (pos == data.size() && line_no > 0) break;
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    ++line_no;
    std::string_view line(data.data() + pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;

    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0].front() == '#') continue;
    if (tokens.size() != 3) {
      throw ParseError("expected three coordinates, got " + std::to_string(tokens.size()),
                       line_no);
    }
    Vec3 p;
    for (int c = 0; c < 3; ++c) {
      try {
        p[c] = parse_double(tokens[std::size_t(c)]);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no);
      }
      if (!std::isfinite(p[c])) throw ParseError("non-finite coordinate", line_no);
    }
    pc.points.push_back(p);
  }
  if (pc.empty()) throw ParseError("no points in " + path);
  return pc;
}

void write_xyz(const std::string& path, const PointCloud& pc) {
  std::string out;
  out.reserve(pc.size() * 48);
  for (const Vec3& p : pc.points) {
    out += to_text(p.x());
    out += ' ';
    out += to_text(p.y());
    out += ' ';
    out += to_text(p.z());
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// PLY

namespace {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8:
      return 1;
    case PlyType::i16:
    case PlyType::u16:
      return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32:
      return 4;
    default:
      return 8;
  }
}

PlyType ply_type_from(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::i8;
  if (name == "uchar" || name == "uint8") return PlyType::u8;
  if (name == "short" || name == "int16") return PlyType::i16;
  if (name == "ushort" || name == "uint16") return PlyType::u16;
  if (name == "int" || name == "int32") return PlyType::i32;
  if (name == "uint" || name == "uint32") return PlyType::u32;
  if (name == "float" || name == "float32") return PlyType::f32;
  if (name == "double" || name == "float64") return PlyType::f64;
  throw UnsupportedFormat("unsupported PLY property type '" + name + "'");
}

struct PlyProperty {
  PlyType type = PlyType::f64;
  std::string name;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

double read_le_scalar(const char* at, PlyType t) {
  switch (t) {
    case PlyType::f32: {
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= std::uint32_t(std::uint8_t(at[i])) << (8 * i);
      return double(std::bit_cast<float>(bits));
    }
    case PlyType::f64: {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= std::uint64_t(std::uint8_t(at[i])) << (8 * i);
      return std::bit_cast<double>(bits);
    }
    default:
      throw UnsupportedFormat("x/y/z must be float or double");
  }
}

}  // namespace

PointCloud read_ply(const std::string& path) {
  const std::string data = read_file(path);

  // header
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= data.size()) throw ParseError("unterminated PLY header in " + path);
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    std::string line = data.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw ParseError("missing 'ply' magic in " + path);

  bool binary = false;
  bool format_seen = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string line = next_line();
    std::istringstream iss(line);
    std::string word;
    iss >> word;
    if (word == "comment" || word.empty()) continue;
    if (word == "format") {
      std::string fmt, version;
      iss >> fmt >> version;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt == "binary_big_endian") {
        throw UnsupportedFormat("big-endian PLY is not supported: " + path);
      } else {
        throw UnsupportedFormat("unknown PLY format '" + fmt + "'");
      }
      format_seen = true;
    } else if (word == "element") {
      PlyElement el;
      iss >> el.name >> el.count;
      if (iss.fail()) throw ParseError("bad element line '" + line + "'");
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) throw ParseError("property before any element in " + path);
      std::string type_name;
      iss >> type_name;
      PlyProperty prop;
      if (type_name == "list") {
        std::string count_type, value_type;
        iss >> count_type >> value_type >> prop.name;
        prop.is_list = true;
      } else {
        prop.type = ply_type_from(type_name);
        iss >> prop.name;
      }
      if (iss.fail()) throw ParseError("bad property line '" + line + "'");
      elements.back().properties.push_back(prop);
    } else if (word == "end_header") {
      break;
    } else {
      throw ParseError("unexpected header line '" + line + "' in " + path);
    }
  }
  if (!format_seen) throw ParseError("PLY header lacks a format line: " + path);

  const auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                      [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) throw ParseError("PLY file has no vertex element: " + path);

  int xi = -1, yi = -1, zi = -1;
  for (std::size_t i = 0; i < vertex_it->properties.size(); ++i) {
    const auto& prop = vertex_it->properties[i];
    if (prop.name == "x") xi = int(i);
    if (prop.name == "y") yi = int(i);
    if (prop.name == "z") zi = int(i);
  }
  if (xi < 0 || yi < 0 || zi < 0) {
    throw ParseError("vertex element lacks x/y/z properties: " + path);
  }
  for (int idx : {xi, yi, zi}) {
    const auto& prop = vertex_it->properties[std::size_t(idx)];
    if (prop.is_list || (prop.type != PlyType::f32 && prop.type != PlyType::f64)) {
      throw UnsupportedFormat("x/y/z vertex properties must be float or double: " + path);
    }
  }

  PointCloud pc;
  pc.points.reserve(vertex_it->count);

  if (!binary) {
    for (auto el = elements.begin(); el != elements.end(); ++el) {
      if (el->name != "vertex") {
        if (el < vertex_it) {
          for (std::size_t i = 0; i < el->count; ++i) next_line();
        }
        continue;
      }
      for (const auto& prop : el->properties) {
        if (prop.is_list) throw UnsupportedFormat("list property on vertex element");
      }
      for (std::size_t i = 0; i < el->count; ++i) {
        const std::string line = next_line();
        const auto tokens = split_ws(line);
        if (tokens.size() < el->properties.size()) {
          throw ParseError("vertex row has too few values in " + path);
        }
        pc.points.emplace_back(parse_double(tokens[std::size_t(xi)]),
                               parse_double(tokens[std::size_t(yi)]),
                               parse_double(tokens[std::size_t(zi)]));
      }
      break;
    }
  } else {
    std::size_t offset = pos;
    for (auto el = elements.begin(); el != elements.end(); ++el) {
      std::size_t stride = 0;
      for (const auto& prop : el->properties) {
        if (prop.is_list) {
          throw UnsupportedFormat("cannot skip binary list properties (element '" +
                                  el->name + "')");
        }
        stride += ply_type_size(prop.type);
      }
      if (el->name != "vertex") {
        offset += stride * el->count;
        continue;
      }
      std::size_t x_off = 0, y_off = 0, z_off = 0, acc = 0;
      PlyType x_t = PlyType::f64, y_t = PlyType::f64, z_t = PlyType::f64;
      for (std::size_t i = 0; i < el->properties.size(); ++i) {
        const auto& prop = el->properties[i];
        if (int(i) == xi) {
          x_off = acc;
          x_t = prop.type;
        }
        if (int(i) == yi) {
          y_off = acc;
          y_t = prop.type;
        }
        if (int(i) == zi) {
          z_off = acc;
          z_t = prop.type;
        }
        acc += ply_type_size(prop.type);
      }
      if (offset + stride * el->count > data.size()) {
        throw ParseError("binary PLY payload truncated: " + path);
      }
      for (std::size_t i = 0; i < el->count; ++i) {
        const char* row = data.data() + offset + i * stride;
        pc.points.emplace_back(read_le_scalar(row + x_off, x_t),
                               read_le_scalar(row + y_off, y_t),
                               read_le_scalar(row + z_off, z_t));
      }
      break;
    }
  }

  if (pc.empty()) throw ParseError("no vertices in " + path);
  return pc;
}

void write_ply(const std::string& path, const PointCloud& pc) {
  std::string out;
  out += "ply\n";
  out += "format binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(pc.size()) + "\n";
  out += "property double x\n";
  out += "property double y\n";
  out += "property double z\n";
  out += "end_header\n";
  out.reserve(out.size() + pc.size() * 24);
  for (const Vec3& p : pc.points) {
    for (int c = 0; c < 3; ++c) {
      const auto bits = std::bit_cast<std::uint64_t>(p[c]);
      for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
    }
  }
  write_file(path, out);
}

namespace {

std::string lower_ext(const std::string& path) {
  const std::size_t dot = path.rfind('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return ext;
}

}  // namespace

PointCloud read_cloud(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "xyz") return read_xyz(path);
  if (ext == "ply") return read_ply(path);
  throw UnsupportedFormat("unknown cloud format '." + ext + "' for " + path);
}

void write_cloud(const std::string& path, const PointCloud& pc) {
  const std::string ext = lower_ext(path);
  if (ext == "xyz") {
    write_xyz(path, pc);
  } else if (ext == "ply") {
    write_ply(path, pc);
  } else {
    throw UnsupportedFormat("unknown cloud format '." + ext + "' for " + path);
  }
}

}  // namespace n2s3
