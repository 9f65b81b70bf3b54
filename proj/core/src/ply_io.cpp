#include "moransac/ply_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace moransac {

static_assert(std::endian::native == std::endian::little,
              "binary PLY support assumes a little-endian host");

namespace {

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8:
      return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16:
      return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32:
      return 4;
    case PlyType::kFloat64:
      return 8;
  }
  return 0;
}

PlyType parse_type(const std::string& name, const std::filesystem::path& file) {
  static const std::map<std::string, PlyType> table{
      {"char", PlyType::kInt8},     {"int8", PlyType::kInt8},
      {"uchar", PlyType::kUInt8},   {"uint8", PlyType::kUInt8},
      {"short", PlyType::kInt16},   {"int16", PlyType::kInt16},
      {"ushort", PlyType::kUInt16}, {"uint16", PlyType::kUInt16},
      {"int", PlyType::kInt32},     {"int32", PlyType::kInt32},
      {"uint", PlyType::kUInt32},   {"uint32", PlyType::kUInt32},
      {"float", PlyType::kFloat32}, {"float32", PlyType::kFloat32},
      {"double", PlyType::kFloat64},{"float64", PlyType::kFloat64}};
  const auto it = table.find(name);
  if (it == table.end()) {
    throw FormatError("unknown PLY property type '" + name + "' in " + file.string());
  }
  return it->second;
}

struct Property {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

double read_binary_value(std::istream& in, PlyType t, const std::filesystem::path& file) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(type_size(t)));
  if (!in) throw FormatError("truncated PLY data in " + file.string());
  switch (t) {
    case PlyType::kInt8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
    case PlyType::kUInt8: return static_cast<double>(buf[0]);
    case PlyType::kInt16: { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
    case PlyType::kUInt16: { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
    case PlyType::kInt32: { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::kUInt32: { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::kFloat32: { float v; std::memcpy(&v, buf, 4); return v; }
    case PlyType::kFloat64: { double v; std::memcpy(&v, buf, 8); return v; }
  }
  return 0;
}

}  // namespace

void write_ply(const std::filesystem::path& file, const PointCloud& cloud,
               PlyFormat format) {
  cloud.validate();
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write PLY file " + file.string());

  out << "ply\nformat "
      << (format == PlyFormat::kAscii ? "ascii" : "binary_little_endian")
      << " 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors()) {
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  if (cloud.has_normals()) {
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  }
  out << "end_header\n";

  auto to_byte = [](double c) {
    return static_cast<unsigned>(std::clamp(std::lround(c * 255.0), 0L, 255L));
  };

  if (format == PlyFormat::kAscii) {
    char buf[256];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.positions[i];
      int len = std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g",
                              static_cast<float>(p.x()), static_cast<float>(p.y()),
                              static_cast<float>(p.z()));
      out.write(buf, len);
      if (cloud.has_colors()) {
        const Vec3& c = cloud.colors[i];
        len = std::snprintf(buf, sizeof buf, " %u %u %u", to_byte(c.x()),
                            to_byte(c.y()), to_byte(c.z()));
        out.write(buf, len);
      }
      if (cloud.has_normals()) {
        const Vec3& n = cloud.normals[i];
        len = std::snprintf(buf, sizeof buf, " %.9g %.9g %.9g",
                            static_cast<float>(n.x()), static_cast<float>(n.y()),
                            static_cast<float>(n.z()));
        out.write(buf, len);
      }
      out.put('\n');
    }
  } else {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const float xyz[3] = {static_cast<float>(cloud.positions[i].x()),
                            static_cast<float>(cloud.positions[i].y()),
                            static_cast<float>(cloud.positions[i].z())};
      out.write(reinterpret_cast<const char*>(xyz), 12);
      if (cloud.has_colors()) {
        const unsigned char rgb[3] = {
            static_cast<unsigned char>(to_byte(cloud.colors[i].x())),
            static_cast<unsigned char>(to_byte(cloud.colors[i].y())),
            static_cast<unsigned char>(to_byte(cloud.colors[i].z()))};
        out.write(reinterpret_cast<const char*>(rgb), 3);
      }
      if (cloud.has_normals()) {
        const float n[3] = {static_cast<float>(cloud.normals[i].x()),
                            static_cast<float>(cloud.normals[i].y()),
                            static_cast<float>(cloud.normals[i].z())};
        out.write(reinterpret_cast<const char*>(n), 12);
      }
    }
  }
  if (!out) throw InputError("failed writing PLY file " + file.string());
}

PointCloud read_ply(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open PLY file " + file.string());

  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) {
    throw FormatError(file.string() + " is not a PLY file");
  }
  bool binary = false;
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        throw FormatError("unsupported PLY format '" + fmt + "' in " + file.string());
      }
    } else if (word == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw FormatError("property before element in " + file.string());
      Property p;
      std::string type_name;
      ls >> type_name;
      if (type_name == "list") {
        std::string count_name, value_name;
        ls >> count_name >> value_name >> p.name;
        p.is_list = true;
        p.count_type = parse_type(count_name, file);
        p.type = parse_type(value_name, file);
      } else {
        ls >> p.name;
        p.type = parse_type(type_name, file);
      }
      elements.back().properties.push_back(p);
    } else if (word == "end_header") {
      break;
    } else {
      throw FormatError("unexpected header line '" + line + "' in " + file.string());
    }
  }

  PointCloud cloud;
  for (const Element& element : elements) {
    const bool is_vertex = element.name == "vertex";
    std::map<std::string, int> slot;
    for (std::size_t p = 0; p < element.properties.size(); ++p) {
      slot[element.properties[p].name] = static_cast<int>(p);
    }
    const bool has_xyz = slot.count("x") && slot.count("y") && slot.count("z");
    if (is_vertex && !has_xyz) {
      throw FormatError("vertex element lacks x/y/z in " + file.string());
    }
    const bool has_rgb = slot.count("red") && slot.count("green") && slot.count("blue");
    const bool has_n = slot.count("nx") && slot.count("ny") && slot.count("nz");

    std::vector<double> values(element.properties.size(), 0.0);
    for (std::size_t row = 0; row < element.count; ++row) {
      if (binary) {
        for (const Property& p : element.properties) {
          const std::size_t idx = static_cast<std::size_t>(&p - element.properties.data());
          if (p.is_list) {
            const double count = read_binary_value(in, p.count_type, file);
            for (long j = 0; j < static_cast<long>(count); ++j) {
              read_binary_value(in, p.type, file);
            }
            values[idx] = 0;
          } else {
            values[idx] = read_binary_value(in, p.type, file);
          }
        }
      } else {
        if (!std::getline(in, line)) throw FormatError("truncated PLY data in " + file.string());
        std::istringstream ls(line);
        for (const Property& p : element.properties) {
          const std::size_t idx = static_cast<std::size_t>(&p - element.properties.data());
          if (p.is_list) {
            long count;
            if (!(ls >> count)) throw FormatError("bad list count in " + file.string());
            double v;
            for (long j = 0; j < count; ++j) ls >> v;
            values[idx] = 0;
          } else if (!(ls >> values[idx])) {
            throw FormatError("short vertex row in " + file.string());
          }
        }
      }
      if (is_vertex) {
        cloud.positions.emplace_back(values[static_cast<std::size_t>(slot["x"])],
                                     values[static_cast<std::size_t>(slot["y"])],
                                     values[static_cast<std::size_t>(slot["z"])]);
        if (has_rgb) {
          cloud.colors.emplace_back(values[static_cast<std::size_t>(slot["red"])] / 255.0,
                                    values[static_cast<std::size_t>(slot["green"])] / 255.0,
                                    values[static_cast<std::size_t>(slot["blue"])] / 255.0);
        }
        if (has_n) {
          Vec3 n(values[static_cast<std::size_t>(slot["nx"])],
                 values[static_cast<std::size_t>(slot["ny"])],
                 values[static_cast<std::size_t>(slot["nz"])]);
          const double len = n.norm();
          // float32 storage nudges unit normals; snap back.
          cloud.normals.push_back(len > 1e-9 ? Vec3(n / len) : Vec3(0, 0, 1));
        }
      }
    }
  }
  return cloud;
}

}  // namespace moransac
