#include "wildannot/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wildannot/error.hpp"

namespace wildannot {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, delim)) out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<double> json_vec(const nlohmann::json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    throw ParseError(std::string("expected array of ") + std::to_string(n) + " for " + what);
  }
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

enum class PlyType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

PlyType ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::kI8;
  if (name == "uchar" || name == "uint8") return PlyType::kU8;
  if (name == "short" || name == "int16") return PlyType::kI16;
  if (name == "ushort" || name == "uint16") return PlyType::kU16;
  if (name == "int" || name == "int32") return PlyType::kI32;
  if (name == "uint" || name == "uint32") return PlyType::kU32;
  if (name == "float" || name == "float32") return PlyType::kF32;
  if (name == "double" || name == "float64") return PlyType::kF64;
  throw ParseError("unsupported PLY property type '" + name + "'");
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kI8:
    case PlyType::kU8: return 1;
    case PlyType::kI16:
    case PlyType::kU16: return 2;
    case PlyType::kI32:
    case PlyType::kU32:
    case PlyType::kF32: return 4;
    case PlyType::kF64: return 8;
  }
  return 0;
}

template <class T>
double load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double ply_read_binary(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kI8: return load_as<std::int8_t>(p);
    case PlyType::kU8: return load_as<std::uint8_t>(p);
    case PlyType::kI16: return load_as<std::int16_t>(p);
    case PlyType::kU16: return load_as<std::uint16_t>(p);
    case PlyType::kI32: return load_as<std::int32_t>(p);
    case PlyType::kU32: return load_as<std::uint32_t>(p);
    case PlyType::kF32: return load_as<float>(p);
    case PlyType::kF64: return load_as<double>(p);
  }
  return 0.0;
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::pair<std::string, PlyType>> properties;
  bool has_list = false;
};

template <class T>
void append_raw(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::int64_t to_nanoseconds(double seconds) { return std::llround(seconds * 1e9); }

Trajectory read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  std::vector<Pose> poses;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, ',');
    if (!header_seen) {
      header_seen = true;
      if (cols.size() == 8 && cols[0] == "timestamp") {
        const std::vector<std::string> expected = {"timestamp", "x",  "y",  "z",
                                                   "qx",        "qy", "qz", "qw"};
        if (cols != expected) {
          throw ParseError(path.string() + ": header must be timestamp,x,y,z,qx,qy,qz,qw");
        }
        continue;
      }
    }
    if (cols.size() != 8) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 8 columns");
    }
    double v[8];
    for (int k = 0; k < 8; ++k) v[k] = parse_double(cols[static_cast<std::size_t>(k)], path, lineno);
    poses.emplace_back(Eigen::Quaterniond(v[7], v[4], v[5], v[6]),
                       Eigen::Vector3d(v[1], v[2], v[3]), v[0]);
  }
  return Trajectory(std::move(poses));
}

void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory) {
  std::ostringstream os;
  os << "timestamp,x,y,z,qx,qy,qz,qw\n";
  for (const auto& p : trajectory.poses()) {
    const auto& q = p.rotation();
    const auto& x = p.translation();
    os << fmt17(p.timestamp()) << ',' << fmt17(x.x()) << ',' << fmt17(x.y()) << ','
       << fmt17(x.z()) << ',' << fmt17(q.x()) << ',' << fmt17(q.y()) << ',' << fmt17(q.z())
       << ',' << fmt17(q.w()) << '\n';
  }
  write_text_file(path, os.str());
}

CameraRig camera_rig_from_json(const nlohmann::json& j) {
  try {
    CameraRig rig;
    rig.fx = j.at("fx").get<double>();
    rig.fy = j.at("fy").get<double>();
    rig.cx = j.at("cx").get<double>();
    rig.cy = j.at("cy").get<double>();
    rig.width = j.at("width").get<int>();
    rig.height = j.at("height").get<int>();
    if (j.contains("extrinsic")) {
      const auto& e = j.at("extrinsic");
      const auto t = json_vec(e.at("translation"), 3, "extrinsic.translation");
      const auto q = json_vec(e.at("quaternion_xyzw"), 4, "extrinsic.quaternion_xyzw");
      rig.extrinsic = Pose(Eigen::Quaterniond(q[3], q[0], q[1], q[2]),
                           Eigen::Vector3d(t[0], t[1], t[2]));
    }
    rig.validate();
    return rig;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("camera rig: ") + e.what());
  }
}

nlohmann::json camera_rig_to_json(const CameraRig& rig) {
  const auto& q = rig.extrinsic.rotation();
  const auto& t = rig.extrinsic.translation();
  return {{"fx", rig.fx},
          {"fy", rig.fy},
          {"cx", rig.cx},
          {"cy", rig.cy},
          {"width", rig.width},
          {"height", rig.height},
          {"extrinsic",
           {{"translation", {t.x(), t.y(), t.z()}},
            {"quaternion_xyzw", {q.x(), q.y(), q.z(), q.w()}}}}};
}

CameraRig read_camera_rig(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return camera_rig_from_json(j);
}

void write_camera_rig(const fs::path& path, const CameraRig& rig) {
  write_text_file(path, camera_rig_to_json(rig).dump(2) + "\n");
}

nlohmann::json pose_to_json(const Pose& pose) {
  const auto& q = pose.rotation();
  const auto& t = pose.translation();
  return {{"translation", {t.x(), t.y(), t.z()}},
          {"quaternion_xyzw", {q.x(), q.y(), q.z(), q.w()}}};
}

std::vector<double> read_timestamps(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open timestamps file " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string field = split(line, ',').front();
    try {
      out.push_back(parse_double(field, path, lineno));
    } catch (const ParseError&) {
      if (!first) throw;
    }
    first = false;
  }
  return out;
}

void write_timestamps(const fs::path& path, std::span<const double> timestamps) {
  std::ostringstream os;
  for (double t : timestamps) os << fmt17(t) << '\n';
  write_text_file(path, os.str());
}

PointCloudMap read_ply_map(const fs::path& path) {
  const auto bytes = read_binary_file(path);
  const std::string_view all(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const auto header_end = all.find("end_header");
  if (all.substr(0, 3) != "ply" || header_end == std::string_view::npos) {
    throw ParseError(path.string() + ": not a PLY file");
  }
  auto body_start = all.find('\n', header_end);
  if (body_start == std::string_view::npos) throw ParseError(path.string() + ": truncated PLY");
  ++body_start;

  std::istringstream header{std::string(all.substr(0, header_end))};
  std::string line;
  bool ascii = false;
  std::vector<PlyElement> elements;
  while (std::getline(header, line)) {
    std::istringstream ls(trim(line));
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") {
        ascii = true;
      } else if (f != "binary_little_endian") {
        throw ParseError(path.string() + ": unsupported PLY format " + f);
      }
    } else if (kw == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw ParseError(path.string() + ": property before element");
      std::string type;
      ls >> type;
      if (type == "list") {
        elements.back().has_list = true;
        continue;
      }
      std::string name;
      ls >> name;
      elements.back().properties.emplace_back(name, ply_type(type));
    }
  }

  std::vector<Eigen::Vector3d> pts;
  std::vector<double> ts;
  std::vector<Eigen::Vector3d> origins;
  bool has_ts = false;
  bool has_origin = false;
  std::size_t offset = body_start;
  std::istringstream ascii_body;
  if (ascii) ascii_body.str(std::string(all.substr(body_start)));

  for (const auto& e : elements) {
    if (e.name != "vertex") {
      if (e.has_list) throw ParseError(path.string() + ": list properties before vertex data");
      std::size_t stride = 0;
      for (const auto& p : e.properties) stride += ply_size(p.second);
      if (ascii) {
        std::string skip;
        for (std::size_t i = 0; i < e.count; ++i) std::getline(ascii_body >> std::ws, skip);
      } else {
        offset += stride * e.count;
      }
      continue;
    }
    if (e.has_list) throw ParseError(path.string() + ": list properties in vertex element");
    int ix = -1, iy = -1, iz = -1, it = -1, iox = -1, ioy = -1, ioz = -1;
    std::vector<std::size_t> offs;
    std::size_t stride = 0;
    for (std::size_t k = 0; k < e.properties.size(); ++k) {
      const auto& name = e.properties[k].first;
      const int kk = static_cast<int>(k);
      if (name == "x") ix = kk;
      if (name == "y") iy = kk;
      if (name == "z") iz = kk;
      if (name == "timestamp" || name == "time" || name == "t") it = kk;
      if (name == "ox") iox = kk;
      if (name == "oy") ioy = kk;
      if (name == "oz") ioz = kk;
      offs.push_back(stride);
      stride += ply_size(e.properties[k].second);
    }
    if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path.string() + ": vertex lacks x,y,z");
    has_ts = it >= 0;
    has_origin = iox >= 0 && ioy >= 0 && ioz >= 0;
    pts.reserve(e.count);
    std::vector<double> row(e.properties.size());
    for (std::size_t i = 0; i < e.count; ++i) {
      if (ascii) {
        for (auto& v : row) {
          if (!(ascii_body >> v)) throw ParseError(path.string() + ": truncated ASCII vertex data");
        }
      } else {
        if (offset + stride > bytes.size()) throw ParseError(path.string() + ": truncated vertex data");
        const char* base = all.data() + offset;
        for (std::size_t k = 0; k < row.size(); ++k) {
          row[k] = ply_read_binary(e.properties[k].second, base + offs[k]);
        }
        offset += stride;
      }
      pts.emplace_back(row[static_cast<std::size_t>(ix)], row[static_cast<std::size_t>(iy)],
                       row[static_cast<std::size_t>(iz)]);
      if (has_ts) ts.push_back(row[static_cast<std::size_t>(it)]);
      if (has_origin) {
        origins.emplace_back(row[static_cast<std::size_t>(iox)], row[static_cast<std::size_t>(ioy)],
                             row[static_cast<std::size_t>(ioz)]);
      }
    }
    break;
  }
  std::optional<std::vector<double>> ots;
  std::optional<std::vector<Eigen::Vector3d>> oorig;
  if (has_ts) ots = std::move(ts);
  if (has_origin) oorig = std::move(origins);
  return PointCloudMap(std::move(pts), std::move(ots), std::move(oorig));
}

void write_ply_map(const fs::path& path, const PointCloudMap& map) {
  std::string out;
  out += "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(map.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (map.has_timestamps()) out += "property double timestamp\n";
  if (map.has_observation_origins()) out += "property float ox\nproperty float oy\nproperty float oz\n";
  out += "end_header\n";
  out.reserve(out.size() + map.size() * 48);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& p = map.point(i);
    append_raw(out, p.x());
    append_raw(out, p.y());
    append_raw(out, p.z());
    if (map.has_timestamps()) append_raw(out, map.timestamps()[i]);
    if (map.has_observation_origins()) {
      const auto& o = map.observation_origins()[i];
      append_raw(out, static_cast<float>(o.x()));
      append_raw(out, static_cast<float>(o.y()));
      append_raw(out, static_cast<float>(o.z()));
    }
  }
  write_text_file(path, out);
}

void write_ply_points_f32(const fs::path& path, std::span<const Eigen::Vector3d> points) {
  std::string out;
  out += "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(points.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\nend_header\n";
  out.reserve(out.size() + points.size() * 12);
  for (const auto& p : points) {
    append_raw(out, static_cast<float>(p.x()));
    append_raw(out, static_cast<float>(p.y()));
    append_raw(out, static_cast<float>(p.z()));
  }
  write_text_file(path, out);
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_binary_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto n = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> out(n);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n));
  return out;
}

}  // namespace wildannot
