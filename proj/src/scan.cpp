#include "limbswap/scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "limbswap/error.hpp"

namespace limbswap {

namespace {

/// Flip so the largest-magnitude component is positive.
Vec3 canonicalSign(const Vec3& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  return v[idx] < 0.0 ? Vec3(-v) : v;
}

}  // namespace

PointCloud load_ply(std::string_view content) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&line_no](const std::string& what) {
    throw Error(ErrorCode::Parse, "PLY line " + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty PLY file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") fail("missing 'ply' magic");

  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool have_vertex = false;
  std::vector<std::string> vertex_props;
  // Elements declared before "vertex" would have to be skipped; only vertex-first layouts are read.
  bool vertex_first = true;
  bool format_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian" || fmt == "binary_big_endian") {
        throw Error(ErrorCode::UnsupportedFormat, "binary PLY is not supported; convert to ASCII PLY");
      }
      if (fmt != "ascii") fail("unknown PLY format '" + fmt + "'");
      format_seen = true;
    } else if (keyword == "element") {
      std::string name;
      long long count = -1;
      ls >> name >> count;
      if (count < 0) fail("bad element count");
      in_vertex = name == "vertex";
      if (in_vertex) {
        vertex_count = static_cast<std::size_t>(count);
        have_vertex = true;
      } else if (!have_vertex && count > 0) {
        vertex_first = false;
      }
    } else if (keyword == "property") {
      if (in_vertex) {
        std::string type, name;
        ls >> type;
        if (type == "list") fail("list properties are not supported on vertices");
        ls >> name;
        vertex_props.push_back(name);
      }
    } else if (keyword == "end_header") {
      break;
    } else if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) {
      continue;
    } else {
      fail("unexpected header line '" + line + "'");
    }
  }
  if (!format_seen) fail("missing format line");
  if (!have_vertex) fail("no vertex element");
  if (!vertex_first) fail("vertex element must come first");
  const auto pos = [&](const char* name) -> std::size_t {
    const auto it = std::find(vertex_props.begin(), vertex_props.end(), name);
    if (it == vertex_props.end()) fail(std::string("vertex property '") + name + "' missing");
    return static_cast<std::size_t>(it - vertex_props.begin());
  };
  const std::size_t ix = pos("x"), iy = pos("y"), iz = pos("z");

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  while (cloud.points.size() < vertex_count && std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> values;
    double v = 0.0;
    while (ls >> v) values.push_back(v);
    if (values.empty() && line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!ls.eof() || values.size() != vertex_props.size()) fail("malformed vertex record");
    const Vec3 p(values[ix], values[iy], values[iz]);
    if (!p.allFinite()) fail("non-finite vertex");
    cloud.points.push_back(p);
  }
  if (cloud.points.size() != vertex_count) {
    throw Error(ErrorCode::Parse, "PLY header declares " + std::to_string(vertex_count) + " vertices, file has " +
                                      std::to_string(cloud.points.size()));
  }
  return cloud;
}

std::string write_ply(const PointCloud& cloud) {
  std::ostringstream os;
  os.precision(17);
  os << "ply\nformat ascii 1.0\n";
  if (!cloud.source_label.empty()) os << "comment " << cloud.source_label << "\n";
  os << "element vertex " << cloud.points.size() << "\nproperty float x\nproperty float y\nproperty float z\n"
     << "end_header\n";
  for (const auto& p : cloud.points) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  return os.str();
}

OrientedBox pca_obb(const PointCloud& cloud) {
  const auto& pts = cloud.points;
  if (pts.size() < 4) throw Error(ErrorCode::DegenerateCloud, "need at least 4 points");
  for (const auto& p : pts) {
    if (!p.allFinite()) throw Error(ErrorCode::DegenerateCloud, "non-finite point");
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());

  const Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::DegenerateCloud, "eigen decomposition failed");
  const Vec3 values = solver.eigenvalues();  // ascending
  const Mat3 vectors = solver.eigenvectors();

  std::array<std::pair<double, Vec3>, 3> order;
  for (int i = 0; i < 3; ++i) order[static_cast<std::size_t>(i)] = {values[2 - i], canonicalSign(vectors.col(2 - i))};
  const double scale = std::max(order[0].first, 1e-300);
  if (!(order[0].first > 1e-20) || order[1].first <= 1e-12 * scale) {
    throw Error(ErrorCode::DegenerateCloud, "point cloud has rank < 2");
  }
  const double tie = 1e-9 * scale;
  std::stable_sort(order.begin(), order.end(), [tie](const auto& a, const auto& b) {
    if (std::abs(a.first - b.first) > tie) return a.first > b.first;
    const double ax = std::abs(a.second.x()), bx = std::abs(b.second.x());
    if (ax != bx) return ax > bx;
    return std::abs(a.second.y()) > std::abs(b.second.y());
  });

  OrientedBox box;
  box.centroid = mean;
  box.axes[0] = order[0].second.normalized();
  box.axes[1] = (order[1].second - order[1].second.dot(box.axes[0]) * box.axes[0]).normalized();
  box.axes[2] = box.axes[0].cross(box.axes[1]);
  for (int a = 0; a < 3; ++a) {
    double extent = 0.0;
    for (const auto& p : pts) extent = std::max(extent, std::abs((p - mean).dot(box.axes[static_cast<std::size_t>(a)])));
    box.half_extents[a] = std::max(extent, 1e-9);
  }
  return box;
}

RigidTransformd derive_attachment(const OrientedBox& obb) {
  Mat3 source;
  source << obb.axes[0], obb.axes[1], obb.axes[2];
  Mat3 target;
  target << Vec3::UnitZ(), Vec3::UnitY(), -Vec3::UnitX();
  const Mat3 rotation = target * source.transpose();
  RigidTransformd t;
  t.rotation = Quat(rotation).normalized();
  t.translation = -(t.rotation * (obb.centroid - obb.half_extents[0] * obb.axes[0]));
  t.scale = 1.0;
  return t;
}

std::vector<Sphere> sphere_proxy(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0) || !std::isfinite(voxel)) throw Error(ErrorCode::BadParameter, "voxel must be positive");
  using Key = std::tuple<long long, long long, long long>;
  std::map<Key, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    cells[{static_cast<long long>(std::floor(p.x() / voxel)), static_cast<long long>(std::floor(p.y() / voxel)),
           static_cast<long long>(std::floor(p.z() / voxel))}]
        .push_back(i);
  }
  const double base = voxel * std::sqrt(3.0) / 2.0;
  std::vector<Sphere> spheres;
  spheres.reserve(cells.size());
  for (const auto& [key, members] : cells) {
    Vec3 center = Vec3::Zero();
    for (std::size_t i : members) center += cloud.points[i];
    center /= static_cast<double>(members.size());
    double radius = base;
    for (std::size_t i : members) radius = std::max(radius, (cloud.points[i] - center).norm());
    spheres.push_back({center, radius});
  }
  return spheres;
}

ProsthesisSpec scan_to_spec(const PointCloud& cloud, const std::string& id, const ScanOptions& options) {
  const OrientedBox obb = pca_obb(cloud);
  const auto spheres = sphere_proxy(cloud, options.voxel);

  ProsthesisSpec spec;
  spec.id = id;
  spec.display_name = options.display_name.empty() ? id : options.display_name;
  spec.attachment = derive_attachment(obb);
  for (const auto& s : spheres) spec.geometry.push_back({SpherePrimitive{s.center, s.radius}, std::nullopt});
  spec.anchors.push_back(
      {"tip", obb.centroid + obb.half_extents[0] * obb.axes[0], obb.axes[0], AnchorRole::Tip, std::nullopt});
  spec.anchors.push_back({"grip", obb.centroid, obb.axes[0], AnchorRole::Grip, std::nullopt});
  spec.affordances.push_back({GestureKind::Swipe, PushAction{options.push_gain}});

  const auto report = validate_spec(spec);
  if (!report.empty()) {
    throw Error(ErrorCode::Invariant, "scanned spec invalid: " + report.front().path + ": " + report.front().message);
  }
  return spec;
}

}  // namespace limbswap
