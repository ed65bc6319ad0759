#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "limbswap/geometry.hpp"
#include "limbswap/prosthesis.hpp"

namespace limbswap {

struct PointCloud {
  std::vector<Vec3> points;
  std::string source_label;
};

/// Oriented box with axes sorted by descending extent and forming a right-handed frame.
struct OrientedBox {
  Vec3 centroid = Vec3::Zero();
  std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  Vec3 half_extents = Vec3::Zero();
};

/// ASCII PLY with float x/y/z vertex properties (other properties are skipped).
/// Binary PLY raises Error{UnsupportedFormat}; malformed input raises Error{Parse}.
PointCloud load_ply(std::string_view content);
std::string write_ply(const PointCloud& cloud);

/// Centroid plus covariance eigenvectors in descending eigenvalue order. Near-equal eigenvalues
/// are ordered by |axis . X|, then |axis . Y|. Error{DegenerateCloud} below rank 2.
OrientedBox pca_obb(const PointCloud& cloud);

/// Maps the longest axis onto wrist +Z and the second onto +Y, with the near end of the box at the
/// wrist origin.
RigidTransformd derive_attachment(const OrientedBox& obb);

/// One sphere per occupied voxel: centred on the mean of its points, radius voxel * sqrt(3) / 2,
/// grown when needed so every point of the voxel lies inside.
std::vector<Sphere> sphere_proxy(const PointCloud& cloud, double voxel);

struct ScanOptions {
  double voxel = 0.02;
  std::string display_name;
  double push_gain = 1.0;
};

ProsthesisSpec scan_to_spec(const PointCloud& cloud, const std::string& id, const ScanOptions& options = {});

}  // namespace limbswap
