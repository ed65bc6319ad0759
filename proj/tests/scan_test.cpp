#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "limbswap/error.hpp"
#include "limbswap/retarget.hpp"
#include "limbswap/scan.hpp"
#include "support.hpp"

using namespace limbswap;

namespace {

ErrorCode plyError(const std::string& text) {
  try {
    load_ply(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

ErrorCode pcaError(const std::vector<Vec3>& pts) {
  try {
    pca_obb(PointCloud{pts, ""});
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

/// Gaussian cloud with standard deviations `sd` along the columns of `axes`.
PointCloud gaussianCloud(std::mt19937_64& rng, const Mat3& axes, const Vec3& sd, const Vec3& center, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud c;
  for (int i = 0; i < n; ++i) c.points.push_back(center + axes * Vec3(sd.x() * g(rng), sd.y() * g(rng), sd.z() * g(rng)));
  return c;
}

PointCloud spoon() {
  PointCloud c = load_ply(json_util::readFile(limbswap::testing::dataPath("scans/spoon.ply")));
  c.source_label = "spoon.ply";
  return c;
}

}  // namespace

TEST(Ply, ParsesAsciiAndRoundTrips) {
  const PointCloud c = load_ply(
      "ply\nformat ascii 1.0\ncomment hi\nelement vertex 2\nproperty float x\nproperty float y\n"
      "property float z\nproperty uchar red\nend_header\n0 1 2 255\n3 4 5 0\n");
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[1], Vec3(3, 4, 5));
  EXPECT_EQ(load_ply(write_ply(c)).points, c.points);
  const PointCloud s = spoon();
  EXPECT_EQ(s.points.size(), 1000u);
}

TEST(Ply, Errors) {
  EXPECT_EQ(plyError(""), ErrorCode::Parse);
  EXPECT_EQ(plyError("obj\n"), ErrorCode::Parse);
  EXPECT_EQ(plyError("ply\nformat binary_little_endian 1.0\nelement vertex 1\nend_header\n"),
            ErrorCode::UnsupportedFormat);
  EXPECT_EQ(plyError("ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
                     "property float z\nend_header\n0 0 0\n1 1 1\n"),
            ErrorCode::Parse);
  EXPECT_EQ(plyError("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n"),
            ErrorCode::Parse);
  EXPECT_EQ(plyError("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                     "property float z\nend_header\n0 zero 0\n"),
            ErrorCode::Parse);
}

TEST(Pca, RecoversKnownAxes) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat3 axes = limbswap::testing::randomRotation(rng).toRotationMatrix();
    const PointCloud c = gaussianCloud(rng, axes, Vec3(0.10, 0.03, 0.01), limbswap::testing::randomVec(rng, 0.5), 5000);
    const OrientedBox box = pca_obb(c);
    for (int i = 0; i < 3; ++i) {
      EXPECT_GE(std::abs(box.axes[static_cast<std::size_t>(i)].dot(axes.col(i))), 0.999) << "axis " << i;
    }
    EXPECT_NEAR(box.axes[0].cross(box.axes[1]).dot(box.axes[2]), 1.0, 1e-12);
    // Every point lies inside the box.
    for (const auto& p : c.points) {
      for (int a = 0; a < 3; ++a) {
        EXPECT_LE(std::abs((p - box.centroid).dot(box.axes[static_cast<std::size_t>(a)])), box.half_extents[a] + 1e-12);
      }
    }
  }
}

TEST(Pca, DegenerateClouds) {
  EXPECT_EQ(pcaError({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}), ErrorCode::DegenerateCloud);
  EXPECT_EQ(pcaError(std::vector<Vec3>(10, Vec3(1, 2, 3))), ErrorCode::DegenerateCloud);
  std::vector<Vec3> line;
  for (int i = 0; i < 20; ++i) line.push_back(Vec3(0.01 * i, 0.02 * i, -0.005 * i));
  EXPECT_EQ(pcaError(line), ErrorCode::DegenerateCloud);
  std::vector<Vec3> bad = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, std::nan(""))};
  EXPECT_EQ(pcaError(bad), ErrorCode::DegenerateCloud);
  // A flat square is rank 2, which is enough.
  std::vector<Vec3> plane;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 3; ++j) plane.push_back(Vec3(0.02 * i, 0.01 * j, 0.0));
  }
  EXPECT_NO_THROW(pca_obb(PointCloud{plane, ""}));
}

TEST(Proxy, CoversEveryPoint) {
  const PointCloud c = spoon();
  for (double voxel : {0.01, 0.02, 0.05}) {
    const auto spheres = sphere_proxy(c, voxel);
    for (const auto& p : c.points) {
      bool inside = false;
      for (const auto& s : spheres) inside = inside || (p - s.center).norm() <= s.radius + 1e-12;
      EXPECT_TRUE(inside);
    }
  }
}

TEST(Proxy, RadiiMatchBruteForceFarthestPoint) {
  const PointCloud c = spoon();
  const double voxel = 0.02;
  // Independent grouping: bucket by voxel index, then the farthest member from the bucket mean.
  std::map<std::tuple<long long, long long, long long>, std::vector<Vec3>> buckets;
  for (const auto& p : c.points) {
    buckets[{static_cast<long long>(std::floor(p.x() / voxel)), static_cast<long long>(std::floor(p.y() / voxel)),
             static_cast<long long>(std::floor(p.z() / voxel))}]
        .push_back(p);
  }
  const auto spheres = sphere_proxy(c, voxel);
  ASSERT_EQ(spheres.size(), buckets.size());
  std::size_t i = 0;
  for (const auto& [key, members] : buckets) {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : members) mean += p;
    mean /= static_cast<double>(members.size());
    double farthest = 0.0;
    for (const auto& p : members) farthest = std::max(farthest, (p - mean).norm());
    EXPECT_NEAR((spheres[i].center - mean).norm(), 0.0, 1e-15);
    EXPECT_NEAR(spheres[i].radius, std::max(voxel * std::sqrt(3.0) / 2.0, farthest), 1e-15);
    ++i;
  }
  EXPECT_THROW(sphere_proxy(c, 0.0), Error);
}

TEST(Attachment, LongAxisBecomesWristZ) {
  std::mt19937_64 rng(23);
  const Mat3 axes = limbswap::testing::randomRotation(rng).toRotationMatrix();
  const PointCloud c = gaussianCloud(rng, axes, Vec3(0.08, 0.02, 0.01), Vec3(0.3, -0.1, 0.2), 3000);
  const OrientedBox box = pca_obb(c);
  const RigidTransformd t = derive_attachment(box);
  EXPECT_NEAR((t.applyDirection(box.axes[0]) - Vec3::UnitZ()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((t.applyDirection(box.axes[1]) - Vec3::UnitY()).norm(), 0.0, 1e-12);
  // Near end of the box sits at the wrist origin, far end 2h along +Z.
  EXPECT_NEAR(t.apply(box.centroid - box.half_extents[0] * box.axes[0]).norm(), 0.0, 1e-12);
  EXPECT_NEAR((t.apply(box.centroid + box.half_extents[0] * box.axes[0]) - Vec3(0, 0, 2 * box.half_extents[0])).norm(),
              0.0, 1e-12);
}

TEST(ScanToSpec, ProducesValidRoundTrippingSpec) {
  const PointCloud c = spoon();
  ScanOptions opts;
  opts.display_name = "Spoon";
  const ProsthesisSpec s = scan_to_spec(c, "spoon", opts);
  EXPECT_TRUE(validate_spec(s).empty());
  EXPECT_EQ(s.display_name, "Spoon");
  EXPECT_EQ(s.geometry.size(), sphere_proxy(c, opts.voxel).size());
  EXPECT_TRUE(has_anchor(s, AnchorRole::Tip));
  EXPECT_TRUE(has_anchor(s, AnchorRole::Grip));
  EXPECT_EQ(load_spec(serialize_spec(s)), s);

  // Retargeted at the neutral pose, the scanned object extends along the forearm axis.
  const ObjectPose pose = retarget(neutral_pose(), s);
  const auto& tip = pose.anchors_world[0];
  EXPECT_GT(tip.position.z(), 0.05);
  EXPECT_NEAR(tip.position.x(), 0.0, 1e-9);
  EXPECT_NEAR(tip.position.y(), 0.0, 1e-9);
}

TEST(ScanToSpec, DegenerateCloudPropagates) {
  try {
    scan_to_spec(PointCloud{{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, ""}, "bad");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCloud);
  }
}
