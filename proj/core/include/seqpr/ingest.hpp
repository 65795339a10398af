#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace seqpr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One azimuth x range power grid. Rows are azimuths, columns range bins.
struct PolarScan {
  RowMatrix power;

  std::size_t azimuths() const { return static_cast<std::size_t>(power.rows()); }
  std::size_t range_bins() const { return static_cast<std::size_t>(power.cols()); }
};

/// Checks finiteness and the [0,1] range; throws ValidationError.
void validate_scan(const PolarScan& scan);

/// Circularly shifts the azimuth axis so that row r of the result is row
/// (r - shift) mod A of the input. Models a vehicle yaw of shift * 2pi / A.
PolarScan shift_azimuth(const PolarScan& scan, std::ptrdiff_t shift);

/// Ordered trajectory of place descriptors, one row per frame.
class DescriptorSequence {
 public:
  DescriptorSequence() = default;
  DescriptorSequence(RowMatrix vectors, std::string source_id = {});

  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  bool empty() const { return size() == 0; }

  const RowMatrix& vectors() const { return vectors_; }
  auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

  const std::string& source_id() const { return source_id_; }
  void set_source_id(std::string id) { source_id_ = std::move(id); }

 private:
  RowMatrix vectors_;
  std::string source_id_;
};

struct Pose2 {
  double x = 0.0;      // metres
  double y = 0.0;      // metres
  double theta = 0.0;  // radians, [-pi, pi)
};

using PoseTrajectory = std::vector<Pose2>;

/// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);

enum class ScanFormat { kAuto, kBinary, kCsv };

// Binary container layout (little endian):
//   char[4] magic "SQPB" | u32 version | u32 kind | u32 element bytes (4 or 8)
//   u64 count | u64 rows | u64 cols | u64 aux
//   count * rows * cols row-major elements
// kind 1 = scans (rows = A, cols = B), 2 = descriptors (rows = 1, cols = D),
// 3 = matrix (count = 1, aux = enhancement window or 0 for raw).
inline constexpr char kContainerMagic[4] = {'S', 'Q', 'P', 'B'};
inline constexpr std::uint32_t kContainerVersion = 1;

enum class ContainerKind : std::uint32_t { kScans = 1, kDescriptors = 2, kMatrix = 3 };

/// True when the file starts with the binary container magic.
bool is_container_file(const std::filesystem::path& path);

std::vector<PolarScan> load_scans(const std::filesystem::path& path,
                                  ScanFormat format = ScanFormat::kAuto);
/// Scans are written as 32-bit floats (binary) or shortest round-trip
/// decimal text (csv).
void write_scans(const std::filesystem::path& path, const std::vector<PolarScan>& scans,
                 ScanFormat format = ScanFormat::kAuto);

/// Binary container or CSV (one vector per line), detected from the magic.
DescriptorSequence load_descriptors(const std::filesystem::path& path);
/// Binary descriptors are stored as 64-bit floats so reloads are bit-exact.
void write_descriptors(const std::filesystem::path& path, const DescriptorSequence& seq,
                       ScanFormat format = ScanFormat::kAuto);

/// CSV with one header line and records `x,y,theta`.
PoseTrajectory load_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, const PoseTrajectory& poses);

// Low-level matrix container access, shared by diffmat export.
struct MatrixBlob {
  RowMatrix values;
  std::uint64_t aux = 0;
};
void write_matrix_container(const std::filesystem::path& path, const RowMatrix& values,
                            std::uint64_t aux);
MatrixBlob read_matrix_container(const std::filesystem::path& path);

/// Writes a matrix as plain CSV with round-trip precision.
void write_matrix_csv(const std::filesystem::path& path, const RowMatrix& values);
RowMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace seqpr
