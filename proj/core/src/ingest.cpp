#include "seqpr/ingest.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "seqpr/error.hpp"
#include "text_util.hpp"

namespace seqpr {

namespace fs = std::filesystem;

namespace {

struct ContainerHeader {
  ContainerKind kind = ContainerKind::kMatrix;
  std::uint32_t element_bytes = 8;
  std::uint64_t count = 0;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t aux = 0;
};

constexpr std::size_t kHeaderBytes = 4 + 3 * 4 + 4 * 8;

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  // Host is assumed little endian (x86-64 / aarch64).
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const fs::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw ParseError(path.string() + ": truncated container header");
  }
  return v;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = {}) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::out | std::ios::trunc | mode);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = {}) {
  if (!fs::exists(path)) throw ValidationError("no such file: " + path.string());
  std::ifstream is(path, std::ios::in | mode);
  if (!is) throw ValidationError("cannot open for reading: " + path.string());
  return is;
}

void write_header(std::ostream& os, const ContainerHeader& h) {
  os.write(kContainerMagic, 4);
  put<std::uint32_t>(os, kContainerVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(h.kind));
  put<std::uint32_t>(os, h.element_bytes);
  put<std::uint64_t>(os, h.count);
  put<std::uint64_t>(os, h.rows);
  put<std::uint64_t>(os, h.cols);
  put<std::uint64_t>(os, h.aux);
}

ContainerHeader read_header(std::istream& is, const fs::path& path, ContainerKind expected) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kContainerMagic, 4) != 0) {
    throw ParseError(path.string() + ": bad magic, not a container file");
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kContainerVersion) {
    throw ParseError(path.string() + ": unsupported container version " + std::to_string(version));
  }
  ContainerHeader h;
  const auto kind = get<std::uint32_t>(is, path);
  if (kind != static_cast<std::uint32_t>(expected)) {
    throw ParseError(path.string() + ": container holds kind " + std::to_string(kind) +
                     ", expected " + std::to_string(static_cast<std::uint32_t>(expected)));
  }
  h.kind = expected;
  h.element_bytes = get<std::uint32_t>(is, path);
  if (h.element_bytes != 4 && h.element_bytes != 8) {
    throw ParseError(path.string() + ": element size must be 4 or 8 bytes");
  }
  h.count = get<std::uint64_t>(is, path);
  h.rows = get<std::uint64_t>(is, path);
  h.cols = get<std::uint64_t>(is, path);
  h.aux = get<std::uint64_t>(is, path);

  const auto payload = fs::file_size(path) - kHeaderBytes;
  const unsigned __int128 expected_bytes =
      static_cast<unsigned __int128>(h.count) * h.rows * h.cols * h.element_bytes;
  if (expected_bytes != payload) {
    throw ParseError(path.string() + ": payload size does not match the declared shape");
  }
  return h;
}

void read_elements(std::istream& is, const ContainerHeader& h, double* out, std::size_t n,
                   const fs::path& path) {
  if (h.element_bytes == 8) {
    if (!is.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n * 8))) {
      throw ParseError(path.string() + ": truncated payload");
    }
    return;
  }
  std::vector<float> buf(n);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 4))) {
    throw ParseError(path.string() + ": truncated payload");
  }
  for (std::size_t k = 0; k < n; ++k) out[k] = static_cast<double>(buf[k]);
}

ScanFormat resolve_format(const fs::path& path, ScanFormat format, bool reading) {
  if (format != ScanFormat::kAuto) return format;
  if (reading && fs::exists(path) && fs::file_size(path) >= 4) {
    return is_container_file(path) ? ScanFormat::kBinary : ScanFormat::kCsv;
  }
  const auto ext = path.extension().string();
  return (ext == ".csv" || ext == ".txt") ? ScanFormat::kCsv : ScanFormat::kBinary;
}

void check_scan_values(const RowMatrix& power, std::size_t index) {
  for (Eigen::Index r = 0; r < power.rows(); ++r) {
    for (Eigen::Index c = 0; c < power.cols(); ++c) {
      const double v = power(r, c);
      if (!std::isfinite(v)) {
        throw ParseError("scan " + std::to_string(index) + ": non-finite power at azimuth " +
                             std::to_string(r) + ", bin " + std::to_string(c),
                         index);
      }
      if (v < 0.0 || v > 1.0) {
        throw ParseError("scan " + std::to_string(index) + ": power " +
                             detail::format_double(v) + " outside [0,1] at azimuth " +
                             std::to_string(r) + ", bin " + std::to_string(c),
                         index);
      }
    }
  }
}

std::vector<PolarScan> load_scans_binary(const fs::path& path) {
  auto is = open_in(path, std::ios::binary);
  const auto h = read_header(is, path, ContainerKind::kScans);
  if (h.count > 0 && (h.rows == 0 || h.cols == 0)) {
    throw ParseError(path.string() + ": scans must have A > 0 and B > 0");
  }
  std::vector<PolarScan> scans(h.count);
  for (std::size_t s = 0; s < h.count; ++s) {
    scans[s].power.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
    read_elements(is, h, scans[s].power.data(), h.rows * h.cols, path);
    check_scan_values(scans[s].power, s);
  }
  return scans;
}

// Text layout: first non-empty line "A,B", then A rows of B values per scan.
std::vector<PolarScan> load_scans_csv(const fs::path& path) {
  auto is = open_in(path);
  std::vector<PolarScan> scans;
  std::string line;
  std::size_t line_no = 0;
  std::size_t azimuths = 0;
  std::size_t bins = 0;
  bool have_header = false;
  std::size_t row_in_scan = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = detail::split(text);
    if (!have_header) {
      const auto a = fields.size() == 2 ? detail::parse_uint(fields[0]) : std::nullopt;
      const auto b = fields.size() == 2 ? detail::parse_uint(fields[1]) : std::nullopt;
      if (!a || !b || *a == 0 || *b == 0) {
        throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": malformed header, expected 'A,B' with positive integers");
      }
      azimuths = *a;
      bins = *b;
      have_header = true;
      continue;
    }
    const std::size_t index = scans.size() - (row_in_scan == 0 ? 0 : 1);
    if (row_in_scan == 0) {
      scans.emplace_back();
      scans.back().power.setZero(static_cast<Eigen::Index>(azimuths),
                                 static_cast<Eigen::Index>(bins));
    }
    if (fields.size() != bins) {
      throw ParseError("scan " + std::to_string(index) + ": line " + std::to_string(line_no) +
                           " has " + std::to_string(fields.size()) + " values, expected " +
                           std::to_string(bins),
                       index);
    }
    for (std::size_t c = 0; c < bins; ++c) {
      const auto v = detail::parse_double(fields[c]);
      if (!v) {
        throw ParseError("scan " + std::to_string(index) + ": line " + std::to_string(line_no) +
                             ": cannot parse '" + std::string(fields[c]) + "'",
                         index);
      }
      scans.back().power(static_cast<Eigen::Index>(row_in_scan), static_cast<Eigen::Index>(c)) =
          *v;
    }
    row_in_scan = (row_in_scan + 1) % azimuths;
    if (row_in_scan == 0) check_scan_values(scans.back().power, index);
  }
  if (row_in_scan != 0) {
    throw ParseError("scan " + std::to_string(scans.size() - 1) + ": truncated, only " +
                         std::to_string(row_in_scan) + " of " + std::to_string(azimuths) +
                         " azimuth rows",
                     scans.size() - 1);
  }
  return scans;
}

}  // namespace

void validate_scan(const PolarScan& scan) {
  if (scan.power.rows() == 0 || scan.power.cols() == 0) {
    throw ValidationError("scan must have at least one azimuth and one range bin");
  }
  try {
    check_scan_values(scan.power, 0);
  } catch (const ParseError& e) {
    throw ValidationError(e.what());
  }
}

PolarScan shift_azimuth(const PolarScan& scan, std::ptrdiff_t shift) {
  const auto a = static_cast<std::ptrdiff_t>(scan.azimuths());
  PolarScan out;
  out.power.resize(scan.power.rows(), scan.power.cols());
  if (a == 0) return out;
  const std::ptrdiff_t s = ((shift % a) + a) % a;
  for (std::ptrdiff_t r = 0; r < a; ++r) {
    out.power.row((r + s) % a) = scan.power.row(r);
  }
  return out;
}

DescriptorSequence::DescriptorSequence(RowMatrix vectors, std::string source_id)
    : vectors_(std::move(vectors)), source_id_(std::move(source_id)) {
  if (!vectors_.allFinite()) {
    for (Eigen::Index i = 0; i < vectors_.rows(); ++i) {
      if (!vectors_.row(i).allFinite()) {
        throw ValidationError("descriptor row " + std::to_string(i) + " has non-finite entries");
      }
    }
  }
}

double wrap_angle(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  double out = t - std::numbers::pi;
  if (out >= std::numbers::pi) out -= kTwoPi;
  if (out < -std::numbers::pi) out = -std::numbers::pi;
  return out;
}

bool is_container_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  char magic[4];
  return is.read(magic, 4) && std::memcmp(magic, kContainerMagic, 4) == 0;
}

std::vector<PolarScan> load_scans(const fs::path& path, ScanFormat format) {
  if (!fs::exists(path)) throw ValidationError("no such file: " + path.string());
  if (fs::file_size(path) == 0) return {};
  return resolve_format(path, format, true) == ScanFormat::kBinary ? load_scans_binary(path)
                                                                    : load_scans_csv(path);
}

void write_scans(const fs::path& path, const std::vector<PolarScan>& scans, ScanFormat format) {
  const std::size_t a = scans.empty() ? 0 : scans.front().azimuths();
  const std::size_t b = scans.empty() ? 0 : scans.front().range_bins();
  for (std::size_t s = 0; s < scans.size(); ++s) {
    if (scans[s].azimuths() != a || scans[s].range_bins() != b) {
      throw ValidationError("scan " + std::to_string(s) + " shape differs from scan 0");
    }
  }
  if (resolve_format(path, format, false) == ScanFormat::kCsv) {
    auto os = open_out(path);
    if (scans.empty()) return;
    os << a << ',' << b << '\n';
    for (const auto& scan : scans) {
      for (Eigen::Index r = 0; r < scan.power.rows(); ++r) {
        for (Eigen::Index c = 0; c < scan.power.cols(); ++c) {
          if (c) os << ',';
          os << detail::format_double(scan.power(r, c));
        }
        os << '\n';
      }
    }
    return;
  }
  auto os = open_out(path, std::ios::binary);
  write_header(os, {ContainerKind::kScans, 4, scans.size(), a, b, 0});
  std::vector<float> buf;
  for (const auto& scan : scans) {
    buf.assign(scan.power.data(), scan.power.data() + scan.power.size());
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
}

DescriptorSequence load_descriptors(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("no such file: " + path.string());
  const std::string id = path.stem().string();
  if (fs::file_size(path) >= 4 && is_container_file(path)) {
    auto is = open_in(path, std::ios::binary);
    const auto h = read_header(is, path, ContainerKind::kDescriptors);
    if (h.rows != 1) throw ParseError(path.string() + ": descriptor records must have one row");
    RowMatrix values(static_cast<Eigen::Index>(h.count), static_cast<Eigen::Index>(h.cols));
    read_elements(is, h, values.data(), h.count * h.cols, path);
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      if (!values.row(i).allFinite()) {
        throw ParseError("row " + std::to_string(i) + ": non-finite descriptor entry",
                         static_cast<std::size_t>(i));
      }
    }
    return DescriptorSequence(std::move(values), id);
  }

  auto is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const std::size_t row = rows.size();
    const auto fields = detail::split(text);
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw ParseError("row " + std::to_string(row) + ": ragged row of width " +
                           std::to_string(fields.size()) + ", expected " +
                           std::to_string(rows.front().size()),
                       row);
    }
    std::vector<double> values;
    values.reserve(fields.size());
    for (const auto f : fields) {
      const auto v = detail::parse_double(f);
      if (!v) {
        throw ParseError("row " + std::to_string(row) + ": cannot parse '" + std::string(f) + "'",
                         row);
      }
      if (!std::isfinite(*v)) {
        throw ParseError("row " + std::to_string(row) + ": non-finite descriptor entry", row);
      }
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  RowMatrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return DescriptorSequence(std::move(values), id);
}

void write_descriptors(const fs::path& path, const DescriptorSequence& seq, ScanFormat format) {
  if (resolve_format(path, format, false) == ScanFormat::kCsv) {
    write_matrix_csv(path, seq.vectors());
    return;
  }
  auto os = open_out(path, std::ios::binary);
  write_header(os, {ContainerKind::kDescriptors, 8, seq.size(), 1, seq.dim(), 0});
  os.write(reinterpret_cast<const char*>(seq.vectors().data()),
           static_cast<std::streamsize>(seq.vectors().size() * sizeof(double)));
}

PoseTrajectory load_poses(const fs::path& path) {
  auto is = open_in(path);
  PoseTrajectory poses;
  std::string line;
  std::size_t line_no = 0;
  static constexpr const char* kFieldNames[3] = {"x", "y", "theta"};
  while (std::getline(is, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto fields = detail::split(text);
    if (fields.size() < 3) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                           ": expected fields x,y,theta, got " + std::to_string(fields.size()),
                       line_no);
    }
    double v[3];
    for (int k = 0; k < 3; ++k) {
      const auto parsed = detail::parse_double(fields[static_cast<std::size_t>(k)]);
      if (!parsed) {
        throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": field " +
                             kFieldNames[k] + " is not a number: '" +
                             std::string(fields[static_cast<std::size_t>(k)]) + "'",
                         line_no);
      }
      if (!std::isfinite(*parsed)) {
        throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": field " +
                             kFieldNames[k] + " is not finite",
                         line_no);
      }
      v[k] = *parsed;
    }
    poses.push_back({v[0], v[1], wrap_angle(v[2])});
  }
  return poses;
}

void write_poses(const fs::path& path, const PoseTrajectory& poses) {
  auto os = open_out(path);
  os << "x,y,theta\n";
  for (const auto& p : poses) {
    os << detail::format_double(p.x) << ',' << detail::format_double(p.y) << ','
       << detail::format_double(p.theta) << '\n';
  }
}

void write_matrix_container(const fs::path& path, const RowMatrix& values, std::uint64_t aux) {
  auto os = open_out(path, std::ios::binary);
  write_header(os, {ContainerKind::kMatrix, 8, 1, static_cast<std::uint64_t>(values.rows()),
                    static_cast<std::uint64_t>(values.cols()), aux});
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(double)));
}

MatrixBlob read_matrix_container(const fs::path& path) {
  auto is = open_in(path, std::ios::binary);
  const auto h = read_header(is, path, ContainerKind::kMatrix);
  if (h.count != 1) throw ParseError(path.string() + ": matrix container must hold one record");
  MatrixBlob blob;
  blob.values.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  read_elements(is, h, blob.values.data(), h.rows * h.cols, path);
  blob.aux = h.aux;
  return blob;
}

void write_matrix_csv(const fs::path& path, const RowMatrix& values) {
  auto os = open_out(path);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) os << ',';
      os << detail::format_double(values(r, c));
    }
    os << '\n';
  }
}

RowMatrix read_matrix_csv(const fs::path& path) {
  auto is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    std::vector<double> row;
    for (const auto f : detail::split(text)) {
      const auto v = detail::parse_double(f);
      if (!v) throw ParseError("row " + std::to_string(rows.size()) + ": bad value", rows.size());
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("row " + std::to_string(rows.size()) + ": ragged row", rows.size());
    }
    rows.push_back(std::move(row));
  }
  RowMatrix m(static_cast<Eigen::Index>(rows.size()),
              static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

}  // namespace seqpr
