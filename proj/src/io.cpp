#include "rte/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace rte {

namespace {

static_assert(std::endian::native == std::endian::little, "binary output assumes a little-endian host");

constexpr char kMagic[8] = {'R', 'T', 'E', 'C', 'O', 'E', 'F', '1'};

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& comment,
                     const std::vector<std::string>& header)
    : out_(open_out(path)), columns_(header.size()) {
  out_ << "# " << comment << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
  out_ << std::setprecision(10);
}

void CsvWriter::separator() {
  if (cell_ >= columns_) throw std::logic_error("CsvWriter: too many cells in row");
  if (cell_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(const std::string& cell) {
  separator();
  out_ << cell;
  return *this;
}

CsvWriter& CsvWriter::operator<<(double value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::operator<<(long value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  if (cell_ != columns_) throw std::logic_error("CsvWriter: incomplete row");
  out_ << '\n';
  out_.flush();
  cell_ = 0;
}

void write_history_csv(const std::filesystem::path& path, const IterationReport& report, const std::string& comment) {
  CsvWriter csv(path, comment, {"n", "increment_norm", "inner_iterations_total", "wall_time"});
  long total = 0;
  for (std::size_t i = 0; i < report.increments.size(); ++i) {
    total += report.inner_iterations[i];
    csv << static_cast<long>(i + 1) << report.increments[i] << total << report.wall_time[i];
    csv.end_row();
  }
}

void write_coefficients(const std::filesystem::path& path, const Vector& x, Index rows, Index cols) {
  if (x.size() != rows * cols) throw std::invalid_argument("write_coefficients: dimension mismatch");
  auto out = open_out(path, std::ios::out | std::ios::binary);
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols)};
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(x.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Matrix read_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  std::uint64_t dims[2];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw std::runtime_error("not a coefficient file: " + path.string());
  Matrix X(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
  in.read(reinterpret_cast<char*>(X.data()), static_cast<std::streamsize>(X.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated coefficient file: " + path.string());
  return X;
}

Vector scalar_flux(const AssembledSystem& sys, const Vector& u_plus) {
  if (u_plus.size() != sys.even_size()) throw std::invalid_argument("scalar_flux: dimension mismatch");
  Eigen::Map<const Matrix> U(u_plus.data(), sys.nR_plus(), sys.nS_plus());
  return U * sys.angular.M_plus / (4.0 * std::numbers::pi);
}

void write_flux_vtk(const std::filesystem::path& path, const SpatialMesh& mesh, const Vector& flux) {
  if (flux.size() != static_cast<Index>(mesh.num_vertices())) throw std::invalid_argument("write_flux_vtk: size mismatch");
  auto out = open_out(path);
  out << std::setprecision(12);
  out << "# vtk DataFile Version 3.0\nscalar flux\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t i = 0; i < mesh.num_triangles(); ++i) out << "5\n";
  out << "POINT_DATA " << mesh.num_vertices() << "\nSCALARS flux double 1\nLOOKUP_TABLE default\n";
  for (Index i = 0; i < flux.size(); ++i) out << flux(i) << '\n';
}

void write_coo(const std::filesystem::path& path, const SpMat& A) {
  auto out = open_out(path);
  out << std::setprecision(17) << "row,col,value\n";
  for (Index j = 0; j < A.outerSize(); ++j)
    for (SpMat::InnerIterator it(A, j); it; ++it) out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
}

}  // namespace rte
