#pragma once

#include "rte/assembly.hpp"
#include "rte/solver.hpp"

#include <filesystem>
#include <fstream>
#include <string>

namespace rte {

/// CSV with a leading '#' comment line and a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& comment, const std::vector<std::string>& header);

  CsvWriter& operator<<(const std::string& cell);
  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(long value);
  CsvWriter& operator<<(int value) { return *this << static_cast<long>(value); }
  void end_row();

 private:
  void separator();
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t cell_ = 0;
};

/// Columns n, increment_norm, inner_iterations_total, wall_time.
void write_history_csv(const std::filesystem::path& path, const IterationReport& report, const std::string& comment);

/// Binary coefficients: 8-byte magic "RTECOEF1", uint64 rows, uint64 cols,
/// then rows*cols little-endian float64 in column-major order (spatial index
/// fastest).
void write_coefficients(const std::filesystem::path& path, const Vector& x, Index rows, Index cols);
Matrix read_coefficients(const std::filesystem::path& path);

/// Angular average (1/4pi) int u ds of the even part at the spatial vertices.
Vector scalar_flux(const AssembledSystem& sys, const Vector& u_plus);

/// Legacy-VTK unstructured grid with point data "flux".
void write_flux_vtk(const std::filesystem::path& path, const SpatialMesh& mesh, const Vector& flux);

/// Triplets "row,col,value" with a header line.
void write_coo(const std::filesystem::path& path, const SpMat& A);

}  // namespace rte
