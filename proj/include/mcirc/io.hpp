#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcirc/mesh.hpp"

namespace mcirc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  /// Column parsed as numbers; throws on a malformed cell.
  std::vector<double> numbers(const std::string& name) const;
};

std::string format_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const CsvTable& table, const std::filesystem::path& path);

using NamedField = std::pair<std::string, std::span<const double>>;

/// Legacy ASCII unstructured grid with tetrahedral cells, the compartment
/// label as cell data and the given point scalars.
std::string format_vtk(const TetMesh& mesh, const std::vector<NamedField>& point_fields);
void write_vtk(const TetMesh& mesh, const std::vector<NamedField>& point_fields,
               const std::filesystem::path& path);

}  // namespace mcirc
