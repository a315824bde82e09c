#include "mcirc/io.hpp"

#include <algorithm>

#include "mcirc/error.hpp"
#include "mcirc/text.hpp"

namespace mcirc {

namespace {

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double v = 0.0;
    if (!parse_double(rows[r][c], v))
      throw ValidationError("CSV row " + std::to_string(r + 1) + ", column '" + name +
                            "': not a number: '" + rows[r][c] + "'");
    out.push_back(v);
  }
  return out;
}

std::string format_csv(const CsvTable& table) {
  std::string s;
  auto line = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return s;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::size_t start = 0;
  bool first = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty()) continue;
    auto cells = split_commas(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw ValidationError("CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw ValidationError("CSV input is empty");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  write_text_atomic(path, format_csv(table));
}

std::string format_vtk(const TetMesh& mesh, const std::vector<NamedField>& point_fields) {
  std::string s = "# vtk DataFile Version 3.0\nmcirc\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  s += "POINTS " + std::to_string(mesh.nodes.size()) + " double\n";
  for (const auto& p : mesh.nodes)
    s += format_double(p[0]) + ' ' + format_double(p[1]) + ' ' + format_double(p[2]) + '\n';
  s += "CELLS " + std::to_string(mesh.tets.size()) + ' ' + std::to_string(mesh.tets.size() * 5) + '\n';
  for (const auto& t : mesh.tets)
    s += "4 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + ' ' +
         std::to_string(t[3]) + '\n';
  s += "CELL_TYPES " + std::to_string(mesh.tets.size()) + '\n';
  for (std::size_t i = 0; i < mesh.tets.size(); ++i) s += "10\n";
  s += "CELL_DATA " + std::to_string(mesh.tets.size()) + "\nSCALARS label int 1\nLOOKUP_TABLE default\n";
  for (Label l : mesh.tet_labels) s += std::to_string(l) + '\n';
  if (!point_fields.empty()) {
    s += "POINT_DATA " + std::to_string(mesh.nodes.size()) + '\n';
    for (const auto& [name, values] : point_fields) {
      if (values.size() != mesh.nodes.size())
        throw ValidationError("point field '" + name + "' does not match the node count");
      s += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) s += format_double(v) + '\n';
    }
  }
  return s;
}

void write_vtk(const TetMesh& mesh, const std::vector<NamedField>& point_fields,
               const std::filesystem::path& path) {
  write_text_atomic(path, format_vtk(mesh, point_fields));
}

}  // namespace mcirc
