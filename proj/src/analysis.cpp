#include "mcirc/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "mcirc/error.hpp"

namespace mcirc {

namespace {

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

void check_roi(const RoiSpec& roi) {
  if (!(roi.diameter > 0.0)) throw ValidationError("ROI '" + roi.name + "' needs a positive diameter");
}

}  // namespace

void RoiTimeSeries::push(double t, double tbv_mean, double dbv_mean) {
  times.push_back(t);
  tbv.push_back(tbv_mean);
  dbv.push_back(dbv_mean);
  obv.push_back(tbv_mean - dbv_mean);
  ratio.push_back(tbv_mean > 0.0 ? std::optional<double>(dbv_mean / tbv_mean) : std::nullopt);
}

std::vector<double> roi_indicator(const TetMesh& mesh, const RoiSpec& roi) {
  check_roi(roi);
  const double radius = roi.diameter / 2.0;
  std::vector<double> chi(mesh.nodes.size(), 0.0);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    if (distance(tet_centroid(mesh, t), roi.center) < radius)
      for (NodeId n : mesh.tets[t]) chi[n] = 1.0;
  return chi;
}

std::vector<double> roi_weights(const TetMesh& mesh, const RoiSpec& roi, const SparseMatrix& mass) {
  const auto chi = roi_indicator(mesh, roi);
  if (std::none_of(chi.begin(), chi.end(), [](double v) { return v > 0.0; }))
    throw ValidationError("ROI '" + roi.name + "' contains no elements");
  return mass.multiply(chi);  // M symmetric, so M chi = (chi^T M)^T
}

double roi_mean(std::span<const double> field, std::span<const double> weights) {
  if (field.size() != weights.size()) throw ValidationError("field size differs from node count");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    num += weights[i] * field[i];
    den += weights[i];
  }
  if (!(den > 0.0)) throw ValidationError("ROI is empty");
  return num / den;
}

double roi_mean(std::span<const double> field, const RoiSpec& roi, const TetMesh& mesh,
                const SparseMatrix& mass) {
  if (field.size() != mesh.nodes.size()) throw ValidationError("field size differs from node count");
  return roi_mean(field, roi_weights(mesh, roi, mass));
}

BloodSplit obv_dbv_split(std::span<const double> c, std::span<const double> q_tilde,
                         std::span<const double> c_bar) {
  if (c.size() != q_tilde.size() || c.size() != c_bar.size())
    throw ValidationError("field sizes differ");
  BloodSplit s;
  s.tbv.resize(c.size());
  s.obv.resize(c.size());
  s.dbv.assign(q_tilde.begin(), q_tilde.end());
  for (std::size_t i = 0; i < c.size(); ++i) {
    s.tbv[i] = c[i] + c_bar[i];
    s.obv[i] = s.tbv[i] - s.dbv[i];
  }
  return s;
}

std::vector<ProfileBin> radial_profile(std::span<const double> field, const Vec3& center,
                                       std::size_t n_bins, double r_max, const TetMesh& mesh,
                                       const SparseMatrix& mass) {
  if (n_bins == 0) throw ValidationError("radial profile needs at least one bin");
  if (!(r_max > 0.0)) throw ValidationError("radial profile needs a positive r_max");
  if (field.size() != mesh.nodes.size()) throw ValidationError("field size differs from node count");
  const double width = r_max / static_cast<double>(n_bins);
  std::vector<double> num(n_bins, 0.0), den(n_bins, 0.0);
  for (NodeId i = 0; i < mesh.nodes.size(); ++i) {
    const double r = distance(mesh.nodes[i], center);
    if (r >= r_max) continue;
    const auto b = std::min(static_cast<std::size_t>(r / width), n_bins - 1);
    const double w = mass(i, i);
    num[b] += w * field[i];
    den[b] += w;
  }
  std::vector<ProfileBin> out(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    out[b].r_lo = static_cast<double>(b) * width;
    out[b].r_hi = static_cast<double>(b + 1) * width;
    if (den[b] > 0.0) out[b].mean = num[b] / den[b];
  }
  return out;
}

double perturbation_diameter(std::span<const double> field_t, std::span<const double> field_ref,
                             double background, const RoiSpec& roi, const TetMesh& mesh) {
  if (!(background > 0.0)) throw ValidationError("background must be positive");
  if (field_t.size() != field_ref.size() || field_t.size() != mesh.nodes.size())
    throw ValidationError("field sizes differ");
  check_roi(roi);
  const double radius = roi.diameter / 2.0;
  double reach = 0.0;
  bool any = false;
  for (NodeId i = 0; i < mesh.nodes.size(); ++i) {
    const double r = distance(mesh.nodes[i], roi.center);
    if (r > radius) continue;
    if ((field_t[i] - field_ref[i]) / background > 1.0) {
      reach = std::max(reach, r);
      any = true;
    }
  }
  return any ? 2.0 * reach : 0.0;
}

std::vector<double> db_scale(std::span<const double> field) {
  double top = 0.0;
  for (double v : field) top = std::max(top, v);
  if (!(top > 0.0)) throw ValidationError("dB scaling needs a positive maximum");
  std::vector<double> out(field.size(), 0.0);
  for (std::size_t i = 0; i < field.size(); ++i)
    if (field[i] > 0.0) out[i] = std::clamp(80.0 + 20.0 * std::log10(field[i] / top), 0.0, 80.0);
  return out;
}

}  // namespace mcirc
