#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcirc/mesh.hpp"
#include "mcirc/sparse.hpp"

namespace mcirc {

struct RoiSpec {
  std::string name = "roi";
  Vec3 center{};
  double diameter = 0.014;  ///< m
};

struct RoiTimeSeries {
  std::vector<double> times;
  std::vector<double> tbv;
  std::vector<double> dbv;
  std::vector<double> obv;
  std::vector<std::optional<double>> ratio;  ///< dbv / tbv where tbv > 0

  void push(double t, double tbv_mean, double dbv_mean);
};

/// Indicator of the nodes of elements whose centroid lies inside the ball.
std::vector<double> roi_indicator(const TetMesh& mesh, const RoiSpec& roi);

/// (chi^T M f) / (chi^T M 1).
double roi_mean(std::span<const double> field, const RoiSpec& roi, const TetMesh& mesh,
                const SparseMatrix& mass);
/// Same with a precomputed indicator row w = M chi.
double roi_mean(std::span<const double> field, std::span<const double> weights);
std::vector<double> roi_weights(const TetMesh& mesh, const RoiSpec& roi, const SparseMatrix& mass);

struct BloodSplit {
  std::vector<double> tbv;
  std::vector<double> obv;
  std::vector<double> dbv;
};

BloodSplit obv_dbv_split(std::span<const double> c, std::span<const double> q_tilde,
                         std::span<const double> c_bar);

struct ProfileBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::optional<double> mean;  ///< absent when no node falls in the bin
};

/// Diagonal-mass-weighted means over radial shells around `center`.
std::vector<ProfileBin> radial_profile(std::span<const double> field, const Vec3& center,
                                       std::size_t n_bins, double r_max, const TetMesh& mesh,
                                       const SparseMatrix& mass);

/// 2 * max distance from the ROI centre over ROI nodes with
/// (field_t - field_ref) / background > 1.
double perturbation_diameter(std::span<const double> field_t, std::span<const double> field_ref,
                             double background, const RoiSpec& roi, const TetMesh& mesh);

/// clamp(80 + 20 log10(x / max), 0, 80).
std::vector<double> db_scale(std::span<const double> field);

}  // namespace mcirc
