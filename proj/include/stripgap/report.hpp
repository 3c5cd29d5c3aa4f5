#pragma once

#include <string>

#include "stripgap/band_sweep.hpp"
#include "stripgap/cell_constants.hpp"
#include "stripgap/limit_model.hpp"

namespace stripgap {

/// Limit dispersion curves sampled for plotting/CSV.
struct LimitCurves {
  double H = 0;
  std::vector<double> eta_grid;
  std::vector<std::vector<double>> values;  // per eta, ascending
  std::vector<Node> nodes;
};

LimitCurves sample_limit_curves(double H, int bands, int eta_samples, double lambda_max = 0);

// All writers put a single `generated:` timestamp line (or JSON field) at the
// top; everything else is deterministic for a fixed config.
void write_dispersion_csv(const std::string& path, const DispersionDataset& ds);
void write_dispersion_json(const std::string& path, const DispersionDataset& ds);
void write_bands_gaps_json(const std::string& path, const BandsGaps& bg,
                           const GapPredictions& pred, double epsilon);
void write_cell_constants_json(const std::string& path, const CellConstants& cc,
                               const std::vector<std::string>& warnings);
void write_comparison_json(const std::string& path, const ComparisonReport& report,
                           double epsilon);
void write_limit_csv(const std::string& path, const LimitCurves& curves);
void write_nodes_json(const std::string& path, const LimitCurves& curves);

/// Dispersion plot; when `bg` is non-null the open gaps are shaded.
void write_dispersion_svg(const std::string& path, const std::vector<double>& eta,
                          const std::vector<std::vector<double>>& values, const BandsGaps* bg,
                          const std::vector<Node>* nodes, const std::string& title);

}  // namespace stripgap
