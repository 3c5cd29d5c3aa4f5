#include "stripgap/report.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>

#include "json.hpp"

namespace stripgap {

namespace {

using nlohmann::json;

std::string timestamp_utc() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(12);
  return out;
}

void dump_json(const std::string& path, json& j) {
  j["generated"] = timestamp_utc();
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json decay_json(const DecayEstimate& d) {
  return json{{"rate", d.rate},
              {"expected_rate", d.expected_rate},
              {"ok", d.ok},
              {"columns", d.columns}};
}

}  // namespace

LimitCurves sample_limit_curves(double H, int bands, int eta_samples, double lambda_max) {
  LimitCurves c;
  c.H = H;
  for (int i = 0; i < eta_samples; ++i)
    c.eta_grid.push_back(-M_PI + 2.0 * M_PI * i / (eta_samples - 1));
  for (double eta : c.eta_grid) {
    auto lims = limit_eigenvalues(H, eta, bands);
    std::vector<double> row;
    for (const auto& l : lims) row.push_back(l.value);
    c.values.push_back(std::move(row));
  }
  if (lambda_max <= 0) {
    lambda_max = 0;
    for (const auto& row : c.values) lambda_max = std::max(lambda_max, row.back());
  }
  c.nodes = find_nodes(H, lambda_max);
  return c;
}

void write_dispersion_csv(const std::string& path, const DispersionDataset& ds) {
  auto out = open_out(path);
  out << "# generated: " << timestamp_utc() << "\n";
  out << "# epsilon=" << ds.epsilon << " H=" << ds.H << " mesh_h=" << ds.mesh_h
      << " dofs=" << ds.dofs << "\n";
  out << "eta";
  for (int p = 1; p <= ds.bands(); ++p) out << ",lambda" << p;
  out << "\n";
  for (size_t i = 0; i < ds.eta_grid.size(); ++i) {
    out << ds.eta_grid[i];
    for (double v : ds.values[i]) out << "," << v;
    out << "\n";
  }
}

void write_dispersion_json(const std::string& path, const DispersionDataset& ds) {
  json j;
  j["epsilon"] = ds.epsilon;
  j["H"] = ds.H;
  j["mesh"] = {{"h", ds.mesh_h}, {"dofs", ds.dofs}};
  j["eig_error_estimate"] = ds.eig_error_estimate;
  j["eta"] = ds.eta_grid;
  j["values"] = ds.values;
  j["node_etas"] = ds.node_etas;
  dump_json(path, j);
}

void write_bands_gaps_json(const std::string& path, const BandsGaps& bg,
                           const GapPredictions& pred, double epsilon) {
  json j;
  j["epsilon"] = epsilon;
  j["gap_tolerance"] = bg.gap_tolerance;
  j["bands"] = json::array();
  for (const auto& b : bg.bands)
    j["bands"].push_back({{"p", b.p},
                          {"lo", b.lo},
                          {"hi", b.hi},
                          {"arg_lo", b.arg_lo},
                          {"arg_hi", b.arg_hi}});
  j["gaps"] = json::array();
  for (const auto& g : bg.gaps)
    j["gaps"].push_back(
        {{"p", g.p}, {"lo", g.lo}, {"hi", g.hi}, {"width", g.width()}, {"open", g.open}});
  j["predictions"] = json::array();
  for (const auto& p : pred.gaps)
    j["predictions"].push_back({{"p", p.p},
                                {"lower_edge", p.lower_edge(epsilon)},
                                {"upper_edge", p.upper_edge(epsilon)},
                                {"width_slope", p.width_slope},
                                {"predicted_width", p.width_slope * epsilon}});
  j["omitted_predictions"] = pred.omitted;
  dump_json(path, j);
}

void write_cell_constants_json(const std::string& path, const CellConstants& cc,
                               const std::vector<std::string>& warnings) {
  json j;
  j["m1"] = cc.m1;
  j["m2"] = cc.m2;
  j["M_Xi"] = cc.M_Xi;
  j["area_omega"] = cc.area_omega;
  j["H"] = cc.H;
  j["diagnostics"] = {{"T", cc.diag.T},
                      {"h", cc.diag.h},
                      {"dofs", cc.diag.dofs},
                      {"m1_energy", cc.diag.m1_energy},
                      {"m1_farfield", cc.diag.m1_farfield},
                      {"m2_farfield", cc.diag.m2_farfield},
                      {"m2_boundary_integral", cc.diag.m2_boundary_integral},
                      {"cross_rel_diff", cc.diag.cross_rel_diff},
                      {"decay", decay_json(cc.diag.decay)}};
  j["warnings"] = warnings;
  dump_json(path, j);
}

void write_comparison_json(const std::string& path, const ComparisonReport& report,
                           double epsilon) {
  json j;
  j["epsilon"] = epsilon;
  j["nodes"] = json::array();
  for (const auto& n : report.nodes) {
    j["nodes"].push_back({{"id", node_id_name(n.id)},
                          {"eta_star", n.eta_star},
                          {"lambda_star", n.lambda_star},
                          {"psi", n.psi},
                          {"residual_lower", n.residual_lower},
                          {"residual_upper", n.residual_upper},
                          {"fit_C", n.fit_C},
                          {"measured_width", n.measured_width},
                          {"predicted_slope", n.predicted_slope},
                          {"predicted_width", n.predicted_slope * epsilon}});
  }
  j["away"] = {{"max_residual", report.away.max_residual},
               {"max_residual_over_eps", report.away.max_residual_over_eps},
               {"ambiguous_points", report.away.ambiguous_points}};
  dump_json(path, j);
}

void write_limit_csv(const std::string& path, const LimitCurves& curves) {
  auto out = open_out(path);
  out << "# generated: " << timestamp_utc() << "\n";
  out << "# H=" << curves.H << "\n";
  out << "eta";
  for (size_t p = 1; p <= curves.values.front().size(); ++p) out << ",lambda" << p;
  out << "\n";
  for (size_t i = 0; i < curves.eta_grid.size(); ++i) {
    out << curves.eta_grid[i];
    for (double v : curves.values[i]) out << "," << v;
    out << "\n";
  }
}

void write_nodes_json(const std::string& path, const LimitCurves& curves) {
  json j;
  j["H"] = curves.H;
  j["nodes"] = json::array();
  for (const auto& n : curves.nodes) {
    j["nodes"].push_back({{"eta", n.eta_star},
                          {"lambda", n.lambda_star},
                          {"branches",
                           {{n.branches[0].first, n.branches[0].second},
                            {n.branches[1].first, n.branches[1].second}}},
                          {"multiplicity", n.multiplicity},
                          {"status", node_status_name(n.status)},
                          {"rule", n.rule}});
  }
  dump_json(path, j);
}

namespace {

// minimal SVG plotting: axes, polylines, shaded gap bands, node markers
class SvgPlot {
 public:
  SvgPlot(double xmin, double xmax, double ymin, double ymax)
      : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {}

  double px(double x) const { return ml_ + (x - xmin_) / (xmax_ - xmin_) * pw_; }
  double py(double y) const { return mt_ + ph_ - (y - ymin_) / (ymax_ - ymin_) * ph_; }

  void polyline(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\" points=\"";
    for (size_t i = 0; i < x.size(); ++i) body_ << px(x[i]) << "," << py(y[i]) << " ";
    body_ << "\"/>\n";
  }
  void band(double ylo, double yhi, const std::string& color) {
    body_ << "<rect x=\"" << ml_ << "\" y=\"" << py(yhi) << "\" width=\"" << pw_
          << "\" height=\"" << (py(ylo) - py(yhi)) << "\" fill=\"" << color
          << "\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
  }
  void marker(double x, double y, const std::string& color, const std::string& title) {
    body_ << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
          << "\" r=\"3.5\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\">"
          << "<title>" << title << "</title></circle>\n";
  }
  void text(double xpix, double ypix, const std::string& s, int size = 12) {
    body_ << "<text x=\"" << xpix << "\" y=\"" << ypix << "\" font-size=\"" << size
          << "\" font-family=\"sans-serif\">" << s << "</text>\n";
  }

  std::string render(const std::string& title, const std::string& header_comment) {
    std::ostringstream out;
    out << std::setprecision(8);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<!-- " << header_comment << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
        << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n";
    out << "<rect width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"white\"/>\n";
    // axes box and ticks
    out << "<rect x=\"" << ml_ << "\" y=\"" << mt_ << "\" width=\"" << pw_ << "\" height=\""
        << ph_ << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 8; ++i) {
      double x = xmin_ + (xmax_ - xmin_) * i / 8.0;
      double y = ymin_ + (ymax_ - ymin_) * i / 8.0;
      out << "<line x1=\"" << px(x) << "\" y1=\"" << mt_ + ph_ << "\" x2=\"" << px(x)
          << "\" y2=\"" << mt_ + ph_ + 5 << "\" stroke=\"black\"/>\n";
      out << "<line x1=\"" << ml_ - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << ml_ << "\" y2=\""
          << py(y) << "\" stroke=\"black\"/>\n";
      std::ostringstream xv, yv;
      xv << std::setprecision(3) << x;
      yv << std::setprecision(4) << y;
      out << "<text x=\"" << px(x) - 10 << "\" y=\"" << mt_ + ph_ + 18
          << "\" font-size=\"10\" font-family=\"sans-serif\">" << xv.str() << "</text>\n";
      out << "<text x=\"" << 8 << "\" y=\"" << py(y) + 3
          << "\" font-size=\"10\" font-family=\"sans-serif\">" << yv.str() << "</text>\n";
    }
    out << "<text x=\"" << ml_ << "\" y=\"" << mt_ - 8
        << "\" font-size=\"13\" font-family=\"sans-serif\">" << title << "</text>\n";
    out << "<text x=\"" << ml_ + pw_ / 2 << "\" y=\"" << h_ - 6
        << "\" font-size=\"11\" font-family=\"sans-serif\">eta</text>\n";
    out << body_.str();
    out << "</svg>\n";
    return out.str();
  }

 private:
  double xmin_, xmax_, ymin_, ymax_;
  double w_ = 760, h_ = 540, ml_ = 56, mt_ = 30;
  double pw_ = 760 - 56 - 20, ph_ = 540 - 30 - 40;
  std::ostringstream body_;
};

const char* kBandColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                             "#ff7f0e", "#8c564b", "#17becf"};

}  // namespace

void write_dispersion_svg(const std::string& path, const std::vector<double>& eta,
                          const std::vector<std::vector<double>>& values, const BandsGaps* bg,
                          const std::vector<Node>* nodes, const std::string& title) {
  if (eta.empty() || values.empty()) throw std::runtime_error("empty dataset for SVG");
  size_t nb = values.front().size();
  double ymax = 0;
  for (const auto& row : values) ymax = std::max(ymax, row.back());
  SvgPlot plot(-M_PI, M_PI, 0.0, 1.05 * ymax);

  if (bg) {
    for (const auto& g : bg->gaps)
      if (g.open) plot.band(g.lo, g.hi, "#f2c14e");
  }
  for (size_t p = 0; p < nb; ++p) {
    std::vector<double> ys;
    ys.reserve(eta.size());
    for (const auto& row : values) ys.push_back(row[p]);
    plot.polyline(eta, ys, kBandColors[p % 7]);
  }
  if (nodes) {
    for (const auto& n : *nodes) {
      std::string color = n.status == NodeStatus::opens_gap ? "#d62728" : "#777777";
      plot.marker(n.eta_star, n.lambda_star, color, node_status_name(n.status));
    }
  }
  auto out = open_out(path);
  out << plot.render(title, "generated: " + timestamp_utc());
}

}  // namespace stripgap
