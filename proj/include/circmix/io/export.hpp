#ifndef CIRCMIX_IO_EXPORT_HPP
#define CIRCMIX_IO_EXPORT_HPP

// Tabular artifacts: classifications, selection tables, intervals, recovery
// summaries, simulated data and plot grids.

#include <Eigen/Dense>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "circmix/bootstrap.hpp"
#include "circmix/circula.hpp"
#include "circmix/errors.hpp"
#include "circmix/io/json.hpp"
#include "circmix/mixture.hpp"
#include "circmix/simstudy.hpp"

namespace circmix::io {

/// Shortest decimal form that reads back to the same double.
inline std::string num(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ec == std::errc() ? ptr : buf.data());
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path), path_(path) {
    if (!out_) throw DataError("cannot write '" + path + "'");
  }

  CsvWriter& row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      const bool quote = fields[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out_ << fields[i];
        continue;
      }
      out_ << '"';
      for (char c : fields[i]) out_ << (c == '"' ? "\"\"" : std::string(1, c));
      out_ << '"';
    }
    out_ << '\n';
    if (!out_) throw DataError("write to '" + path_ + "' failed");
    return *this;
  }

 private:
  std::ofstream out_;
  std::string path_;
};

/// Row id (1-based), responsibilities and the 1-based MAP label.
inline void write_classification(const std::string& path, const FitResult& f) {
  CsvWriter w(path);
  std::vector<std::string> head{"row"};
  for (int j = 1; j <= f.model.J(); ++j) head.push_back("u" + std::to_string(j));
  head.push_back("label");
  w.row(head);
  for (Eigen::Index i = 0; i < f.responsibilities.rows(); ++i) {
    std::vector<std::string> r{std::to_string(i + 1)};
    for (Eigen::Index j = 0; j < f.responsibilities.cols(); ++j) r.push_back(num(f.responsibilities(i, j)));
    r.push_back(std::to_string(f.classification[static_cast<std::size_t>(i)] + 1));
    w.row(r);
  }
}

/// One row per (family pair, J) cell, with the chosen cell flagged.
inline void write_selection(const std::string& path, const SelectionResult& s) {
  CsvWriter w(path);
  w.row({"families", "J", "loglik", "bic", "n_params", "converged", "best", "error"});
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    const auto& r = s.rows[k];
    const bool ok = r.error.empty();
    w.row({to_string(r.families), std::to_string(r.J), ok ? num(r.loglik) : "", ok ? num(r.bic) : "",
           std::to_string(r.n_params), ok && r.converged ? "1" : "0", s.best && *s.best == k ? "1" : "0", r.error});
  }
}

inline void write_intervals(const std::string& path, const BootstrapResult& r) {
  CsvWriter w(path);
  w.row({"parameter", "component", "covariate", "estimate", "lower", "upper", "level"});
  for (const auto& iv : r.intervals) {
    w.row({iv.info.name, std::to_string(iv.info.component), iv.info.covariate, num(iv.estimate), num(iv.lower),
           num(iv.upper), num(r.level)});
  }
}

inline void write_recovery(const std::string& path, const RecoveryReport& r) {
  CsvWriter w(path);
  w.row({"scenario", "parameter", "component", "covariate", "truth", "mean", "lower", "upper"});
  for (const auto& p : r.parameters) {
    w.row({r.scenario, p.info.name, std::to_string(p.info.component), p.info.covariate, num(p.truth), num(p.mean),
           num(p.lower), num(p.upper)});
  }
}

inline void write_accuracy(const std::string& path, const RecoveryReport& r) {
  CsvWriter w(path);
  w.row({"replica", "ok", "accuracy", "loglik", "iterations", "loglik_decreases"});
  for (const auto& o : r.outcomes) {
    w.row({std::to_string(o.index + 1), o.ok ? "1" : "0", o.ok ? num(o.accuracy) : "", o.ok ? num(o.loglik) : "",
           std::to_string(o.iterations), std::to_string(o.loglik_decreases)});
  }
}

/// Angles in radians; covariate columns without the intercept; 1-based labels.
inline void write_dataset(const std::string& path, const Dataset& d, const std::vector<int>* labels = nullptr) {
  CsvWriter w(path);
  std::vector<std::string> head{"x", "y"};
  if (labels) head.push_back("label");
  for (Eigen::Index c = 1; c < d.z.cols(); ++c) head.push_back(d.covariate_names[static_cast<std::size_t>(c)]);
  w.row(head);
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<std::string> r{num(d.x[i]), num(d.y[i])};
    if (labels) r.push_back(std::to_string((*labels)[i] + 1));
    for (Eigen::Index c = 1; c < d.z.cols(); ++c) r.push_back(num(d.z(static_cast<Eigen::Index>(i), c)));
    w.row(r);
  }
}

struct PlotOptions {
  int grid = 100;          // cells per axis of the density grid
  int curve_points = 360;  // points per marginal curve
  int circular_bins = 16;
  int axial_bins = 8;
};

/// contours.csv, marginals.csv and rose.csv in `dir`. Component weights are the
/// estimated class proportions p_j = Σ_i û_ij / n.
inline void export_plot_data(const std::string& dir, const MixtureModel& model, const Dataset& data,
                             const Eigen::MatrixXd& responsibilities, const PlotOptions& opt = {}) {
  model.validate();
  if (opt.grid < 2 || opt.curve_points < 2 || opt.circular_bins < 1 || opt.axial_bins < 1) {
    throw DomainError("plot: grid and bin counts must be positive");
  }
  const int J = model.J();
  const auto p = class_proportions(responsibilities);
  std::vector<Component> comps;
  for (const auto& c : model.components) comps.emplace_back(c);

  {
    CsvWriter w(dir + "/contours.csv");
    std::vector<std::string> head{"x", "y"};
    for (int j = 1; j <= J; ++j) head.push_back("density" + std::to_string(j));
    head.insert(head.end(), {"mixture", "log_mixture"});
    w.row(head);
    const double hx = kTwoPi / opt.grid, hy = kPi / opt.grid;
    for (int a = 0; a < opt.grid; ++a) {
      const double x = (a + 0.5) * hx;
      for (int b = 0; b < opt.grid; ++b) {
        const double y = (b + 0.5) * hy;
        std::vector<std::string> r{num(x), num(y)};
        double mix = 0.0;
        for (int j = 0; j < J; ++j) {
          const double d = comps[static_cast<std::size_t>(j)].density(x, y);
          mix += p[static_cast<std::size_t>(j)] * d;
          r.push_back(num(d));
        }
        r.push_back(num(mix));
        r.push_back(num(std::log(mix)));
        w.row(r);
      }
    }
  }
  {
    CsvWriter w(dir + "/marginals.csv");
    w.row({"margin", "angle", "component", "density", "weighted_density"});
    for (int m = 0; m < 2; ++m) {
      const double period = m == 0 ? kTwoPi : kPi;
      for (int k = 0; k < opt.curve_points; ++k) {
        const double t = period * k / opt.curve_points;
        for (int j = 0; j < J; ++j) {
          const auto& c = comps[static_cast<std::size_t>(j)];
          const double d = m == 0 ? c.circular().pdf(t) : c.axial().pdf(t);
          w.row({m == 0 ? "circular" : "axial", num(t), std::to_string(j + 1), num(d),
                 num(p[static_cast<std::size_t>(j)] * d)});
        }
      }
    }
  }
  {
    CsvWriter w(dir + "/rose.csv");
    std::vector<std::string> head{"margin", "bin", "lower", "upper", "count"};
    for (int j = 1; j <= J; ++j) head.push_back("count" + std::to_string(j));
    w.row(head);
    const auto labels = detail::map_classification(responsibilities);
    for (int m = 0; m < 2; ++m) {
      const int bins = m == 0 ? opt.circular_bins : opt.axial_bins;
      const double period = m == 0 ? kTwoPi : kPi;
      std::vector<std::vector<long>> counts(static_cast<std::size_t>(bins), std::vector<long>(static_cast<std::size_t>(J) + 1, 0));
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = m == 0 ? data.x[i] : data.y[i];
        const int b = std::min(bins - 1, static_cast<int>(v / period * bins));
        ++counts[static_cast<std::size_t>(b)][0];
        ++counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(labels[i]) + 1];
      }
      for (int b = 0; b < bins; ++b) {
        std::vector<std::string> r{m == 0 ? "circular" : "axial", std::to_string(b + 1), num(period * b / bins),
                                   num(period * (b + 1) / bins)};
        for (long c : counts[static_cast<std::size_t>(b)]) r.push_back(std::to_string(c));
        w.row(r);
      }
    }
  }
}

}  // namespace circmix::io

#endif  // CIRCMIX_IO_EXPORT_HPP
