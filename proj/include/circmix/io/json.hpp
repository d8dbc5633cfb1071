#ifndef CIRCMIX_IO_JSON_HPP
#define CIRCMIX_IO_JSON_HPP

// JSON encodings of models, fits, bootstrap results and recovery reports.

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "circmix/bootstrap.hpp"
#include "circmix/errors.hpp"
#include "circmix/mixture.hpp"
#include "circmix/simstudy.hpp"

namespace circmix::io {

using nlohmann::json;

inline json to_json(const MixtureModel& m, const std::vector<std::string>& covariates) {
  json comps = json::array();
  for (const auto& c : m.components) {
    comps.push_back({{"mu_circ", c.circ.mu},
                     {"kappa_circ", c.circ.kappa},
                     {"mu_axial", c.axial.mu},
                     {"kappa_axial", c.axial.kappa},
                     {"rho", c.rho.value()}});
  }
  json beta = json::array();
  for (Eigen::Index j = 0; j < m.coefficients.beta.rows(); ++j) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.coefficients.beta.cols(); ++c) row.push_back(m.coefficients.beta(j, c));
    beta.push_back(row);
  }
  return {{"families", to_string(m.families())},
          {"J", m.J()},
          {"components", comps},
          {"covariates", covariates},
          {"beta", beta}};
}

/// Inverse of to_json; the covariate names are returned through `covariates` when given.
inline MixtureModel model_from_json(const json& j, std::vector<std::string>* covariates = nullptr) {
  try {
    const FamilyPair f = family_pair_from_string(j.at("families").get<std::string>());
    MixtureModel m;
    for (const auto& c : j.at("components")) {
      m.components.push_back({MarginalSpec::make(f.circular, c.at("mu_circ").get<double>(), c.at("kappa_circ").get<double>()),
                              MarginalSpec::make(f.axial, c.at("mu_axial").get<double>(), c.at("kappa_axial").get<double>()),
                              CopulaCorrelation(c.at("rho").get<double>())});
    }
    const auto names = j.at("covariates").get<std::vector<std::string>>();
    const auto& beta = j.at("beta");
    Eigen::MatrixXd b(static_cast<Eigen::Index>(beta.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < beta.size(); ++r) {
      if (beta[r].size() != names.size()) throw DomainError("model: beta row length differs from covariate count");
      for (std::size_t c = 0; c < names.size(); ++c) {
        b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = beta[r][c].get<double>();
      }
    }
    m.coefficients = ConcomitantCoefficients(b);
    m.validate();
    if (covariates) *covariates = names;
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

/// Estimated class weights p_j = Σ_i û_ij / n.
inline std::vector<double> class_proportions(const Eigen::MatrixXd& responsibilities) {
  std::vector<double> p(static_cast<std::size_t>(responsibilities.cols()));
  for (Eigen::Index j = 0; j < responsibilities.cols(); ++j) {
    p[static_cast<std::size_t>(j)] = responsibilities.col(j).sum() / static_cast<double>(responsibilities.rows());
  }
  return p;
}

inline json fit_to_json(const FitResult& f, const std::vector<std::string>& covariates) {
  json signed_locations = json::array();
  for (const auto& c : f.model.components) {
    signed_locations.push_back(
        {{"mu_circ", wrap_signed(c.circ.mu, kTwoPi)}, {"mu_axial", wrap_signed(c.axial.mu, kPi)}});
  }
  return {{"model", to_json(f.model, covariates)},
          {"loglik", f.loglik},
          {"bic", f.bic},
          {"n_params", f.n_params},
          {"n", f.n},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"restarts_used", f.restarts_used},
          {"class_proportions", class_proportions(f.responsibilities)},
          {"locations_signed", signed_locations},
          {"loglik_trace", f.loglik_trace},
          {"diagnostics",
           {{"loglik_decreases", f.loglik_decreases},
            {"ridge_used", f.ridge_used},
            {"failed_starts", f.failed_starts}}}};
}

inline json bootstrap_to_json(const BootstrapResult& r) {
  json rows = json::array();
  for (const auto& iv : r.intervals) {
    rows.push_back({{"parameter", iv.info.name},
                    {"component", iv.info.component},
                    {"covariate", iv.info.covariate},
                    {"estimate", iv.estimate},
                    {"lower", iv.lower},
                    {"upper", iv.upper}});
  }
  return {{"B", r.B},
          {"B_effective", r.B_effective},
          {"level", r.level},
          {"low_success", r.low_success},
          {"failures", r.failures},
          {"alignment", r.alignment},
          {"intervals", rows}};
}

inline json recovery_to_json(const RecoveryReport& r) {
  json params = json::array();
  for (const auto& p : r.parameters) {
    params.push_back({{"parameter", p.info.name},
                      {"component", p.info.component},
                      {"covariate", p.info.covariate},
                      {"truth", p.truth},
                      {"mean", p.mean},
                      {"lower", p.lower},
                      {"upper", p.upper}});
  }
  json reps = json::array();
  for (const auto& o : r.outcomes) {
    json e = {{"replica", o.index}, {"ok", o.ok}};
    if (o.ok) {
      e["accuracy"] = o.accuracy;
      e["loglik"] = o.loglik;
      e["iterations"] = o.iterations;
      e["converged"] = o.converged;
      e["loglik_decreases"] = o.loglik_decreases;
    } else {
      e["error"] = o.error;
    }
    reps.push_back(e);
  }
  return {{"scenario", r.scenario},
          {"families", to_string(r.families)},
          {"J", r.J},
          {"n", r.n},
          {"replicas", r.replicas},
          {"failures", r.failures},
          {"failure_flag", r.failure_flag},
          {"median_accuracy", r.median_accuracy},
          {"mean_accuracy", r.mean_accuracy},
          {"parameters", params},
          {"outcomes", reps}};
}

inline json scenario_to_json(const Scenario& s) {
  json cov = json::array();
  for (const auto& c : s.covariates) {
    if (c.kind == CovariateLaw::Kind::Normal) {
      cov.push_back({{"name", c.name}, {"law", "normal"}, {"mean", c.a}, {"sd", c.b}});
    } else {
      cov.push_back({{"name", c.name}, {"law", "bernoulli"}, {"p", c.a}});
    }
  }
  return {{"name", s.name},
          {"n", s.n},
          {"replicas", s.replicas},
          {"seed", s.seed},
          {"covariate_laws", cov},
          {"model", to_json(s.truth, s.covariate_names())}};
}

inline Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.name = j.value("name", std::string("custom"));
    s.n = j.value("n", std::size_t{600});
    s.replicas = j.value("replicas", 50);
    s.seed = j.value("seed", std::uint64_t{1});
    for (const auto& c : j.at("covariate_laws")) {
      const std::string law = c.at("law").get<std::string>();
      const std::string name = c.value("name", std::string());
      if (law == "normal") {
        s.covariates.push_back(CovariateLaw::normal(c.at("mean").get<double>(), c.at("sd").get<double>(), name));
      } else if (law == "bernoulli") {
        s.covariates.push_back(CovariateLaw::bernoulli(c.at("p").get<double>(), name));
      } else {
        throw DataError("scenario: unknown covariate law '" + law + "'");
      }
    }
    s.truth = model_from_json(j.at("model"));
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed scenario JSON: ") + e.what());
  }
}

}  // namespace circmix::io

#endif  // CIRCMIX_IO_JSON_HPP
