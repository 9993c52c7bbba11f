#include "mtrvm/dictionary.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include "mtrvm/errors.hpp"

namespace mtrvm {

BasisSpec BasisSpec::standard() {
  return BasisSpec{{"y", "ydot", "y^2", "ydot^2", "y^3", "ydot^3", "1"}};
}

void BasisSpec::validate() const {
  if (labels.empty()) throw ConfigError("BasisSpec: empty term list");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw ConfigError("BasisSpec: duplicate term labels");
}

void DesignMatrix::validate() const {
  basis.validate();
  if (values.cols() != static_cast<Eigen::Index>(basis.term_count()))
    throw ConfigError("DesignMatrix: column count != basis size");
  if (!values.allFinite())
    throw NumericalError("DesignMatrix: non-finite entries");
}

namespace {

// Elementwise term evaluator keyed by label.
std::function<double(double, double)> term_fn(const std::string& label) {
  if (label == "y") return [](double y, double) { return y; };
  if (label == "ydot") return [](double, double v) { return v; };
  if (label == "y^2") return [](double y, double) { return y * y; };
  if (label == "ydot^2") return [](double, double v) { return v * v; };
  if (label == "y^3") return [](double y, double) { return y * y * y; };
  if (label == "ydot^3") return [](double, double v) { return v * v * v; };
  if (label == "1") return [](double, double) { return 1.0; };
  throw ConfigError("BasisSpec: unknown term label '" + label + "'");
}

}  // namespace

DesignMatrix build_design_matrix(const Dataset& data, const BasisSpec& basis) {
  data.validate();
  basis.validate();

  const auto n = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(basis.term_count());

  DesignMatrix dm;
  dm.basis = basis;
  dm.task_label = data.label;
  dm.values.resize(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto fn = term_fn(basis.labels[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n; ++i)
      dm.values(i, j) = fn(data.y[static_cast<std::size_t>(i)],
                           data.ydot[static_cast<std::size_t>(i)]);
  }
  dm.validate();
  return dm;
}

Eigen::VectorXd true_weight_vector(const OscillatorParams& params,
                                   const BasisSpec& basis) {
  params.validate();
  basis.validate();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(basis.term_count()));
  for (std::size_t j = 0; j < basis.term_count(); ++j) {
    const std::string& lbl = basis.labels[j];
    double v = 0.0;
    if (lbl == "y") v = -params.k1 / params.m;
    else if (lbl == "ydot") v = -params.c / params.m;
    else if (lbl == "y^3") v = -params.k3 / params.m;
    else term_fn(lbl);  // label check only
    w(static_cast<Eigen::Index>(j)) = v;
  }
  return w;
}

void write_design_matrix_csv(const std::string& path, const DesignMatrix& dm) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  for (std::size_t j = 0; j < dm.basis.labels.size(); ++j)
    os << (j ? "," : "") << dm.basis.labels[j];
  os << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < dm.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < dm.values.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", dm.values(i, j));
      os << (j ? "," : "") << buf;
    }
    os << "\n";
  }
}

}  // namespace mtrvm
