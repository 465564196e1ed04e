#include "bife/core_types.hpp"

#include <charconv>
#include <cmath>

#include "bife/error.hpp"

namespace bife {

namespace {

bool parse_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

std::vector<std::string> default_labels(int n) {
  std::vector<std::string> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = std::to_string(k);
  return out;
}

}  // namespace

bool time_label_less(const std::string& a, const std::string& b) {
  double da = 0.0, db = 0.0;
  if (parse_number(a, da) && parse_number(b, db)) return da < db;
  return a < b;
}

PanelData::PanelData(MatrixXd y, RowMatrix x, std::vector<std::string> unit_ids,
                     std::vector<std::string> time_ids)
    : y_(std::move(y)), x_(std::move(x)), unit_ids_(std::move(unit_ids)), time_ids_(std::move(time_ids)) {
  const Eigen::Index n = y_.rows(), t = y_.cols();
  if (x_.rows() != n * t) {
    throw DimensionError("units", "regressor rows (" + std::to_string(x_.rows()) +
                                      ") != N*T (" + std::to_string(n * t) + ")");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index s = 0; s < t; ++s) {
      const double v = y_(i, s);
      if (v != 0.0 && v != 1.0) {
        throw DataError("response y(" + std::to_string(i) + "," + std::to_string(s) +
                        ") = " + std::to_string(v) + " is not binary");
      }
    }
  }
  if (!x_.allFinite()) throw DataError("regressors contain non-finite values");
  if (unit_ids_.empty()) unit_ids_ = default_labels(static_cast<int>(n));
  if (time_ids_.empty()) time_ids_ = default_labels(static_cast<int>(t));
  if (static_cast<Eigen::Index>(unit_ids_.size()) != n)
    throw DimensionError("units", "unit_ids length disagrees with y rows");
  if (static_cast<Eigen::Index>(time_ids_.size()) != t)
    throw DimensionError("periods", "time_ids length disagrees with y columns");
  for (std::size_t s = 1; s < time_ids_.size(); ++s) {
    if (!time_label_less(time_ids_[s - 1], time_ids_[s]))
      throw DataError("time_ids not strictly increasing at '" + time_ids_[s] + "'");
  }
}

PanelData PanelData::from_slices(MatrixXd y, const std::vector<MatrixXd>& slices,
                                 std::vector<std::string> unit_ids, std::vector<std::string> time_ids) {
  const Eigen::Index n = y.rows(), t = y.cols();
  RowMatrix x(n * t, static_cast<Eigen::Index>(slices.size()));
  for (std::size_t k = 0; k < slices.size(); ++k) {
    if (slices[k].rows() != n) throw DimensionError("units", "regressor slice row count != N");
    if (slices[k].cols() != t) throw DimensionError("periods", "regressor slice column count != T");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index s = 0; s < t; ++s) x(i * t + s, static_cast<Eigen::Index>(k)) = slices[k](i, s);
  }
  return PanelData(std::move(y), std::move(x), std::move(unit_ids), std::move(time_ids));
}

MatrixXd PanelData::regressor_slice(int k) const {
  MatrixXd out(n_units(), n_periods());
  for (int i = 0; i < n_units(); ++i)
    for (int t = 0; t < n_periods(); ++t) out(i, t) = x(i, t)(k);
  return out;
}

PanelData PanelData::subset_units(const std::vector<int>& units) const {
  const int t_n = n_periods();
  MatrixXd y(static_cast<Eigen::Index>(units.size()), t_n);
  RowMatrix x(static_cast<Eigen::Index>(units.size()) * t_n, d_beta());
  std::vector<std::string> ids;
  ids.reserve(units.size());
  for (std::size_t r = 0; r < units.size(); ++r) {
    const int i = units[r];
    if (i < 0 || i >= n_units()) throw DimensionError("units", "unit index out of range");
    y.row(static_cast<Eigen::Index>(r)) = y_.row(i);
    x.middleRows(static_cast<Eigen::Index>(r) * t_n, t_n) = unit_regressors(i);
    ids.push_back(unit_ids_[static_cast<std::size_t>(i)]);
  }
  return PanelData(std::move(y), std::move(x), std::move(ids), time_ids_);
}

PanelData PanelData::subset_periods(const std::vector<int>& periods) const {
  const auto t_new = static_cast<Eigen::Index>(periods.size());
  MatrixXd y(n_units(), t_new);
  RowMatrix xs(n_units() * t_new, d_beta());
  std::vector<std::string> ids;
  ids.reserve(periods.size());
  for (Eigen::Index s = 0; s < t_new; ++s) {
    const int t = periods[static_cast<std::size_t>(s)];
    if (t < 0 || t >= n_periods()) throw DimensionError("periods", "period index out of range");
    ids.push_back(time_ids_[static_cast<std::size_t>(t)]);
  }
  for (int i = 0; i < n_units(); ++i) {
    for (Eigen::Index s = 0; s < t_new; ++s) {
      const int t = periods[static_cast<std::size_t>(s)];
      y(i, s) = y_(i, t);
      xs.row(i * t_new + s) = x(i, t);
    }
  }
  return PanelData(std::move(y), std::move(xs), unit_ids_, std::move(ids));
}

ParameterSet ParameterSet::zeros(int n_units, int n_periods, int d_beta, int d_f) {
  return ParameterSet{MatrixXd::Zero(n_units, d_beta), MatrixXd::Zero(n_units, d_f),
                      MatrixXd::Zero(n_periods, d_f)};
}

VectorXd ParameterSet::theta(int i) const {
  VectorXd th(B.cols() + Gamma.cols());
  th << B.row(i).transpose(), Gamma.row(i).transpose();
  return th;
}

void ParameterSet::set_theta(int i, const VectorXd& theta) {
  B.row(i) = theta.head(B.cols()).transpose();
  Gamma.row(i) = theta.tail(Gamma.cols()).transpose();
}

void ParameterSet::check_shape(const PanelData& data) const {
  if (B.rows() != data.n_units())
    throw DimensionError("units", "B has " + std::to_string(B.rows()) + " rows, panel has N=" +
                                      std::to_string(data.n_units()));
  if (B.cols() != data.d_beta())
    throw DimensionError("regressors", "B has " + std::to_string(B.cols()) +
                                           " columns, panel has d_beta=" + std::to_string(data.d_beta()));
  if (Gamma.rows() != data.n_units())
    throw DimensionError("units", "Gamma has " + std::to_string(Gamma.rows()) + " rows, panel has N=" +
                                      std::to_string(data.n_units()));
  if (F.rows() != data.n_periods())
    throw DimensionError("periods", "F has " + std::to_string(F.rows()) + " rows, panel has T=" +
                                        std::to_string(data.n_periods()));
  if (Gamma.cols() != F.cols())
    throw DimensionError("factors", "Gamma has " + std::to_string(Gamma.cols()) + " columns, F has " +
                                        std::to_string(F.cols()));
}

bool ParameterSet::all_finite() const { return B.allFinite() && Gamma.allFinite() && F.allFinite(); }

bool ParameterSet::is_normalized(double tol) const {
  if (F.cols() == 0) return true;
  const MatrixXd gram = F.transpose() * F / static_cast<double>(F.rows());
  return (gram - MatrixXd::Identity(F.cols(), F.cols())).cwiseAbs().maxCoeff() <= tol;
}

LinearIndex linear_index(const PanelData& data, const ParameterSet& params) {
  params.check_shape(data);
  const int n = data.n_units();
  LinearIndex z = params.Gamma * params.F.transpose();
  if (data.d_beta() > 0) {
    for (int i = 0; i < n; ++i) {
      z.row(i).noalias() += (data.unit_regressors(i) * params.B.row(i).transpose()).transpose();
    }
  }
  return z;
}

}  // namespace bife
