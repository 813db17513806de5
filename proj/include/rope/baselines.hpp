#pragma once

// Reference estimators used for comparison:
//  - PCA-H: project on the principal component of the whole record, take the
//    angle of the analytic signal (offline).
//  - PCA-T: project on a periodically refreshed principal component of a
//    trailing window, take the angle of the normalized phase portrait (online).

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "rope/error.hpp"
#include "rope/signal_core.hpp"

namespace rope {

struct PrincipalComponent {
  Vector direction;         // unit norm
  bool degenerate = false;  // zero covariance; direction reused
};

/// Leading eigenvector of the sample covariance of `window` (d x w). The sign
/// follows `previous` when given, otherwise the first non-negligible entry is
/// made non-negative.
inline PrincipalComponent principal_component(const Matrix& window, const Vector* previous = nullptr) {
  const Index d = window.rows();
  if (window.cols() < 2) throw Error(ErrorKind::InvalidInput, "principal component needs at least 2 samples");
  if (d == 1) return {Vector::Ones(1), (window.maxCoeff() - window.minCoeff()) == 0.0};

  const Matrix centered = window.colwise() - window.rowwise().mean();
  const Matrix cov = centered * centered.transpose() / static_cast<double>(window.cols() - 1);
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  const double top = solver.eigenvalues()(d - 1);
  if (!(top > 1e-300)) {
    return {previous ? *previous : Vector(Vector::Unit(d, 0)), true};
  }
  Vector u = solver.eigenvectors().col(d - 1).normalized();
  if (previous) {
    if (u.dot(*previous) < 0.0) u = -u;
  } else {
    for (Index r = 0; r < d; ++r) {
      if (std::abs(u(r)) > 1e-12) {
        if (u(r) < 0.0) u = -u;
        break;
      }
    }
  }
  return {u, false};
}

/// x + i H[x] computed in the frequency domain.
inline std::vector<std::complex<double>> analytic_signal(std::span<const double> x) {
  const auto n = x.size();
  if (n < 4) throw Error(ErrorKind::InvalidInput, "analytic signal needs at least 4 samples");
  Eigen::FFT<double> fft;
  std::vector<double> input(x.begin(), x.end());
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, input);
  spectrum.resize(n);

  // Keep DC (and Nyquist for even n), double positive bins, zero negative bins.
  const std::size_t half = n / 2;
  for (std::size_t j = 1; j < n; ++j) {
    if (n % 2 == 0 && j == half) continue;
    spectrum[j] *= (j <= (n - 1) / 2) ? 2.0 : 0.0;
  }
  std::vector<std::complex<double>> out;
  fft.inv(out, spectrum);
  return out;
}

/// Projection of every sample on the record's principal component (identity
/// for one-dimensional signals), mean-centered.
inline std::vector<double> project_on_principal_component(const TimeSeries& series) {
  const Matrix& p = series.samples();
  Eigen::RowVectorXd x;
  if (series.dimension() == 1) {
    x = p.row(0);
  } else {
    const Vector u = principal_component(p).direction;
    x = u.transpose() * p;
  }
  x.array() -= x.mean();
  return {x.data(), x.data() + x.size()};
}

inline PhaseSeries pca_h(const TimeSeries& series) {
  if (series.size() < 4) throw Error(ErrorKind::InvalidInput, "PCA-H needs at least 4 samples");
  const std::vector<double> x = project_on_principal_component(series);
  const auto z = analytic_signal(x);
  PhaseSeries out;
  out.reserve(z.size());
  for (const auto& value : z) out.emplace_back(Phase(std::arg(value)));
  return out;
}

struct PcaTConfig {
  double t_update = 0.1;  // seconds between principal component refreshes
  double t_memory = 2.0;  // trailing window length, seconds

  void validate() const {
    if (!(t_update > 0.0) || !(t_memory > 0.0)) throw Error(ErrorKind::Config, "PCA-T times must be positive");
    if (t_memory < t_update) throw Error(ErrorKind::Config, "PCA-T needs t_memory >= t_update");
  }
};

/// Online PCA-T. Outputs are undefined until a full t_memory window exists, and
/// wherever the window has no spread in position or velocity.
inline PhaseSeries pca_t(const TimeSeries& series, const PcaTConfig& config) {
  config.validate();
  const double ts = series.sampling_time();
  const Index n = series.size();
  const Index window = std::max<Index>(1, std::llround(config.t_memory / ts));
  const Index update = std::max<Index>(1, std::llround(config.t_update / ts));
  const Matrix& p = series.samples();

  PhaseSeries out(static_cast<std::size_t>(n));
  if (window < 2) return out;

  std::optional<Vector> component;
  Vector mean;
  double spread_x = 0.0, spread_v = 0.0;
  bool usable = false;
  for (Index k = window - 1; k < n; ++k) {
    if ((k - (window - 1)) % update == 0) {
      const auto block = p.middleCols(k - window + 1, window);
      const PrincipalComponent pc = principal_component(block, component ? &*component : nullptr);
      component = pc.direction;
      mean = block.rowwise().mean();
      const Eigen::RowVectorXd x = component->transpose() * (block.colwise() - mean);
      const Eigen::RowVectorXd dx = (x.tail(window - 1) - x.head(window - 1)) / ts;
      spread_x = std::sqrt(x.squaredNorm() / static_cast<double>(window));
      spread_v = std::sqrt((dx.array() - dx.mean()).square().sum() / static_cast<double>(window - 1));
      usable = !pc.degenerate && spread_x > 0.0 && spread_v > 0.0;
    }
    if (!usable) continue;
    const double x = component->dot(p.col(k) - mean) / spread_x;
    const double dx = component->dot(p.col(k) - p.col(k - 1)) / ts / spread_v;
    out[static_cast<std::size_t>(k)] = Phase(std::atan2(-dx, x));
  }
  return out;
}

}  // namespace rope
