#include "omsim/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omsim::oracle {

namespace {

using Mat16 = Eigen::Matrix<double, 16, 16>;

constexpr double kSqrt2 = std::numbers::sqrt2;

// drift matrix at one stage, mirroring the trajectory kernel
Mat16 drift_matrix(const StageTable::Coeffs& c, double gamma_m) {
  Mat16 f = Mat16::Zero();
  for (int m = 0; m < 2; ++m) {
    const int a = 2 * m, d = 4 + 2 * m, b = 8 + 2 * m, o = 12 + 2 * m;
    f(a, a) = f(a + 1, a + 1) = -c.kappa;
    f(d, d) = f(d + 1, d + 1) = -1.0;
    f(d, a) = f(d + 1, a + 1) = c.two_sqrt_kappa;
    f(d, b + 1) = c.g;
    f(d + 1, b) = -c.g;
    f(b, b) = f(b + 1, b + 1) = -gamma_m;
    f(b, d + 1) = c.g;
    f(b + 1, d) = -c.g;
    f(o, d) = f(o + 1, d + 1) = c.wu * kSqrt2;
    f(o, a) = f(o + 1, a + 1) = -c.wu * c.sqrt_2kappa;
  }
  return f;
}

// diffusion matrix: the optical draw of mode k feeds alpha_k, delta_k and
// the output record together; mechanics have their own draws
Mat16 diffusion_matrix(const StageTable::Coeffs& c, double mech_amp) {
  Eigen::Matrix<double, 16, 8> bmat = Eigen::Matrix<double, 16, 8>::Zero();
  for (int m = 0; m < 2; ++m) {
    for (int q = 0; q < 2; ++q) {  // quadrature x/y
      const int col = 2 * m + q;
      bmat(2 * m + q, col) = c.sqrt_2kappa;
      bmat(4 + 2 * m + q, col) = -kSqrt2;
      bmat(12 + 2 * m + q, col) = c.wu;
      bmat(8 + 2 * m + q, 4 + col) = mech_amp;
    }
  }
  return 0.25 * (bmat * bmat.transpose());
}

}  // namespace

QuadCovariance initial_covariance(const ProtocolParams& p) {
  p.validate();
  QuadCovariance v = QuadCovariance::Zero();
  v.block<4, 4>(0, 0) = tmsv_covariance(p.squeezing_r);
  for (int i = 4; i < 8; ++i) v(i, i) = 0.25;
  for (int i = 8; i < 12; ++i) v(i, i) = 0.5 * (p.n_mech_init + 0.5);
  return v;
}

QuadCovariance propagate_covariance(const ProtocolParams& p,
                                    const PulseSchedule& s,
                                    const Options& opts) {
  const StageTable table(s, opts.zero_coupling);
  const double mech_amp =
      std::sqrt(2.0 * p.gamma_m * (2.0 * p.n_bath + 1.0));
  const double h = table.dt;

  // coefficient matrices on the stage grid; the readout rows are gated per
  // step exactly as in the trajectory kernel, so the shared boundary stage
  // appears ungated to the step before the window and gated after
  auto matrices = [&](int j, double gate, Mat16& f, Mat16& q) {
    StageTable::Coeffs c = table.stage[static_cast<std::size_t>(j)];
    c.wu *= gate;
    f = drift_matrix(c, p.gamma_m);
    q = opts.include_noise ? diffusion_matrix(c, mech_amp) : Mat16::Zero();
  };

  auto rhs = [](const Mat16& f, const Mat16& q, const Mat16& v) -> Mat16 {
    const Mat16 m = f * v;
    return m + m.transpose() + q;
  };

  QuadCovariance v = initial_covariance(p);
  Eigen::SelfAdjointEigenSolver<Mat16> eig;
  Mat16 f0, q0, fm, qm, f1, q1;
  for (int i = 0; i < s.n_steps; ++i) {
    const double gate = (i >= table.first_read_step) ? 1.0 : 0.0;
    matrices(2 * i, gate, f0, q0);
    matrices(2 * i + 1, gate, fm, qm);
    matrices(2 * i + 2, gate, f1, q1);
    const Mat16 k1 = rhs(f0, q0, v);
    const Mat16 k2 = rhs(fm, qm, v + 0.5 * h * k1);
    const Mat16 k3 = rhs(fm, qm, v + 0.5 * h * k2);
    const Mat16 k4 = rhs(f1, q1, v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);

    eig.compute(v, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double scale = std::max(1.0, eig.eigenvalues().maxCoeff());
    if (lo < -1e-10 * scale)
      throw std::runtime_error("covariance lost positive semidefiniteness");
  }
  return v;
}

Eigen::Matrix4d output_block(const QuadCovariance& v) {
  return v.block<4, 4>(12, 12);
}

Eigen::Matrix4d source_block(const QuadCovariance& v) {
  return v.block<4, 4>(0, 0);
}

double analytic_delta_ent(double r, double gamma_m, double tau_s,
                          double n_bath) {
  if (r < 0.0 || gamma_m < 0.0 || tau_s < 0.0 || n_bath < 0.0)
    throw std::domain_error("analytic_delta_ent: arguments must be >= 0");
  const double b = std::exp(-2.0 * gamma_m * tau_s);
  return b * std::exp(-2.0 * r) + (1.0 - b) * (1.0 + 2.0 * n_bath);
}

double analytic_epr(double r, double gamma_m, double tau_s, double n_bath) {
  if (r < 0.0 || gamma_m < 0.0 || tau_s < 0.0 || n_bath < 0.0)
    throw std::domain_error("analytic_epr: arguments must be >= 0");
  const double a = std::cosh(2.0 * r);
  const double b = std::exp(-2.0 * gamma_m * tau_s);
  const double c = 1.0 + 2.0 * n_bath;
  return (2.0 * a * b * (1.0 - b) * c + b * b + c * c * (1.0 - b) * (1.0 - b)) /
         (a * b + (1.0 - b) * c);
}

CovarianceCriteria criterion_from_covariance(const QuadCovariance& v) {
  const Eigen::Matrix4d out = output_block(v);
  return CovarianceCriteria{
      optimize_criterion(out, CriterionSettings{true, false}),
      optimize_criterion(out, CriterionSettings{false, false}),
      optimize_criterion(out, CriterionSettings{false, true}),
  };
}

Eigen::Matrix4d tmsv_covariance(double r) {
  if (r < 0.0) throw std::domain_error("tmsv_covariance: r must be >= 0");
  const double c = std::cosh(2.0 * r) / 4.0;
  const double s = std::sinh(2.0 * r) / 4.0;
  Eigen::Matrix4d v;
  v << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return v;
}

double gaussian_fidelity(const Eigen::Matrix4d& v_out, double r) {
  const Eigen::Matrix4d sum = tmsv_covariance(r) + v_out;
  const double det = sum.determinant();
  if (!(det > 0.0) || !std::isfinite(det))
    throw std::runtime_error("gaussian_fidelity: singular covariance sum");
  return 1.0 / (4.0 * std::sqrt(det));
}

}  // namespace omsim::oracle
