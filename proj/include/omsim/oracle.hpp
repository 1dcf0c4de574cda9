#pragma once

#include <Eigen/Dense>

#include "omsim/estimators.hpp"
#include "omsim/integrator.hpp"
#include "omsim/model.hpp"

namespace omsim::oracle {

/// Symmetric second moments of the 16 real state components, ordered as the
/// integrator's flat layout: quadrature pairs of alpha_1, alpha_2, delta_1,
/// delta_2, beta_1, beta_2, a_out_1, a_out_2.
using QuadCovariance = Eigen::Matrix<double, 16, 16>;

struct Options {
  bool include_noise = true;
  bool zero_coupling = false;
};

/// Covariance of the initial state: two-mode squeezed source block, vacuum
/// cavities, thermal mechanics at n_mech_init, zero output block.
QuadCovariance initial_covariance(const ProtocolParams& p);

/// Sampling-free reference: transports the covariance through the linear
/// dynamics, V' = F V + V F^T + Q, with classical RK4 on the same stage
/// grid and gate convention as the trajectory integrator. Q carries the
/// cross-diffusion of the shared cascaded noise, including its direct entry
/// into the output record. Throws std::runtime_error if an intermediate
/// covariance dips below the -1e-10 eigenvalue tolerance.
QuadCovariance propagate_covariance(const ProtocolParams& p,
                                    const PulseSchedule& s,
                                    const Options& opts = {});

/// 4x4 block of the output quadratures (Re A1, Im A1, Re A2, Im A2).
Eigen::Matrix4d output_block(const QuadCovariance& v);

/// 4x4 block of the source quadratures, for decoupled-limit checks.
Eigen::Matrix4d source_block(const QuadCovariance& v);

/// Storage-period decoherence prediction for the entanglement criterion:
///   b exp(-2r) + (1 - b)(1 + 2 n_bath),  b = exp(-2 gamma_m tau_s).
/// Models only the mechanical storage interval, not the transfer windows.
double analytic_delta_ent(double r, double gamma_m, double tau_s, double n_bath);

/// Storage-period EPR-steering prediction with a = cosh 2r,
/// b = exp(-2 gamma_m tau_s), c = 1 + 2 n_bath:
///   (2ab(1-b)c + b^2 + c^2 (1-b)^2) / (ab + (1-b)c).
double analytic_epr(double r, double gamma_m, double tau_s, double n_bath);

struct CovarianceCriteria {
  CriterionResult delta_ent;
  CriterionResult epr_12;
  CriterionResult epr_21;
};

/// Gain/phase-optimized criteria evaluated on exact output moments, through
/// the same optimizer as the sampled estimators.
CovarianceCriteria criterion_from_covariance(const QuadCovariance& v);

/// Quadrature covariance of the two-mode squeezed target at squeezing r.
Eigen::Matrix4d tmsv_covariance(double r);

/// Overlap fidelity of a zero-mean Gaussian output state with the two-mode
/// squeezed target: 1 / (4 sqrt(det(V_psi + V_out))) in the quarter-quantum
/// quadrature convention. Throws std::runtime_error on a singular sum.
double gaussian_fidelity(const Eigen::Matrix4d& v_out, double r);

}  // namespace omsim::oracle
