#pragma once

// Dense Hermitian spectral kernels for matrices up to 64 x 64.

#include "qcensus/qstate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qcensus {

inline constexpr Eigen::Index kMaxSpectralDim = Eigen::Index{1} << kMaxDenseQubits;
inline constexpr double kHermitianInputTol = 1e-10;
// Negative eigenvalues in [-kClampWindow, 0) are rounding noise and become 0.
inline constexpr double kClampWindow = 1e-12;
// Non-negative eigenvalues below kRelativeFloor * (largest eigenvalue) are
// indistinguishable from zero at double precision and are set to zero before
// any square root; otherwise sqrt(1e-17) noise pollutes results at 1e-8.
inline constexpr double kRelativeFloor = 1e-14;

struct Spectrum {
  std::vector<double> values;  // descending
  double residual = 0.0;       // max |A v - lambda v| when vectors were computed
};

namespace detail {

inline void check_spectral_input(const ComplexMatrix& h, const char* who) {
  if (h.rows() != h.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
  if (h.rows() > kMaxSpectralDim)
    throw std::invalid_argument(std::string(who) + ": dimension above 64");
  if (max_hermitian_defect(h) > kHermitianInputTol)
    throw std::invalid_argument(std::string(who) + ": matrix not Hermitian");
}

inline double max_row_sum_norm(const ComplexMatrix& h) {
  return h.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace detail

inline Spectrum hermitian_eigenvalues(const ComplexMatrix& h, bool with_residual = false) {
  detail::check_spectral_input(h, "hermitian_eigenvalues");
  Spectrum s;
  if (h.rows() == 0) return s;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
      h, with_residual ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eigenvalues: no convergence");
  const Eigen::VectorXd& ev = es.eigenvalues();
  s.values.assign(ev.data(), ev.data() + ev.size());
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  if (with_residual) {
    const ComplexMatrix& v = es.eigenvectors();
    const ComplexMatrix r = h.selfadjointView<Eigen::Lower>() * v - v * ev.asDiagonal();
    s.residual = r.cwiseAbs().maxCoeff();
  }
  return s;
}

/// Clamps a raw eigenvalue list: noise negatives to zero, values below the
/// relative floor to zero. Throws if something is negative beyond `slack`.
inline void clamp_spectrum(Eigen::Ref<Eigen::VectorXd> ev, double slack, const char* who) {
  const double top = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -slack) throw std::invalid_argument(std::string(who) + ": matrix not PSD");
    if (ev(i) < kRelativeFloor * top) ev(i) = 0.0;
  }
}

/// Hermitian PSD square root R with R * R = M.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  detail::check_spectral_input(m, "psd_sqrt");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: no convergence");
  Eigen::VectorXd ev = es.eigenvalues();
  clamp_spectrum(ev, tol::kPsdSlack, "psd_sqrt");
  const ComplexMatrix& v = es.eigenvectors();
  ComplexMatrix r = v * ev.cwiseSqrt().asDiagonal() * v.adjoint();
  // Exact Hermiticity.
  return detail::symmetrize_lower(r.triangularView<Eigen::Lower>().toDenseMatrix());
}

/// Square roots of the eigenvalues of rho * rho~, descending. Computed from
/// the Hermitian matrix sqrt(rho) rho~ sqrt(rho), which shares that spectrum.
inline std::array<double, 4> concurrence_lambdas(const DensityMatrix& rho) {
  detail::check_two_qubit(rho.elements(), "concurrence_lambdas");
  const Eigen::Matrix4cd root = psd_sqrt(rho.elements());
  Eigen::Matrix4cd h = root * flipped_state(rho.elements()) * root;
  for (int i = 0; i < 4; ++i) h(i, i) = h(i, i).real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  Eigen::Vector4d mu = es.eigenvalues();
  clamp_spectrum(mu, kClampWindow, "concurrence_lambdas");
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[static_cast<std::size_t>(i)] = std::sqrt(mu(i));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return lam;
}

/// True iff the smallest eigenvalue of Hermitian `h` is above -slack,
/// decided by attempting a Cholesky factorization of h + slack * I.
inline bool eigenvalues_above(const ComplexMatrix& h, double slack) {
  ComplexMatrix shifted = h;
  shifted.diagonal().array() += slack;
  Eigen::LLT<ComplexMatrix, Eigen::Lower> llt(shifted);
  return llt.info() == Eigen::Success;
}

}  // namespace qcensus
