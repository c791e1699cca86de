#pragma once

// Entanglement and entropy measures on pure states and density matrices.

#include "qcensus/qstate.hpp"
#include "qcensus/spectra.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qcensus {

inline constexpr double kZeroMargin = 1e-9;   // zeta, on lambda1 - lambda2 - lambda3 - lambda4
inline constexpr double kPptSlack = 1e-10;    // epsilon_ppt, absolute
inline constexpr double kTangleClamp = 1e-9;  // tau3 residuals in [-1e-9, 0) become 0

struct PairMeasures {
  double concurrence = 0.0;
  double tangle = 0.0;
  double eof = 0.0;
  double margin = 0.0;  // lambda1 - lambda2 - lambda3 - lambda4, unclamped
  bool is_zero = true;
};

inline double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Entanglement of formation h(1/2 + sqrt(1 - C^2)/2).
inline double eof_from_concurrence(double c) {
  if (c <= 0.0) return 0.0;
  if (c >= 1.0) return 1.0;
  return binary_entropy(0.5 + 0.5 * std::sqrt((1.0 - c) * (1.0 + c)));
}

inline PairMeasures concurrence(const DensityMatrix& rho, double zero_margin = kZeroMargin) {
  const auto lam = concurrence_lambdas(rho);
  PairMeasures p;
  p.margin = lam[0] - lam[1] - lam[2] - lam[3];
  p.concurrence = std::min(std::max(p.margin, 0.0), 1.0);
  p.tangle = p.concurrence * p.concurrence;
  p.eof = eof_from_concurrence(p.concurrence);
  p.is_zero = p.margin <= zero_margin;
  return p;
}

/// 4 det(rho) for a single-qubit density matrix.
inline double one_qubit_tangle(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw std::invalid_argument("one_qubit_tangle: expects a 2x2 matrix");
  return 4.0 * (rho(0, 0).real() * rho(1, 1).real() - std::norm(rho(0, 1)));
}

struct ThreeTangleDecomposition {
  double tau_a = 0.0;   // one-qubit tangle of the focus qubit
  double tau_ab = 0.0;  // focus with the lower-indexed other qubit
  double tau_ac = 0.0;  // focus with the higher-indexed other qubit
  double tau3 = 0.0;
};

inline ThreeTangleDecomposition three_tangle(const PureState& psi, int focus,
                                             double zero_margin = kZeroMargin) {
  if (psi.n_qubits() != 3) throw std::invalid_argument("three_tangle: expects a 3-qubit state");
  if (focus < 0 || focus > 2) throw std::invalid_argument("three_tangle: focus out of range");
  int others[2];
  for (int q = 0, k = 0; q < 3; ++q)
    if (q != focus) others[k++] = q;
  auto pair_set = [focus](int other) {
    return focus < other ? QubitSet{focus, other} : QubitSet{other, focus};
  };
  ThreeTangleDecomposition d;
  d.tau_a = one_qubit_tangle(partial_trace(psi, QubitSet{focus}));
  d.tau_ab = concurrence(partial_trace(psi, pair_set(others[0])), zero_margin).tangle;
  d.tau_ac = concurrence(partial_trace(psi, pair_set(others[1])), zero_margin).tangle;
  d.tau3 = d.tau_a - d.tau_ab - d.tau_ac;
  if (d.tau3 < 0.0 && d.tau3 >= -kTangleClamp) d.tau3 = 0.0;
  return d;
}

namespace detail {

inline void check_transpose_set(const DensityMatrix& rho, const QubitSet& t) {
  if (t.empty()) throw std::invalid_argument("negativity: transpose set is empty");
  if (!t.valid_for(rho.n_qubits()))
    throw std::invalid_argument("negativity: qubit index outside register");
  if (t.size() > rho.n_qubits() / 2)
    throw std::invalid_argument("negativity: transpose set larger than half the register");
}

inline double negativity_from_spectrum(const std::vector<double>& values) {
  double neg = 0.0;
  for (double v : values)
    if (v < 0.0) neg += v;
  return 2.0 * std::abs(neg);
}

// Calls f(subset) for every k-subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_combination(int n, int k, F&& f) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    if (!f(QubitSet(idx))) return;
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace detail

/// 2 |sum of negative eigenvalues of the partial transpose on t|.
inline double negativity(const DensityMatrix& rho, const QubitSet& t) {
  detail::check_transpose_set(rho, t);
  return detail::negativity_from_spectrum(
      hermitian_eigenvalues(partial_transpose(rho, t)).values);
}

/// Partial-transpose summary for one transpose size.
struct TransposeProfile {
  int transpose_size = 0;
  double negativity = 0.0;  // for the representative set {0, ..., size - 1}
  bool ppt = true;          // every transpose set of this size is PSD within slack
};

/// For each size 1..floor(m/2): negativity of the representative transpose
/// set and whether all sets of that size have a PSD partial transpose. When
/// size = m/2 only sets containing qubit 0 are probed, since a set and its
/// complement give identical spectra.
inline std::vector<TransposeProfile> transpose_profile(const DensityMatrix& rho,
                                                       double ppt_slack = kPptSlack) {
  const int m = rho.n_qubits();
  if (m < 2) throw std::invalid_argument("transpose_profile: needs at least 2 qubits");
  std::vector<TransposeProfile> out;
  for (int size = 1; size <= m / 2; ++size) {
    TransposeProfile p;
    p.transpose_size = size;
    const QubitSet rep = QubitSet::leading(size);
    const Spectrum s = hermitian_eigenvalues(partial_transpose(rho, rep));
    p.negativity = detail::negativity_from_spectrum(s.values);
    p.ppt = s.values.back() >= -ppt_slack;
    if (p.ppt) {
      detail::for_each_combination(m, size, [&](const QubitSet& t) {
        if (t == rep) return true;
        if (2 * size == m && !t.contains(0)) return true;
        p.ppt = eigenvalues_above(partial_transpose(rho, t), ppt_slack);
        return p.ppt;
      });
    }
    out.push_back(p);
  }
  return out;
}

/// PPT under every transpose set of up to half the register.
inline bool is_ppt(const DensityMatrix& rho, double ppt_slack = kPptSlack) {
  const int m = rho.n_qubits();
  if (m < 2) throw std::invalid_argument("is_ppt: needs at least 2 qubits");
  bool ok = true;
  for (int size = 1; size <= m / 2 && ok; ++size)
    detail::for_each_combination(m, size, [&](const QubitSet& t) {
      if (2 * size == m && !t.contains(0)) return true;
      ok = eigenvalues_above(partial_transpose(rho, t), ppt_slack);
      return ok;
    });
  return ok;
}

/// Von Neumann entropy -sum lambda log2 lambda in bits. With
/// normalize_per_qubit, divides by min(k, ambient_n - k) so the result is
/// in [0, 1].
inline double entropy(const DensityMatrix& rho, bool normalize_per_qubit = false,
                      int ambient_n = 0) {
  const int k = rho.n_qubits();
  if (normalize_per_qubit && ambient_n <= k)
    throw std::invalid_argument("entropy: ambient register must be larger than the subsystem");
  double s = 0.0;
  for (double v : hermitian_eigenvalues(rho.elements()).values)
    if (v > 0.0) s -= v * std::log2(v);
  if (normalize_per_qubit) s /= std::min(k, ambient_n - k);
  return s;
}

enum class PageMode { exact, approx };

/// Haar-average entropy in bits of a k-qubit subsystem of an N-qubit pure state.
inline double page_entropy(int n, int k, PageMode mode = PageMode::exact) {
  if (n < 2 || n > 24) throw std::invalid_argument("page_entropy: N out of range");
  if (k < 1 || k > n - k) throw std::invalid_argument("page_entropy: need 1 <= k <= N - k");
  if (mode == PageMode::approx)
    return (k * std::numbers::ln2 - std::ldexp(1.0, -(n - 2 * k + 1))) / std::numbers::ln2;
  const std::uint64_t lo = (std::uint64_t{1} << (n - k)) + 1;
  const std::uint64_t hi = std::uint64_t{1} << n;
  // Smallest terms first.
  double sum = 0.0;
  for (std::uint64_t j = hi; j >= lo; --j) sum += 1.0 / static_cast<double>(j);
  sum -= static_cast<double>((std::uint64_t{1} << k) - 1) / std::ldexp(1.0, n - k + 1);
  return sum / std::numbers::ln2;
}

}  // namespace qcensus
