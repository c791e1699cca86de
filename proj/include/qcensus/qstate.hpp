#pragma once

// Register index algebra for N-qubit pure states and density matrices.
//
// Basis convention: qubit 0 is the most significant bit of the basis index,
// so for two qubits the ordering is |00>, |01>, |10>, |11>. Qubit q of an
// n-qubit register lives at bit position (n - 1 - q).

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcensus {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr int kMaxQubits = 13;
// Largest subsystem handed to the dense spectral kernels (64 x 64).
inline constexpr int kMaxDenseQubits = 6;

namespace tol {
inline constexpr double kNorm = 1e-12;
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kPsdSlack = 1e-10;
}  // namespace tol

inline int bit_position(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

/// Strictly increasing list of qubit indices.
class QubitSet {
 public:
  QubitSet() = default;
  QubitSet(std::initializer_list<int> members) : QubitSet(std::vector<int>(members)) {}
  explicit QubitSet(std::vector<int> members) : members_(std::move(members)) {
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (members_[i] < 0) throw std::invalid_argument("QubitSet: negative qubit index");
      if (i > 0 && members_[i] <= members_[i - 1])
        throw std::invalid_argument("QubitSet: indices must be strictly increasing");
    }
  }

  /// The first `count` qubits, {0, ..., count - 1}.
  static QubitSet leading(int count) {
    std::vector<int> m(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) m[static_cast<std::size_t>(i)] = i;
    return QubitSet(std::move(m));
  }

  [[nodiscard]] int size() const { return static_cast<int>(members_.size()); }
  [[nodiscard]] bool empty() const { return members_.empty(); }
  [[nodiscard]] int operator[](int i) const { return members_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<int>& members() const { return members_; }
  [[nodiscard]] auto begin() const { return members_.begin(); }
  [[nodiscard]] auto end() const { return members_.end(); }

  [[nodiscard]] bool valid_for(int n_qubits) const {
    return members_.empty() || members_.back() < n_qubits;
  }

  [[nodiscard]] bool contains(int q) const {
    for (int m : members_)
      if (m == q) return true;
    return false;
  }

  /// Basis-index bit mask of the members within an n-qubit register.
  [[nodiscard]] std::uint64_t mask(int n_qubits) const {
    std::uint64_t m = 0;
    for (int q : members_) m |= std::uint64_t{1} << bit_position(n_qubits, q);
    return m;
  }

  [[nodiscard]] QubitSet complement(int n_qubits) const {
    std::vector<int> rest;
    for (int q = 0; q < n_qubits; ++q)
      if (!contains(q)) rest.push_back(q);
    return QubitSet(std::move(rest));
  }

  [[nodiscard]] std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(members_[i]);
    }
    return s + "}";
  }

  friend bool operator==(const QubitSet&, const QubitSet&) = default;
  friend auto operator<=>(const QubitSet&, const QubitSet&) = default;

 private:
  std::vector<int> members_;
};

/// Normalized amplitude vector over the 2^n computational basis.
class PureState {
 public:
  PureState(int n_qubits, ComplexVector amplitudes)
      : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    if (n_qubits_ < 1 || n_qubits_ > kMaxQubits)
      throw std::invalid_argument("PureState: qubit count out of range [1,13]");
    if (amplitudes_.size() != (Eigen::Index{1} << n_qubits_))
      throw std::invalid_argument("PureState: amplitude count must be 2^n");
    if (std::abs(amplitudes_.squaredNorm() - 1.0) > tol::kNorm)
      throw std::invalid_argument("PureState: amplitudes not normalized");
  }

  /// Rescales arbitrary nonzero amplitudes onto the unit sphere.
  static PureState normalized(int n_qubits, ComplexVector amplitudes) {
    const double norm = amplitudes.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("PureState: zero vector");
    amplitudes /= norm;
    return PureState(n_qubits, std::move(amplitudes));
  }

  static PureState basis(int n_qubits, std::uint64_t index) {
    ComplexVector a = ComplexVector::Zero(Eigen::Index{1} << n_qubits);
    if (index >= static_cast<std::uint64_t>(a.size()))
      throw std::invalid_argument("PureState: basis index out of range");
    a(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(n_qubits, std::move(a));
  }

  [[nodiscard]] int n_qubits() const { return n_qubits_; }
  [[nodiscard]] Eigen::Index dim() const { return amplitudes_.size(); }
  [[nodiscard]] const ComplexVector& amplitudes() const { return amplitudes_; }
  [[nodiscard]] Complex operator[](Eigen::Index i) const { return amplitudes_(i); }

 private:
  int n_qubits_;
  ComplexVector amplitudes_;
};

namespace detail {

inline double max_hermitian_defect(const ComplexMatrix& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

// Smallest eigenvalue, used only when validating user-supplied matrices.
inline double min_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline int log2_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return (Eigen::Index{1} << n) == dim ? n : -1;
}

// Basis-index within a sub-register: gathers the bits at `positions`
// (listed most significant first) out of `index`.
inline std::uint64_t gather_bits(std::uint64_t index, std::span<const int> positions) {
  std::uint64_t r = 0;
  for (int p : positions) r = (r << 1) | ((index >> p) & 1u);
  return r;
}

inline std::vector<int> positions_of(const QubitSet& set, int n_qubits) {
  std::vector<int> pos;
  pos.reserve(static_cast<std::size_t>(set.size()));
  for (int q : set) pos.push_back(bit_position(n_qubits, q));
  return pos;
}

}  // namespace detail

/// Hermitian, unit-trace, positive semidefinite matrix on n qubits.
class DensityMatrix {
 public:
  /// Validates every invariant, including PSD via a full eigensolve.
  explicit DensityMatrix(ComplexMatrix elements) : elements_(std::move(elements)) {
    if (elements_.rows() != elements_.cols())
      throw std::invalid_argument("DensityMatrix: matrix not square");
    n_qubits_ = detail::log2_dim(elements_.rows());
    if (n_qubits_ < 0 || n_qubits_ > kMaxQubits)
      throw std::invalid_argument("DensityMatrix: dimension must be 2^n with n <= 13");
    if (detail::max_hermitian_defect(elements_) > tol::kHermitian)
      throw std::invalid_argument("DensityMatrix: matrix not Hermitian");
    if (std::abs(elements_.trace() - Complex(1.0)) > tol::kTrace)
      throw std::invalid_argument("DensityMatrix: trace differs from 1");
    if (detail::min_eigenvalue(elements_) < -tol::kPsdSlack)
      throw std::invalid_argument("DensityMatrix: matrix not positive semidefinite");
  }

  /// Wraps a matrix known to satisfy the invariants by construction
  /// (outputs of pure_to_density and partial_trace). No checks.
  static DensityMatrix trusted(ComplexMatrix elements) {
    DensityMatrix d;
    d.n_qubits_ = detail::log2_dim(elements.rows());
    d.elements_ = std::move(elements);
    return d;
  }

  [[nodiscard]] int n_qubits() const { return n_qubits_; }
  [[nodiscard]] Eigen::Index dim() const { return elements_.rows(); }
  [[nodiscard]] const ComplexMatrix& elements() const { return elements_; }
  [[nodiscard]] Complex operator()(Eigen::Index i, Eigen::Index j) const { return elements_(i, j); }

  [[nodiscard]] double purity() const {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    return elements_.squaredNorm();
  }

 private:
  DensityMatrix() = default;
  int n_qubits_ = 0;
  ComplexMatrix elements_;
};

inline DensityMatrix pure_to_density(const PureState& psi) {
  const ComplexVector& a = psi.amplitudes();
  ComplexMatrix rho = a * a.adjoint();
  for (Eigen::Index i = 0; i < rho.rows(); ++i) rho(i, i) = std::norm(a(i));
  return DensityMatrix::trusted(std::move(rho));
}

namespace detail {

inline void check_keep(const QubitSet& keep, int n_qubits) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  if (!keep.valid_for(n_qubits))
    throw std::invalid_argument("partial_trace: qubit index outside register");
  if (keep.size() >= n_qubits)
    throw std::invalid_argument("partial_trace: keep set must be a proper subset");
}

// Hermitian fill from a lower triangle with an exactly real diagonal.
inline ComplexMatrix symmetrize_lower(const ComplexMatrix& lower) {
  ComplexMatrix full = lower.selfadjointView<Eigen::Lower>();
  for (Eigen::Index i = 0; i < full.rows(); ++i) full(i, i) = full(i, i).real();
  return full;
}

}  // namespace detail

/// Amplitudes rearranged as a 2^|keep| x 2^(n-|keep|) matrix with rows
/// indexed by the kept qubits and columns by the traced ones. The reduced
/// density matrix of `keep` is M * M^dagger.
inline ComplexMatrix bipartite_amplitudes(const PureState& psi, const QubitSet& keep) {
  const int n = psi.n_qubits();
  detail::check_keep(keep, n);
  const auto keep_pos = detail::positions_of(keep, n);
  const auto rest_pos = detail::positions_of(keep.complement(n), n);
  ComplexMatrix m(Eigen::Index{1} << keep.size(), Eigen::Index{1} << (n - keep.size()));
  const ComplexVector& a = psi.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    m(static_cast<Eigen::Index>(detail::gather_bits(u, keep_pos)),
      static_cast<Eigen::Index>(detail::gather_bits(u, rest_pos))) = a(i);
  }
  return m;
}

/// Reduced density matrix of `keep`, built directly from the amplitudes.
inline DensityMatrix partial_trace(const PureState& psi, const QubitSet& keep) {
  const ComplexMatrix m = bipartite_amplitudes(psi, keep);
  ComplexMatrix lower = ComplexMatrix::Zero(m.rows(), m.rows());
  lower.selfadjointView<Eigen::Lower>().rankUpdate(m);
  return DensityMatrix::trusted(detail::symmetrize_lower(lower));
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const QubitSet& keep) {
  const int n = rho.n_qubits();
  detail::check_keep(keep, n);
  const auto keep_pos = detail::positions_of(keep, n);
  const auto rest_pos = detail::positions_of(keep.complement(n), n);
  const Eigen::Index kd = Eigen::Index{1} << keep.size();
  const Eigen::Index rd = Eigen::Index{1} << (n - keep.size());

  // full_index(r, c): scatter kept bits r and traced bits c into one index.
  std::vector<Eigen::Index> full_index(static_cast<std::size_t>(kd * rd));
  for (Eigen::Index i = 0; i < rho.dim(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const auto r = static_cast<Eigen::Index>(detail::gather_bits(u, keep_pos));
    const auto c = static_cast<Eigen::Index>(detail::gather_bits(u, rest_pos));
    full_index[static_cast<std::size_t>(r * rd + c)] = i;
  }

  ComplexMatrix out = ComplexMatrix::Zero(kd, kd);
  for (Eigen::Index a = 0; a < kd; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      Complex s = 0.0;
      for (Eigen::Index c = 0; c < rd; ++c)
        s += rho(full_index[static_cast<std::size_t>(a * rd + c)],
                 full_index[static_cast<std::size_t>(b * rd + c)]);
      out(a, b) = s;
    }
  return DensityMatrix::trusted(detail::symmetrize_lower(out));
}

/// Transposes the index blocks of the qubits in `t`:
/// entry ((a_t, a_r), (b_t, b_r)) moves to ((b_t, a_r), (a_t, b_r)).
inline ComplexMatrix partial_transpose(const ComplexMatrix& m, int n_qubits, const QubitSet& t) {
  if (t.empty()) throw std::invalid_argument("partial_transpose: transpose set is empty");
  if (!t.valid_for(n_qubits))
    throw std::invalid_argument("partial_transpose: qubit index outside register");
  if (m.rows() != (Eigen::Index{1} << n_qubits) || m.cols() != m.rows())
    throw std::invalid_argument("partial_transpose: matrix dimension does not match register");
  const std::uint64_t tm = t.mask(n_qubits);
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto ui = static_cast<std::uint64_t>(i);
      const auto uj = static_cast<std::uint64_t>(j);
      const auto ip = static_cast<Eigen::Index>((ui & ~tm) | (uj & tm));
      const auto jp = static_cast<Eigen::Index>((uj & ~tm) | (ui & tm));
      out(ip, jp) = m(i, j);
    }
  return out;
}

inline ComplexMatrix partial_transpose(const DensityMatrix& rho, const QubitSet& t) {
  return partial_transpose(rho.elements(), rho.n_qubits(), t);
}

/// sigma_y (x) sigma_y in the computational basis (real, anti-diagonal).
inline Eigen::Matrix4cd sigma_yy() {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  return yy;
}

namespace detail {
inline void check_two_qubit(const ComplexMatrix& m, const char* who) {
  if (m.rows() != 4 || m.cols() != 4)
    throw std::invalid_argument(std::string(who) + ": expects a two-qubit (4x4) matrix");
}
}  // namespace detail

/// (sigma_y (x) sigma_y) conj(rho) (sigma_y (x) sigma_y).
inline Eigen::Matrix4cd flipped_state(const ComplexMatrix& rho) {
  detail::check_two_qubit(rho, "flipped_state");
  const Eigen::Matrix4cd yy = sigma_yy();
  const Eigen::Matrix4cd r = rho;
  return yy * r.conjugate() * yy;
}

/// rho * rho~, the product whose eigenvalues enter the concurrence.
inline Eigen::Matrix4cd spin_flip(const DensityMatrix& rho) {
  detail::check_two_qubit(rho.elements(), "spin_flip");
  const Eigen::Matrix4cd r = rho.elements();
  return r * flipped_state(rho.elements());
}

}  // namespace qcensus
