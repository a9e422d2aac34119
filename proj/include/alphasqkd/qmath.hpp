#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace alphasqkd {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Shared numerical tolerances.
inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermTol = 1e-12;
inline constexpr double kEigNegFloor = -1e-10;
inline constexpr double kEntryTol = 1e-9;

/// A (possibly sub-normalized) vector over a tensor product of small factors.
/// dims lists the factor dimensions, left factor most significant.
struct StateVector {
  Vec amps;
  std::vector<Eigen::Index> dims;

  StateVector() = default;
  StateVector(Vec a, std::vector<Eigen::Index> d);

  Eigen::Index dim() const { return amps.size(); }
  double norm_sq() const { return amps.squaredNorm(); }
  bool is_normalized(double tol = kNormTol) const;
};

/// Dense square operator over the same factor structure.
struct Operator {
  Mat entries;
  std::vector<Eigen::Index> dims;

  Operator() = default;
  Operator(Mat m, std::vector<Eigen::Index> d);

  Eigen::Index dim() const { return entries.rows(); }
  double trace_real() const { return entries.trace().real(); }
  bool is_hermitian(double tol = kHermTol) const;
  // Hermitian, eigenvalues >= -1e-10, trace within tol of 1.
  void assert_density(double tol = 1e-10) const;
};

StateVector basis_ket(Eigen::Index dim, Eigen::Index k);
/// alpha|0> + sqrt(1-alpha^2)|1> on a qubit.
StateVector ket_a(double alpha);
/// sqrt(1-alpha^2)|0> - alpha|1>, orthogonal to ket_a.
StateVector ket_a_bar(double alpha);
StateVector zero_vector(std::vector<Eigen::Index> dims);
Operator identity_op(std::vector<Eigen::Index> dims);

/// <x|y>, conjugate-linear in the first argument.
Complex inner(const StateVector& x, const StateVector& y);

StateVector add(const StateVector& x, const StateVector& y);
StateVector scale(Complex c, const StateVector& x);

StateVector tensor(const StateVector& x, const StateVector& y);
Operator tensor(const Operator& x, const Operator& y);

/// |v><v|
Operator outer(const StateVector& v);

/// Trace out all factors not listed in `keep` (indices into dims, ascending).
Operator partial_trace(const Operator& rho, const std::vector<int>& keep);

struct EigResult {
  Eigen::VectorXd values;  // ascending
  Mat vectors;             // columns
};
EigResult eig_hermitian(const Operator& m);

/// S(rho) = -tr(rho log2 rho), in bits.
double von_neumann_entropy(const Operator& rho);

/// S(A|E) = S(AE) - S(E); a_factors and e_factors must partition the factor
/// list of rho.
double conditional_entropy(const Operator& rho, const std::vector<int>& a_factors,
                           const std::vector<int>& e_factors);

/// -sum p log2 p with 0 log 0 := 0.  Entries in [-1e-12, 1+1e-9] (clamped).
double shannon_entropy(std::span<const double> probs);
double binary_entropy(double x);

}  // namespace alphasqkd
