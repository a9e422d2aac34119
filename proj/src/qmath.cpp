#include "alphasqkd/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace alphasqkd {

namespace {

Eigen::Index dims_product(const std::vector<Eigen::Index>& dims) {
  Eigen::Index prod = 1;
  for (Eigen::Index d : dims) {
    if (d <= 0) throw std::invalid_argument("factor dimensions must be positive");
    prod *= d;
  }
  return prod;
}

double xlog2x(double x) {
  if (x <= 1e-12) return 0.0;
  return x * std::log2(x);
}

}  // namespace

StateVector::StateVector(Vec a, std::vector<Eigen::Index> d)
    : amps(std::move(a)), dims(std::move(d)) {
  if (dims_product(dims) != amps.size())
    throw std::invalid_argument("state vector length does not match factor dims");
}

bool StateVector::is_normalized(double tol) const {
  return std::abs(norm_sq() - 1.0) <= tol;
}

Operator::Operator(Mat m, std::vector<Eigen::Index> d)
    : entries(std::move(m)), dims(std::move(d)) {
  if (entries.rows() != entries.cols())
    throw std::invalid_argument("operator must be square");
  if (dims_product(dims) != entries.rows())
    throw std::invalid_argument("operator dimension does not match factor dims");
}

bool Operator::is_hermitian(double tol) const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void Operator::assert_density(double tol) const {
  if (!is_hermitian(std::max(tol, kHermTol)))
    throw std::invalid_argument("density operator must be Hermitian");
  if (std::abs(trace_real() - 1.0) > tol)
    throw std::invalid_argument("density operator must have unit trace");
  Eigen::SelfAdjointEigenSolver<Mat> solver(entries, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kEigNegFloor)
    throw std::invalid_argument("density operator must be positive semi-definite");
}

StateVector basis_ket(Eigen::Index dim, Eigen::Index k) {
  if (k < 0 || k >= dim) throw std::invalid_argument("basis index out of range");
  Vec v = Vec::Zero(dim);
  v(k) = 1.0;
  return StateVector(std::move(v), {dim});
}

StateVector ket_a(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
  Vec v(2);
  v(0) = alpha;
  v(1) = std::sqrt(1.0 - alpha * alpha);
  return StateVector(std::move(v), {2});
}

StateVector ket_a_bar(double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
  Vec v(2);
  v(0) = std::sqrt(1.0 - alpha * alpha);
  v(1) = -alpha;
  return StateVector(std::move(v), {2});
}

StateVector zero_vector(std::vector<Eigen::Index> dims) {
  Eigen::Index n = dims_product(dims);
  return StateVector(Vec::Zero(n), std::move(dims));
}

Operator identity_op(std::vector<Eigen::Index> dims) {
  Eigen::Index n = dims_product(dims);
  return Operator(Mat::Identity(n, n), std::move(dims));
}

Complex inner(const StateVector& x, const StateVector& y) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("inner product requires equal dimensions");
  return x.amps.dot(y.amps);  // Eigen's dot conjugates the first argument
}

StateVector add(const StateVector& x, const StateVector& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("vector sum requires equal dimensions");
  return StateVector(x.amps + y.amps, x.dims);
}

StateVector scale(Complex c, const StateVector& x) {
  return StateVector(c * x.amps, x.dims);
}

StateVector tensor(const StateVector& x, const StateVector& y) {
  Vec out(x.dim() * y.dim());
  for (Eigen::Index i = 0; i < x.dim(); ++i)
    out.segment(i * y.dim(), y.dim()) = x.amps(i) * y.amps;
  std::vector<Eigen::Index> dims = x.dims;
  dims.insert(dims.end(), y.dims.begin(), y.dims.end());
  return StateVector(std::move(out), std::move(dims));
}

Operator tensor(const Operator& x, const Operator& y) {
  const Eigen::Index nx = x.dim();
  const Eigen::Index ny = y.dim();
  Mat out(nx * ny, nx * ny);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < nx; ++j)
      out.block(i * ny, j * ny, ny, ny) = x.entries(i, j) * y.entries;
  std::vector<Eigen::Index> dims = x.dims;
  dims.insert(dims.end(), y.dims.begin(), y.dims.end());
  return Operator(std::move(out), std::move(dims));
}

Operator outer(const StateVector& v) {
  return Operator(v.amps * v.amps.adjoint(), v.dims);
}

Operator partial_trace(const Operator& rho, const std::vector<int>& keep) {
  const int nfac = static_cast<int>(rho.dims.size());
  std::vector<bool> kept(nfac, false);
  for (int k : keep) {
    if (k < 0 || k >= nfac) throw std::invalid_argument("partial_trace: invalid factor index");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate factor index");
    kept[k] = true;
  }

  std::vector<Eigen::Index> keep_dims, trace_dims;
  std::vector<int> keep_idx, trace_idx;
  for (int i = 0; i < nfac; ++i) {
    if (kept[i]) {
      keep_dims.push_back(rho.dims[i]);
      keep_idx.push_back(i);
    } else {
      trace_dims.push_back(rho.dims[i]);
      trace_idx.push_back(i);
    }
  }

  // Strides of each factor in the flat index (left factor most significant).
  std::vector<Eigen::Index> stride(nfac, 1);
  for (int i = nfac - 2; i >= 0; --i) stride[i] = stride[i + 1] * rho.dims[i + 1];

  const Eigen::Index nk = dims_product(keep_dims);
  const Eigen::Index nt = dims_product(trace_dims);

  auto flat = [&](const std::vector<int>& idx, const std::vector<Eigen::Index>& dims,
                  Eigen::Index code) {
    Eigen::Index off = 0;
    for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
      off += (code % dims[i]) * stride[idx[i]];
      code /= dims[i];
    }
    return off;
  };

  Mat out = Mat::Zero(nk, nk);
  for (Eigen::Index r = 0; r < nk; ++r) {
    const Eigen::Index roff = flat(keep_idx, keep_dims, r);
    for (Eigen::Index c = 0; c < nk; ++c) {
      const Eigen::Index coff = flat(keep_idx, keep_dims, c);
      Complex sum = 0.0;
      for (Eigen::Index t = 0; t < nt; ++t) {
        const Eigen::Index toff = flat(trace_idx, trace_dims, t);
        sum += rho.entries(roff + toff, coff + toff);
      }
      out(r, c) = sum;
    }
  }
  return Operator(std::move(out), std::move(keep_dims));
}

EigResult eig_hermitian(const Operator& m) {
  if (!m.is_hermitian(1e-10))
    throw std::invalid_argument("eig_hermitian requires a Hermitian operator");
  Eigen::SelfAdjointEigenSolver<Mat> solver(m.entries);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double von_neumann_entropy(const Operator& rho) {
  rho.assert_density(1e-9);
  Eigen::SelfAdjointEigenSolver<Mat> solver(rho.entries, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    double ev = solver.eigenvalues()(i);
    if (ev < kEigNegFloor)
      throw std::invalid_argument("density operator has a significantly negative eigenvalue");
    s -= xlog2x(std::max(0.0, ev));
  }
  return s;
}

double conditional_entropy(const Operator& rho, const std::vector<int>& a_factors,
                           const std::vector<int>& e_factors) {
  std::vector<bool> seen(rho.dims.size(), false);
  for (const auto* part : {&a_factors, &e_factors})
    for (int f : *part) {
      if (f < 0 || f >= static_cast<int>(rho.dims.size()))
        throw std::invalid_argument("conditional_entropy: invalid factor index");
      if (seen[f]) throw std::invalid_argument("conditional_entropy: overlapping factor sets");
      seen[f] = true;
    }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw std::invalid_argument("conditional_entropy: factor sets must cover all factors");

  const Operator rho_e = partial_trace(rho, e_factors);
  return von_neumann_entropy(rho) - von_neumann_entropy(rho_e);
}

double shannon_entropy(std::span<const double> probs) {
  double s = 0.0;
  for (double p : probs) {
    if (p > 1.0 + kEntryTol || p < -kEntryTol)
      throw std::invalid_argument("shannon_entropy: entry outside [0,1]");
    s -= xlog2x(std::clamp(p, 0.0, 1.0));
  }
  return s;
}

double binary_entropy(double x) {
  const double probs[2] = {x, 1.0 - x};
  return shannon_entropy(probs);
}

}  // namespace alphasqkd
