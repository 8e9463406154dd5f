#pragma once

// Totally symmetric rank-n tensors on Minkowski space, the polarization
// identity, and reconstruction from timelike diagonal samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "lkms/minkowski.hpp"

namespace lkms {

using MultiIndex = std::vector<int>;  // sorted, entries in {0,1,2,3}

// n! / prod(counts!) : number of distinct permutations of a sorted index.
inline double multi_index_multiplicity(const MultiIndex& idx) {
  int counts[4] = {0, 0, 0, 0};
  for (int mu : idx) counts[mu]++;
  double m = 1.0;
  int k = 0;
  for (int c = 0; c < 4; ++c)
    for (int j = 1; j <= counts[c]; ++j) m *= double(++k) / double(j);
  return m;
}

inline std::vector<MultiIndex> sorted_multi_indices(int rank) {
  std::vector<MultiIndex> out;
  MultiIndex idx(rank, 0);
  while (true) {
    out.push_back(idx);
    int pos = rank - 1;
    while (pos >= 0 && idx[pos] == 3) --pos;
    if (pos < 0) break;
    const int v = idx[pos] + 1;
    for (int j = pos; j < rank; ++j) idx[j] = v;
  }
  if (rank == 0) out = {MultiIndex{}};
  return out;
}

// Coefficients are stored once per sorted multi-index; evaluation sums over
// all 4^n index tuples, so the stored value is the tensor component itself
// (not premultiplied by the permutation count).
class SymmetricTensor {
 public:
  SymmetricTensor() : rank_(0) { coeffs_[MultiIndex{}] = 0.0; }
  explicit SymmetricTensor(int rank) : rank_(rank) {
    if (rank < 0) throw std::domain_error("SymmetricTensor: negative rank");
    for (const auto& idx : sorted_multi_indices(rank)) coeffs_[idx] = 0.0;
  }
  static SymmetricTensor scalar(double v) {
    SymmetricTensor t(0);
    t.coeffs_[MultiIndex{}] = v;
    return t;
  }

  int rank() const { return rank_; }

  double coefficient(MultiIndex idx) const {
    std::sort(idx.begin(), idx.end());
    return coeffs_.at(idx);
  }
  void set_coefficient(MultiIndex idx, double v) {
    std::sort(idx.begin(), idx.end());
    coeffs_.at(idx) = v;
  }

  const std::map<MultiIndex, double>& coefficients() const { return coeffs_; }

  double evaluate(const std::vector<FourVector>& args) const {
    if (int(args.size()) != rank_)
      throw std::domain_error("SymmetricTensor::evaluate: argument count != rank");
    if (rank_ == 0) return coeffs_.at(MultiIndex{});
    double sum = 0.0;
    MultiIndex idx(rank_, 0);
    while (true) {
      double prod = 1.0;
      for (int i = 0; i < rank_; ++i) prod *= args[i][idx[i]];
      MultiIndex s = idx;
      std::sort(s.begin(), s.end());
      sum += coeffs_.at(s) * prod;
      int pos = rank_ - 1;
      while (pos >= 0 && idx[pos] == 3) { idx[pos] = 0; --pos; }
      if (pos < 0) break;
      idx[pos]++;
    }
    return sum;
  }

  double diagonal(const FourVector& v) const {
    return evaluate(std::vector<FourVector>(rank_, v));
  }

  // Frobenius norm over all 4^n components.
  double norm() const {
    double s = 0.0;
    for (const auto& [idx, c] : coeffs_) s += multi_index_multiplicity(idx) * c * c;
    return std::sqrt(s);
  }

  SymmetricTensor operator+(const SymmetricTensor& o) const { return combined(o, 1.0); }
  SymmetricTensor operator-(const SymmetricTensor& o) const { return combined(o, -1.0); }
  SymmetricTensor operator*(double a) const {
    SymmetricTensor r = *this;
    for (auto& [idx, c] : r.coeffs_) c *= a;
    return r;
  }

  double max_coefficient_difference(const SymmetricTensor& o) const {
    if (o.rank_ != rank_) throw std::domain_error("rank mismatch");
    double m = 0.0;
    for (const auto& [idx, c] : coeffs_) m = std::max(m, std::abs(c - o.coeffs_.at(idx)));
    return m;
  }

 private:
  SymmetricTensor combined(const SymmetricTensor& o, double sign) const {
    if (o.rank_ != rank_) throw std::domain_error("rank mismatch");
    SymmetricTensor r = *this;
    for (auto& [idx, c] : r.coeffs_) c += sign * o.coeffs_.at(idx);
    return r;
  }

  int rank_;
  std::map<MultiIndex, double> coeffs_;
};

// Polarization identity (totally symmetric multilinear T, diagonal t~):
//   T(v1,...,vn) = (1/n!) sum_{k=1..n} (-1)^{n-k} sum_{|J|=k} t~(sum_{i in J} vi)
template <typename DiagFn>
double polarize(DiagFn&& diag, const std::vector<FourVector>& args) {
  const int n = int(args.size());
  if (n == 0) return diag(FourVector{});
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  double total = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    FourVector s{};
    int k = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) { s = s + args[i]; ++k; }
    total += ((n - k) % 2 == 0 ? 1.0 : -1.0) * diag(s);
  }
  return total / fact;
}

// Reconstruct the full tensor from its diagonal restriction. The diagonal is
// sampled at integer combinations of the basis vectors, cached by occupation
// counts so expensive diag functions are evaluated once per distinct sum.
inline SymmetricTensor polarization_reconstruct(
    const std::function<double(const FourVector&)>& diag, int rank,
    const std::vector<FourVector>& basis) {
  if (rank > 6) throw std::domain_error("polarization_reconstruct: rank > 6 not supported");
  if (basis.size() != 4) throw std::domain_error("polarization_reconstruct: need 4 basis vectors");
  if (rank == 0) return SymmetricTensor::scalar(diag(FourVector{}));

  std::map<std::array<int, 4>, double> cache;
  auto cached_diag = [&](const std::array<int, 4>& counts) {
    auto it = cache.find(counts);
    if (it != cache.end()) return it->second;
    FourVector s{};
    for (int b = 0; b < 4; ++b) s = s + basis[b] * double(counts[b]);
    const double v = diag(s);
    cache.emplace(counts, v);
    return v;
  };

  SymmetricTensor T(rank);
  double fact = 1.0;
  for (int k = 2; k <= rank; ++k) fact *= k;
  for (const auto& idx : sorted_multi_indices(rank)) {
    double total = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << rank); ++mask) {
      std::array<int, 4> counts{0, 0, 0, 0};
      int k = 0;
      for (int i = 0; i < rank; ++i)
        if (mask & (1u << i)) { counts[idx[i]]++; ++k; }
      total += ((rank - k) % 2 == 0 ? 1.0 : -1.0) * cached_diag(counts);
    }
    T.set_coefficient(idx, total / fact);
  }
  return T;
}

struct DiagonalFit {
  SymmetricTensor tensor;
  double residual = 0.0;
};

// Least-squares realization of the "determined by timelike diagonal values"
// statement: solve for all C(n+3,3) sorted coefficients from samples
// T(e,...,e), with an explicit rank check on the monomial system.
inline DiagonalFit tensor_from_timelike_diagonal(
    const std::vector<std::pair<TimeDirection, double>>& samples, int rank) {
  const auto indices = sorted_multi_indices(rank);
  const int ncoef = int(indices.size());
  const int nrows = int(samples.size());
  if (rank == 0) {
    if (nrows < 1) throw std::domain_error("tensor_from_timelike_diagonal: no samples");
    double mean = 0.0;
    for (const auto& [e, v] : samples) mean += v;
    mean /= nrows;
    double res = 0.0;
    for (const auto& [e, v] : samples) res += (v - mean) * (v - mean);
    return {SymmetricTensor::scalar(mean), std::sqrt(res)};
  }
  if (nrows < ncoef)
    throw std::domain_error("tensor_from_timelike_diagonal: fewer samples than coefficients");

  Eigen::MatrixXd A(nrows, ncoef);
  Eigen::VectorXd b(nrows);
  for (int r = 0; r < nrows; ++r) {
    const FourVector& e = samples[r].first.e;
    for (int c = 0; c < ncoef; ++c) {
      double mono = multi_index_multiplicity(indices[c]);
      for (int mu : indices[c]) mono *= e[mu];
      A(r, c) = mono;
    }
    b(r) = samples[r].second;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(ncoef - 1) < 1e-10 * sv(0))
    throw std::domain_error(
        "tensor_from_timelike_diagonal: rank-deficient sample set (singular value ratio " +
        std::to_string(sv(ncoef - 1) / sv(0)) + ")");
  Eigen::VectorXd x = svd.solve(b);

  SymmetricTensor T(rank);
  for (int c = 0; c < ncoef; ++c) T.set_coefficient(indices[c], x(c));
  return {T, (A * x - b).norm()};
}

}  // namespace lkms
