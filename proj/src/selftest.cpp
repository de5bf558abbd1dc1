#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "kfjlt/harness.hpp"
#include "kfjlt/index_algebra.hpp"
#include "kfjlt/lower_bound.hpp"
#include "kfjlt/random.hpp"
#include "kfjlt/transforms.hpp"

namespace kfjlt {

namespace {

bool index_bijection() {
  const KronDims dims{2, 3, 4, 2};
  for (std::uint64_t mask = 0; mask < 16; ++mask) {
    const AxisSet axes = AxisSet::from_mask(mask);
    const std::size_t extent = dims.extent(axes);
    std::vector<bool> hit(extent, false);
    for (std::size_t f = 1; f <= extent; ++f) {
      const PartialIndex idx = delinearize(dims, axes, FlatIndex{f});
      const FlatIndex back = linearize(dims, idx);
      if (back.value != f || hit[f - 1]) return false;
      hit[f - 1] = true;
    }
  }
  return true;
}

bool hadamard_orthogonality() {
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    const Eigen::MatrixXd h = hadamard_matrix(n);
    const Eigen::MatrixXd e = h.transpose() * h - Eigen::MatrixXd::Identity(h.rows(), h.cols());
    if (e.cwiseAbs().maxCoeff() > 1e-12) return false;
  }
  return true;
}

bool fwht_involution() {
  Rng rng(0x5E1F);
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    const std::vector<double> back = fwht(fwht(x));
    double err = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, std::abs(back[k] - x[k]));
      norm = std::max(norm, std::abs(x[k]));
    }
    if (err > 1e-12 * norm) return false;
  }
  return true;
}

bool kron_fwht_matches_flat() {
  Rng rng(0xF1A7);
  const KronDims dims{4, 8, 2};
  std::vector<double> x(dims.total());
  for (double& v : x) v = rng.normal();
  std::vector<double> axiswise = x;
  kron_fwht_inplace(axiswise, dims);
  const std::vector<double> flat = fwht(x);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::abs(axiswise[k] - flat[k]) > 1e-12) return false;
  }
  return true;
}

bool subspace_duality() {
  for (int n = 0; n <= 5; ++n) {
    for (int r = 0; r <= n; ++r) {
      const auto all = enumerate_subspaces(n, r);
      if (all.size() != gaussian_binomial2(n, r)) return false;
      for (const auto& v : all) {
        const Gf2Subspace perp = orthogonal_complement(v);
        if (perp.dim() != n - r || orthogonal_complement(perp) != v) return false;
        const std::vector<double> lhs = fwht(indicator(v));
        const std::vector<double> rhs = indicator(perp);
        for (std::size_t k = 0; k < lhs.size(); ++k) {
          if (std::abs(lhs[k] - rhs[k]) > 1e-12) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

int selftest(std::ostream& os) {
  const std::vector<std::pair<std::string, std::function<bool()>>> checks = {
      {"index linearization is a bijection on every axis subset", index_bijection},
      {"materialized Hadamard matrices are orthogonal up to N = 1024", hadamard_orthogonality},
      {"fwht is an involution up to N = 1024", fwht_involution},
      {"axis-wise Kronecker FWHT equals the flat FWHT", kron_fwht_matches_flat},
      {"subspace complements, counts and Fourier indicators for n <= 5", subspace_duality},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      os << "error: " << e.what() << '\n';
    }
    os << (ok ? "PASS " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace kfjlt
