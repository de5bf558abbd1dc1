#include "kfjlt/lower_bound.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "kfjlt/errors.hpp"
#include "kfjlt/random.hpp"
#include "kfjlt/transforms.hpp"

namespace kfjlt {

namespace {

constexpr double kZeroTolerance = 1e-12;

int pivot_of(std::uint32_t row) { return 31 - std::countl_zero(row); }

std::uint32_t word_mask(int n) { return n >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1; }

// Reduced row-echelon form of the row space; drops dependent rows.
std::vector<std::uint32_t> reduce(std::vector<std::uint32_t> rows) {
  std::vector<std::uint32_t> basis;
  for (std::uint32_t row : rows) {
    for (std::uint32_t b : basis) {
      if (row & (std::uint32_t{1} << pivot_of(b))) row ^= b;
    }
    if (row == 0) continue;
    const std::uint32_t bit = std::uint32_t{1} << pivot_of(row);
    for (std::uint32_t& b : basis) {
      if (b & bit) b ^= row;
    }
    basis.push_back(row);
  }
  std::sort(basis.begin(), basis.end(), [](std::uint32_t a, std::uint32_t b) { return pivot_of(a) > pivot_of(b); });
  return basis;
}

int log2_exact(std::size_t n) { return std::countr_zero(n); }

}  // namespace

Gf2Subspace::Gf2Subspace(int n, const std::vector<std::uint32_t>& generators) : n_(n) {
  if (n < 0 || n > kMaxGf2Dimension) {
    throw ArgumentError("ambient dimension " + std::to_string(n) + " outside [0, " +
                        std::to_string(kMaxGf2Dimension) + "]");
  }
  for (std::uint32_t g : generators) {
    if ((g & ~word_mask(n)) != 0) throw ArgumentError("generator has bits beyond the ambient dimension");
  }
  basis_ = reduce(generators);
}

Gf2Subspace Gf2Subspace::full(int n) {
  std::vector<std::uint32_t> unit;
  for (int b = 0; b < n; ++b) unit.push_back(std::uint32_t{1} << b);
  return Gf2Subspace(n, unit);
}

bool Gf2Subspace::contains(std::uint32_t word) const noexcept {
  if ((word & ~word_mask(n_)) != 0) return false;
  for (std::uint32_t b : basis_) {
    if (word & (std::uint32_t{1} << pivot_of(b))) word ^= b;
  }
  return word == 0;
}

std::vector<std::uint32_t> Gf2Subspace::elements() const {
  std::vector<std::uint32_t> out;
  out.reserve(std::size_t{1} << dim());
  for (std::uint32_t code = 0; code < (std::uint32_t{1} << dim()); ++code) {
    std::uint32_t w = 0;
    for (int k = 0; k < dim(); ++k) {
      if (code & (std::uint32_t{1} << k)) w ^= basis_[static_cast<std::size_t>(k)];
    }
    out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Gf2Subspace random_subspace(int n, int r, std::uint64_t seed) {
  if (r < 0 || r > n) throw ArgumentError("subspace dimension must satisfy 0 <= r <= n");
  Rng rng(seed);
  const std::uint32_t mask = word_mask(n);
  for (;;) {
    std::vector<std::uint32_t> rows(static_cast<std::size_t>(r));
    for (auto& row : rows) row = static_cast<std::uint32_t>(rng.next_u64()) & mask;
    Gf2Subspace v(n, rows);
    if (v.dim() == r) return v;
  }
}

std::vector<Gf2Subspace> enumerate_subspaces(int n, int r) {
  if (r < 0 || r > n) throw ArgumentError("subspace dimension must satisfy 0 <= r <= n");
  if (n > kMaxGf2Dimension) throw ArgumentError("ambient dimension too large");
  std::vector<Gf2Subspace> out;
  for (std::uint32_t pivots = 0; pivots < (std::uint32_t{1} << n); ++pivots) {
    if (std::popcount(pivots) != r) continue;
    // Free positions of each row: bits below its pivot that are not pivots.
    std::vector<std::uint32_t> lead;
    std::vector<std::vector<int>> free;
    for (int p = n - 1; p >= 0; --p) {
      if (!(pivots & (std::uint32_t{1} << p))) continue;
      lead.push_back(std::uint32_t{1} << p);
      std::vector<int> f;
      for (int q = 0; q < p; ++q) {
        if (!(pivots & (std::uint32_t{1} << q))) f.push_back(q);
      }
      free.push_back(std::move(f));
    }
    std::size_t total_free = 0;
    for (const auto& f : free) total_free += f.size();
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << total_free); ++code) {
      std::vector<std::uint32_t> rows(lead);
      std::size_t bit = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int q : free[i]) {
          if (code & (std::uint64_t{1} << bit)) rows[i] |= std::uint32_t{1} << q;
          ++bit;
        }
      }
      out.emplace_back(n, rows);
    }
  }
  return out;
}

std::uint64_t gaussian_binomial2(int n, int r) {
  if (r < 0 || r > n) return 0;
  // prod_{i<r} (2^{n-i} - 1) / (2^{i+1} - 1), exact in 128-bit for n <= 24.
  unsigned __int128 num = 1;
  unsigned __int128 den = 1;
  for (int i = 0; i < r; ++i) {
    num *= (static_cast<unsigned __int128>(1) << (n - i)) - 1;
    den *= (static_cast<unsigned __int128>(1) << (i + 1)) - 1;
  }
  return static_cast<std::uint64_t>(num / den);
}

std::vector<double> indicator(const Gf2Subspace& v) {
  std::vector<double> out(std::size_t{1} << v.n(), 0.0);
  const double value = 1.0 / std::sqrt(static_cast<double>(std::size_t{1} << v.dim()));
  for (std::uint32_t w : v.elements()) out[w] = value;
  return out;
}

Gf2Subspace orthogonal_complement(const Gf2Subspace& v) {
  std::uint32_t pivots = 0;
  for (std::uint32_t b : v.basis()) pivots |= std::uint32_t{1} << pivot_of(b);
  std::vector<std::uint32_t> rows;
  for (int f = 0; f < v.n(); ++f) {
    const std::uint32_t fbit = std::uint32_t{1} << f;
    if (pivots & fbit) continue;
    std::uint32_t w = fbit;
    for (std::uint32_t b : v.basis()) {
      if (b & fbit) w |= std::uint32_t{1} << pivot_of(b);
    }
    rows.push_back(w);
  }
  return Gf2Subspace(v.n(), rows);
}

FailureProbability failure_probability_exact(std::size_t s, int d, std::size_t m) {
  if (d < 1) throw DomainError("order d must be at least 1");
  const double sd = std::pow(static_cast<double>(s), d);
  if (!(sd >= 2.0)) throw DomainError("s^d must be at least 2 for the exponential bound");
  FailureProbability out;
  const double md = static_cast<double>(m);
  out.probability = std::exp(md * std::log1p(-1.0 / sd));
  out.lower_bound = std::exp(-2.0 * md / sd);
  return out;
}

std::vector<std::vector<double>> AdversarialSet::base_factors() const {
  std::vector<std::vector<double>> out;
  for (const auto& v : subspaces) out.push_back(indicator(v));
  return out;
}

std::uint64_t AdversarialSet::distinct_size() const noexcept {
  const int d = static_cast<int>(subspaces.size());
  const std::uint64_t bits = static_cast<std::uint64_t>(d) * s() - static_cast<std::uint64_t>(d - 1);
  return bits >= 64 ? std::numeric_limits<std::uint64_t>::max() : std::uint64_t{1} << bits;
}

AdversarialSet make_adversarial_set(const KronDims& dims, int r, std::uint64_t seed) {
  AdversarialSet set;
  set.dims = dims;
  for (int j = 1; j <= dims.order(); ++j) {
    const std::size_t nj = dims.size(j);
    if (!is_power_of_two(nj)) throw ArgumentError("axis size " + std::to_string(nj) + " is not a power of two");
    const int bits = log2_exact(nj);
    if (bits < r) {
      throw ArgumentError("axis " + std::to_string(j) + " has log2 n_j = " + std::to_string(bits) +
                          " < r = " + std::to_string(r));
    }
    set.subspaces.push_back(random_subspace(bits, r, derive_key(seed, static_cast<std::uint64_t>(j))));
  }
  return set;
}

std::vector<std::vector<double>> enumerate_points(const AdversarialSet& set, std::size_t limit) {
  const auto base = set.base_factors();
  const std::size_t d = base.size();
  std::vector<std::vector<std::uint32_t>> support(d);
  for (std::size_t j = 0; j < d; ++j) support[j] = set.subspaces[j].elements();

  // Mixed-radix counter over sign patterns; factor 1 has s free signs, the others s - 1.
  std::vector<std::uint64_t> radix(d);
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t free_signs = support[j].size() - (j == 0 ? 0 : 1);
    radix[j] = free_signs >= 63 ? std::numeric_limits<std::uint64_t>::max() : std::uint64_t{1} << free_signs;
  }
  std::vector<std::uint64_t> digit(d, 0);
  std::vector<std::vector<double>> out;
  while (out.size() < limit) {
    std::vector<std::vector<double>> factors = base;
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t skip = j == 0 ? 0 : 1;
      for (std::size_t k = skip; k < support[j].size(); ++k) {
        if (digit[j] & (std::uint64_t{1} << (k - skip))) factors[j][support[j][k]] *= -1.0;
      }
    }
    out.push_back(kron_materialize(factors));
    std::size_t j = 0;
    while (j < d && ++digit[j] == radix[j]) digit[j++] = 0;
    if (j == d) break;
  }
  return out;
}

EmpiricalFailure failure_probability_empirical(const AdversarialSet& set, std::size_t m,
                                               std::size_t trials, std::uint64_t seed) {
  if (trials < 1000) throw ArgumentError("empirical failure probability needs at least 1000 trials");
  const auto base = set.base_factors();
  EmpiricalFailure out;
  out.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const KfjltOperator op = build_operator(set.dims, m, derive_key(seed, t));
    // Witness x̂ = D_xi x, factor by factor.
    std::vector<std::vector<double>> witness(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) {
      const auto& sign = op.signs().factors[j];
      witness[j].resize(base[j].size());
      for (std::size_t i = 0; i < base[j].size(); ++i) {
        witness[j][i] = sign[i] * base[j][i];
        if (std::abs(witness[j][i]) != base[j][i] || sign[i] * witness[j][i] != base[j][i]) {
          out.membership_ok = false;
        }
      }
    }
    const std::vector<double> y = apply_factored(op, witness);
    const bool zero = std::all_of(y.begin(), y.end(), [](double v) { return std::abs(v) <= kZeroTolerance; });
    if (!zero) continue;
    ++out.failures;
    double norm2 = 0.0;
    for (double v : y) norm2 += v * v;
    ++out.witnesses_checked;
    if (std::abs(std::abs(norm2 - 1.0) - 1.0) > kZeroTolerance) out.witnesses_ok = false;
  }
  out.estimate = static_cast<double>(out.failures) / static_cast<double>(trials);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
  return out;
}

EmpiricalFailure failure_probability_empirical(const KronDims& dims, int r, std::size_t m,
                                               std::size_t trials, std::uint64_t seed) {
  const AdversarialSet set = make_adversarial_set(dims, r, derive_key(seed, 0xADu));
  return failure_probability_empirical(set, m, trials, derive_key(seed, 0x0Eu));
}

}  // namespace kfjlt
