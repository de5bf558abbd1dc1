#include "kfjlt/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "kfjlt/errors.hpp"

namespace kfjlt {

namespace {

// All subsets of [d], largest first, lexicographic within equal size.
std::vector<AxisSet> subsets_by_priority(int d) {
  std::vector<AxisSet> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) out.push_back(AxisSet::from_mask(mask));
  std::sort(out.begin(), out.end(), [](AxisSet a, AxisSet b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return lex_less(a, b);
  });
  return out;
}

}  // namespace

std::size_t saturating_power(std::size_t s, int k) noexcept {
  std::size_t acc = 1;
  for (int i = 0; i < k; ++i) {
    if (s != 0 && acc > std::numeric_limits<std::size_t>::max() / s) {
      return std::numeric_limits<std::size_t>::max();
    }
    acc *= s;
  }
  return acc;
}

std::vector<bool> select_K_mask(const Array& x, AxisSet subset, std::size_t s) {
  const KronDims& dims = x.dims();
  const int d = dims.order();
  if (!subset.subset_of(AxisSet::full(d))) throw InvalidSubsetError("subset exceeds the array order");
  if (s < 1) throw ArgumentError("sparsity parameter s must be at least 1");

  const std::size_t fiber_size = dims.extent(subset);
  const std::size_t fibers = dims.total() / fiber_size;
  const std::size_t keep = std::min(saturating_power(s, subset.size()), fiber_size);
  const auto inner = project_offsets(dims, subset);
  const auto outer = project_offsets(dims, subset.complement(d));

  // offset_of[fiber * fiber_size + inner] = storage offset
  std::vector<std::size_t> offset_of(dims.total());
  for (std::size_t p = 0; p < offset_of.size(); ++p) offset_of[outer[p] * fiber_size + inner[p]] = p;

  const auto values = x.values();
  std::vector<bool> mask(dims.total(), false);
  std::vector<std::size_t> order(fiber_size);
  for (std::size_t f = 0; f < fibers; ++f) {
    const std::size_t* row = offset_of.data() + f * fiber_size;
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto larger = [&](std::size_t a, std::size_t b) {
      const double va = std::abs(values[row[a]]);
      const double vb = std::abs(values[row[b]]);
      if (va != vb) return va > vb;
      return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), larger);
    for (std::size_t k = 0; k < keep; ++k) mask[row[order[k]]] = true;
  }
  return mask;
}

std::vector<FlatIndex> select_K(const Array& x, AxisSet subset, std::size_t s) {
  const auto mask = select_K_mask(x, subset, s);
  std::vector<FlatIndex> out;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (mask[p]) out.push_back(FlatIndex{p + 1});
  }
  return out;
}

SparsifySplit split(const Array& x, std::size_t s) {
  if (s < 1) throw ArgumentError("sparsity parameter s must be at least 1");
  const KronDims& dims = x.dims();
  const int d = dims.order();
  if (d > 20) throw BudgetError("split enumerates 2^d subsets; order " + std::to_string(d) + " is too large");

  const std::size_t count = std::size_t{1} << d;
  std::vector<std::vector<bool>> members(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    members[mask] = select_K_mask(x, AxisSet::from_mask(mask), s);
  }

  SparsifySplit out;
  out.dims = dims;
  out.s = s;
  out.parts.assign(count, Array(dims));
  out.assignment.assign(dims.total(), AxisSet{});
  const auto priority = subsets_by_priority(d);
  const auto values = x.values();
  for (std::size_t p = 0; p < dims.total(); ++p) {
    for (AxisSet candidate : priority) {
      if (members[candidate.mask()][p]) {
        out.assignment[p] = candidate;
        out.parts[candidate.mask()].values()[p] = values[p];
        break;
      }
    }
  }
  return out;
}

bool check_fiber_sparsity(const SparsifySplit& parts) {
  const KronDims& dims = parts.dims;
  const int d = dims.order();
  for (std::size_t mask = 0; mask < parts.parts.size(); ++mask) {
    const AxisSet subset = AxisSet::from_mask(mask);
    const std::size_t bound = saturating_power(parts.s, subset.size());
    const auto outer = project_offsets(dims, subset.complement(d));
    std::vector<std::size_t> nonzeros(dims.total() / dims.extent(subset), 0);
    const auto values = parts.parts[mask].values();
    for (std::size_t p = 0; p < values.size(); ++p) {
      if (values[p] != 0.0 && ++nonzeros[outer[p]] > bound) return false;
    }
  }
  return true;
}

MaxSumReport check_max_sum_inequalities(const Array& x, const SparsifySplit& parts) {
  const KronDims& dims = x.dims();
  if (parts.dims != dims) throw ShapeError("split does not belong to this array");
  const int d = dims.order();
  const std::size_t count = std::size_t{1} << d;
  const auto xs = x.values();
  constexpr double kSlack = 1e-12;

  MaxSumReport report;
  for (std::size_t sm = 0; sm < count; ++sm) {
    const AxisSet S = AxisSet::from_mask(sm);
    const auto part = parts.parts[sm].values();
    for (std::size_t tm = 0; tm < count; ++tm) {
      const AxisSet T = AxisSet::from_mask(tm);
      const double scale = std::pow(static_cast<double>(parts.s), T.size());

      if (S.size() < T.size()) {
        const auto outer = project_offsets(dims, T.complement(d));
        const std::size_t fibers = dims.total() / dims.extent(T);
        std::vector<double> lhs(fibers, 0.0);
        std::vector<double> total(fibers, 0.0);
        for (std::size_t p = 0; p < xs.size(); ++p) {
          lhs[outer[p]] = std::max(lhs[outer[p]], part[p] * part[p]);
          total[outer[p]] += xs[p] * xs[p];
        }
        for (std::size_t k = 0; k < fibers; ++k) {
          ++report.checks;
          const double rhs = total[k] / scale;
          if (lhs[k] > rhs * (1.0 + kSlack)) {
            report.violations.push_back({Inequality::max_entry, S, T, k + 1, lhs[k], rhs});
          }
        }
      }

      if (S.disjoint(T)) {
        const AxisSet rest = (S | T).complement(d);
        const auto outer = project_offsets(dims, rest);
        const auto mid = project_offsets(dims, T);
        const std::size_t fibers = dims.extent(rest);
        const std::size_t width = dims.extent(T);
        std::vector<double> slices(fibers * width, 0.0);
        std::vector<double> total(fibers, 0.0);
        for (std::size_t p = 0; p < xs.size(); ++p) {
          slices[outer[p] * width + mid[p]] += part[p] * part[p];
          total[outer[p]] += xs[p] * xs[p];
        }
        for (std::size_t k = 0; k < fibers; ++k) {
          ++report.checks;
          const double lhs = *std::max_element(slices.begin() + static_cast<std::ptrdiff_t>(k * width),
                                               slices.begin() + static_cast<std::ptrdiff_t>((k + 1) * width));
          const double rhs = total[k] / scale;
          if (lhs > rhs * (1.0 + kSlack)) report.violations.push_back({Inequality::max_fiber_sum, S, T, k + 1, lhs, rhs});
        }
      }
    }
  }
  return report;
}

}  // namespace kfjlt
