#include "kfjlt/index_algebra.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "kfjlt/errors.hpp"

namespace kfjlt {

namespace {

void check_label(int axis) {
  if (axis < 1 || axis > 64) {
    throw InvalidIndexError("axis label " + std::to_string(axis) + " outside [1, 64]");
  }
}

}  // namespace

AxisSet AxisSet::of(std::initializer_list<int> axes) {
  return of(std::span<const int>(axes.begin(), axes.size()));
}

AxisSet AxisSet::of(std::span<const int> axes) {
  std::uint64_t bits = 0;
  for (int a : axes) {
    check_label(a);
    bits |= std::uint64_t{1} << (a - 1);
  }
  return AxisSet(bits);
}

AxisSet AxisSet::full(int d) {
  if (d < 0 || d > 64) throw ArgumentError("axis count " + std::to_string(d) + " outside [0, 64]");
  return AxisSet(d == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1);
}

int AxisSet::size() const noexcept { return std::popcount(bits_); }

bool AxisSet::contains(int axis) const noexcept {
  return axis >= 1 && axis <= 64 && ((bits_ >> (axis - 1)) & 1U) != 0;
}

int AxisSet::max_axis() const noexcept { return 64 - std::countl_zero(bits_); }

std::vector<int> AxisSet::axes() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
  return out;
}

AxisSet AxisSet::shifted(int offset) const {
  if (empty()) return *this;
  if (offset < 0 || max_axis() + offset > 64) {
    throw InvalidIndexError("shifted axis set exceeds 64 axes");
  }
  return AxisSet(bits_ << offset);
}

AxisSet AxisSet::complement(int d) const { return full(d) - *this; }

bool lex_less(AxisSet a, AxisSet b) {
  const auto la = a.axes();
  const auto lb = b.axes();
  return std::lexicographical_compare(la.begin(), la.end(), lb.begin(), lb.end());
}

KronDims::KronDims(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw ArgumentError("dimension vector must have at least one axis");
  total_ = 1;
  for (std::size_t n : sizes_) {
    if (n == 0) throw ArgumentError("axis sizes must be positive");
    total_ *= n;
  }
}

KronDims::KronDims(std::initializer_list<std::size_t> sizes)
    : KronDims(std::vector<std::size_t>(sizes)) {}

std::size_t KronDims::size(int axis) const {
  if (axis < 1 || axis > order()) {
    throw InvalidIndexError("axis " + std::to_string(axis) + " outside [1, " +
                            std::to_string(order()) + "]");
  }
  return sizes_[static_cast<std::size_t>(axis - 1)];
}

std::size_t KronDims::extent(AxisSet axes) const {
  std::size_t e = 1;
  for (int a : axes.axes()) e *= size(a);
  return e;
}

KronDims KronDims::doubled() const {
  std::vector<std::size_t> twice(sizes_);
  twice.insert(twice.end(), sizes_.begin(), sizes_.end());
  return KronDims(std::move(twice));
}

PartialIndex::PartialIndex(AxisSet axes, std::vector<std::size_t> coords)
    : axes_(axes), coords_(std::move(coords)) {
  if (coords_.size() != static_cast<std::size_t>(axes_.size())) {
    throw InvalidIndexError("partial index has " + std::to_string(coords_.size()) +
                            " coordinates for " + std::to_string(axes_.size()) + " axes");
  }
  for (std::size_t c : coords_) {
    if (c == 0) throw InvalidIndexError("coordinates are 1-based; got 0");
  }
}

PartialIndex PartialIndex::from_pairs(std::initializer_list<std::pair<int, std::size_t>> pairs) {
  std::vector<std::pair<int, std::size_t>> sorted(pairs);
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> labels;
  std::vector<std::size_t> coords;
  for (const auto& [axis, c] : sorted) {
    if (!labels.empty() && labels.back() == axis) {
      throw AxisConflictError("axis " + std::to_string(axis) + " given twice");
    }
    labels.push_back(axis);
    coords.push_back(c);
  }
  return PartialIndex(AxisSet::of(labels), std::move(coords));
}

PartialIndex PartialIndex::full(std::vector<std::size_t> coords) {
  const int d = static_cast<int>(coords.size());
  return PartialIndex(AxisSet::full(d), std::move(coords));
}

std::size_t PartialIndex::at(int axis) const {
  if (!axes_.contains(axis)) {
    throw InvalidIndexError("axis " + std::to_string(axis) + " not in partial index");
  }
  const std::uint64_t below = axes_.mask() & ((std::uint64_t{1} << (axis - 1)) - 1);
  return coords_[static_cast<std::size_t>(std::popcount(below))];
}

FlatIndex linearize(const KronDims& dims, const PartialIndex& idx) {
  if (idx.axes().max_axis() > dims.order()) {
    throw InvalidIndexError("partial index uses axis " + std::to_string(idx.axes().max_axis()) +
                            " but dims have order " + std::to_string(dims.order()));
  }
  std::size_t flat = 0;
  std::size_t stride = 1;
  const auto labels = idx.axes().axes();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const std::size_t n = dims.size(labels[k]);
    const std::size_t c = idx.coords()[k];
    if (c > n) {
      throw InvalidIndexError("coordinate " + std::to_string(c) + " on axis " +
                              std::to_string(labels[k]) + " exceeds " + std::to_string(n));
    }
    flat += (c - 1) * stride;
    stride *= n;
  }
  return FlatIndex{flat + 1};
}

PartialIndex delinearize(const KronDims& dims, AxisSet axes, FlatIndex flat) {
  if (axes.max_axis() > dims.order()) {
    throw InvalidIndexError("axis set exceeds the order of dims");
  }
  const std::size_t range = dims.extent(axes);
  if (flat.value < 1 || flat.value > range) {
    throw InvalidIndexError("flat index " + std::to_string(flat.value) + " outside [1, " +
                            std::to_string(range) + "]");
  }
  std::size_t rest = flat.value - 1;
  std::vector<std::size_t> coords;
  for (int a : axes.axes()) {
    const std::size_t n = dims.size(a);
    coords.push_back(rest % n + 1);
    rest /= n;
  }
  return PartialIndex(axes, std::move(coords));
}

PartialIndex cross(const PartialIndex& a, const PartialIndex& b) {
  if (!a.axes().disjoint(b.axes())) {
    throw AxisConflictError("cross combination requires disjoint axis sets");
  }
  const AxisSet merged = a.axes() | b.axes();
  std::vector<std::size_t> coords;
  coords.reserve(static_cast<std::size_t>(merged.size()));
  for (int l : merged.axes()) coords.push_back(a.axes().contains(l) ? a.at(l) : b.at(l));
  return PartialIndex(merged, std::move(coords));
}

PartialIndex shift_plus(const PartialIndex& a, const PartialIndex& b, int d) {
  if (d < 1) throw ArgumentError("shift_plus requires d >= 1");
  if (!a.axes().subset_of(AxisSet::full(2 * d))) {
    throw InvalidSubsetError("left operand of shift_plus must live on [2d]");
  }
  if (!b.axes().subset_of(AxisSet::full(d))) {
    throw InvalidSubsetError("right operand of shift_plus must live on [d]");
  }
  const PartialIndex moved(b.axes().shifted(d), b.coords());
  if (!a.axes().disjoint(moved.axes())) {
    throw AxisConflictError("shift_plus requires I and J + d to be disjoint");
  }
  return cross(a, moved);
}

PartialIndex combine(const PartialIndex& a, const PartialIndex& b, CombineMode mode, int d) {
  return mode == CombineMode::cross ? cross(a, b) : shift_plus(a, b, d);
}

PartialIndex restrict_to(const PartialIndex& idx, AxisSet subset) {
  if (!subset.subset_of(idx.axes())) {
    throw InvalidSubsetError("restriction target is not a subset of the index axes");
  }
  std::vector<std::size_t> coords;
  for (int l : subset.axes()) coords.push_back(idx.at(l));
  return PartialIndex(subset, std::move(coords));
}

std::vector<std::size_t> project_offsets(const KronDims& dims, AxisSet axes) {
  if (axes.max_axis() > dims.order()) throw InvalidSubsetError("axis set exceeds the order of dims");
  const int d = dims.order();
  std::vector<std::size_t> stride(static_cast<std::size_t>(d), 0);
  std::size_t s = 1;
  for (int a : axes.axes()) {
    stride[static_cast<std::size_t>(a - 1)] = s;
    s *= dims.size(a);
  }
  std::vector<std::size_t> out(dims.total());
  // Odometer over coordinates, first axis fastest.
  std::vector<std::size_t> coord(static_cast<std::size_t>(d), 0);
  std::size_t current = 0;
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = current;
    for (std::size_t l = 0; l < coord.size(); ++l) {
      if (++coord[l] < dims.sizes()[l]) {
        current += stride[l];
        break;
      }
      current -= stride[l] * (dims.sizes()[l] - 1);
      coord[l] = 0;
    }
  }
  return out;
}

Array::Array(KronDims dims) : dims_(std::move(dims)), values_(dims_.total(), 0.0) {}

Array::Array(KronDims dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (values_.size() != dims_.total()) {
    throw ShapeError("array data has " + std::to_string(values_.size()) + " entries, shape needs " +
                     std::to_string(dims_.total()));
  }
}

std::size_t Array::offset(const PartialIndex& full_index) const {
  if (full_index.axes() != AxisSet::full(dims_.order())) {
    throw InvalidIndexError("array access requires a full index");
  }
  return linearize(dims_, full_index).value - 1;
}

double Array::operator[](const PartialIndex& full_index) const { return values_[offset(full_index)]; }

double& Array::operator[](const PartialIndex& full_index) { return values_[offset(full_index)]; }

double Array::norm() const noexcept {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return std::sqrt(acc);
}

std::vector<double> vectorize(const KronDims& dims, const Array& a) {
  if (a.dims() != dims) throw ShapeError("array shape does not match the requested dims");
  return {a.values().begin(), a.values().end()};
}

}  // namespace kfjlt
