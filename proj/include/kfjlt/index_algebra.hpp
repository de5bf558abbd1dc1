#pragma once

// Coordinate layer for order-d arrays.
//
// Axes are labelled 1..d and coordinates take values in [n_l] = {1, ..., n_l}.
// Flat positions are 1-based as well. Linearization orders axes by label and
// lets the lowest-labelled axis vary fastest:
//
//   L_I(i) = sum_{l=1}^{|I|} (i_{j_l} - 1) * prod_{l' < l} n_{j_l'} + 1,  j_1 < ... < j_|I|.
//
// Dense arrays (`Array`) store their entries in exactly this order, so the
// 0-based storage offset of a full index is L(i) - 1.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace kfjlt {

/// Subset of axis labels {1, ..., 64}, stored as a bit mask (bit l-1 for axis l).
class AxisSet {
 public:
  constexpr AxisSet() noexcept = default;

  static AxisSet of(std::initializer_list<int> axes);
  static AxisSet of(std::span<const int> axes);
  static constexpr AxisSet from_mask(std::uint64_t mask) noexcept { return AxisSet(mask); }
  /// {1, ..., d}
  static AxisSet full(int d);

  constexpr std::uint64_t mask() const noexcept { return bits_; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  int size() const noexcept;
  bool contains(int axis) const noexcept;
  /// Largest label, or 0 for the empty set.
  int max_axis() const noexcept;
  /// Labels in ascending order.
  std::vector<int> axes() const;

  constexpr bool subset_of(AxisSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
  constexpr bool disjoint(AxisSet other) const noexcept { return (bits_ & other.bits_) == 0; }
  /// Every label increased by `offset` (the J + d of the shifted combination).
  AxisSet shifted(int offset) const;
  /// [d] \ this
  AxisSet complement(int d) const;

  constexpr AxisSet operator|(AxisSet o) const noexcept { return AxisSet(bits_ | o.bits_); }
  constexpr AxisSet operator&(AxisSet o) const noexcept { return AxisSet(bits_ & o.bits_); }
  constexpr AxisSet operator-(AxisSet o) const noexcept { return AxisSet(bits_ & ~o.bits_); }
  friend constexpr bool operator==(AxisSet, AxisSet) noexcept = default;

 private:
  constexpr explicit AxisSet(std::uint64_t bits) noexcept : bits_(bits) {}
  std::uint64_t bits_ = 0;
};

/// Lexicographic order on the ascending label lists ({1,2} < {1,3} < {2} < {2,3}).
bool lex_less(AxisSet a, AxisSet b);

/// Dimension vector n = (n_1, ..., n_d) with total N = prod n_l.
class KronDims {
 public:
  KronDims() = default;
  /// Throws ArgumentError if `sizes` is empty or contains a zero.
  explicit KronDims(std::vector<std::size_t> sizes);
  KronDims(std::initializer_list<std::size_t> sizes);

  int order() const noexcept { return static_cast<int>(sizes_.size()); }
  std::size_t total() const noexcept { return total_; }
  /// Size of axis `axis` (1-based label).
  std::size_t size(int axis) const;
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  /// prod_{l in axes} n_l (1 for the empty set).
  std::size_t extent(AxisSet axes) const;
  /// n^{x2} = (n_1, ..., n_d, n_1, ..., n_d)
  KronDims doubled() const;

  friend bool operator==(const KronDims&, const KronDims&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::size_t total_ = 0;
};

/// A partial index: coordinates on a subset of axes. Coordinates are stored in
/// ascending axis order. Equality is structural.
class PartialIndex {
 public:
  /// The unique index on the empty axis set.
  PartialIndex() = default;
  /// `coords[k]` is the coordinate of the k-th smallest axis in `axes`.
  /// Throws InvalidIndexError on a size mismatch or a zero coordinate.
  PartialIndex(AxisSet axes, std::vector<std::size_t> coords);
  /// From (axis, coordinate) pairs in any order.
  static PartialIndex from_pairs(std::initializer_list<std::pair<int, std::size_t>> pairs);
  /// A full index on axes {1, ..., coords.size()}.
  static PartialIndex full(std::vector<std::size_t> coords);

  AxisSet axes() const noexcept { return axes_; }
  const std::vector<std::size_t>& coords() const noexcept { return coords_; }
  /// Coordinate on `axis`. Throws InvalidIndexError if the axis is not present.
  std::size_t at(int axis) const;

  friend bool operator==(const PartialIndex&, const PartialIndex&) = default;

 private:
  AxisSet axes_;
  std::vector<std::size_t> coords_;
};

struct FlatIndex {
  std::size_t value = 1;
  friend auto operator<=>(const FlatIndex&, const FlatIndex&) = default;
};

/// L^n_I(idx). Throws InvalidIndexError for coordinates out of range or axes beyond d.
FlatIndex linearize(const KronDims& dims, const PartialIndex& idx);

/// Inverse of linearize on the axis subset `axes`.
PartialIndex delinearize(const KronDims& dims, AxisSet axes, FlatIndex flat);

enum class CombineMode { cross, shift_plus };

/// i x. j: merged index on I u J. Throws AxisConflictError if I and J intersect.
PartialIndex cross(const PartialIndex& a, const PartialIndex& b);

/// i +. j: b's axes are shifted by d. Requires a's axes in [2d], b's in [d] and
/// a's axes disjoint from J + d.
PartialIndex shift_plus(const PartialIndex& a, const PartialIndex& b, int d);

PartialIndex combine(const PartialIndex& a, const PartialIndex& b, CombineMode mode, int d = 0);

/// j_I. Throws InvalidSubsetError unless I is contained in the axes of idx.
PartialIndex restrict_to(const PartialIndex& idx, AxisSet subset);

/// For every 0-based storage offset p of an array shaped `dims`, the 0-based
/// linearized position of p's coordinates restricted to `axes`, i.e. L_axes(i_axes) - 1.
std::vector<std::size_t> project_offsets(const KronDims& dims, AxisSet axes);

/// Dense order-d array stored in linearization order.
class Array {
 public:
  Array() = default;
  explicit Array(KronDims dims);
  /// `values` is the vectorization; throws ShapeError if its length is not N.
  Array(KronDims dims, std::vector<double> values);

  const KronDims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](const PartialIndex& full_index) const;
  double& operator[](const PartialIndex& full_index);

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double norm() const noexcept;

  friend bool operator==(const Array&, const Array&) = default;

 private:
  std::size_t offset(const PartialIndex& full_index) const;
  KronDims dims_;
  std::vector<double> values_;
};

/// vec(a): (vec a)_{L(j)} = a_j. Throws ShapeError if a's shape differs from dims.
std::vector<double> vectorize(const KronDims& dims, const Array& a);

}  // namespace kfjlt
