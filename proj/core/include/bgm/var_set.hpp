#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace bgm {

/// Largest number of variables/nodes supported. Subset enumeration is
/// exhaustive, so both the graph routines and the table size grow as 2^d.
inline constexpr int kMaxVariables = 12;

/// Raised for malformed user input (files, labels, incompatible models).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot proceed (singular systems,
/// non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A subset of variable (node) indices 0..d-1 stored as a bit mask.
///
/// Ordering is the canonical one used for every deterministic listing:
/// by cardinality, then lexicographically on the sorted member indices.
class VarSet {
 public:
  constexpr VarSet() = default;
  constexpr explicit VarSet(std::uint32_t bits) : bits_(bits) {}

  static VarSet of(std::initializer_list<int> members) {
    VarSet s;
    for (int v : members) s = s.with(v);
    return s;
  }
  static constexpr VarSet full(int d) { return VarSet((std::uint32_t{1} << d) - 1); }
  static constexpr VarSet single(int v) { return VarSet(std::uint32_t{1} << v); }

  [[nodiscard]] constexpr std::uint32_t bits() const { return bits_; }
  [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
  [[nodiscard]] constexpr int size() const { return std::popcount(bits_); }
  [[nodiscard]] constexpr bool contains(int v) const { return (bits_ >> v) & 1U; }
  [[nodiscard]] constexpr bool subset_of(VarSet other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  [[nodiscard]] constexpr bool proper_subset_of(VarSet other) const {
    return subset_of(other) && bits_ != other.bits_;
  }
  [[nodiscard]] constexpr bool intersects(VarSet other) const {
    return (bits_ & other.bits_) != 0;
  }
  [[nodiscard]] constexpr VarSet with(int v) const { return VarSet(bits_ | (std::uint32_t{1} << v)); }
  [[nodiscard]] constexpr VarSet without(int v) const { return VarSet(bits_ & ~(std::uint32_t{1} << v)); }
  /// Lowest member index; the set must be nonempty.
  [[nodiscard]] constexpr int first() const { return std::countr_zero(bits_); }

  [[nodiscard]] std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  friend constexpr VarSet operator|(VarSet a, VarSet b) { return VarSet(a.bits_ | b.bits_); }
  friend constexpr VarSet operator&(VarSet a, VarSet b) { return VarSet(a.bits_ & b.bits_); }
  friend constexpr VarSet operator-(VarSet a, VarSet b) { return VarSet(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(VarSet a, VarSet b) = default;

  friend constexpr std::strong_ordering operator<=>(VarSet a, VarSet b) {
    if (auto c = a.size() <=> b.size(); c != 0) return c;
    // Equal cardinality: the first differing element decides, and the set
    // holding the smaller index sorts first.
    const std::uint32_t diff = a.bits_ ^ b.bits_;
    if (diff == 0) return std::strong_ordering::equal;
    const std::uint32_t lowest = diff & (~diff + 1);
    return (a.bits_ & lowest) ? std::strong_ordering::less : std::strong_ordering::greater;
  }

 private:
  std::uint32_t bits_{0};
};

/// All nonempty subsets of `universe`, in canonical order.
std::vector<VarSet> nonempty_subsets(VarSet universe);

/// "134" when every label is one character, "C+F+A" otherwise.
std::string format_set(VarSet s, const std::vector<std::string>& labels);

}  // namespace bgm
