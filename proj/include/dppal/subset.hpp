#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dppal {

// A duplicate-free set of ground-set indices, kept sorted.
class Subset {
 public:
  Subset() = default;
  // Sorts the input; throws InputError on duplicates or negative indices.
  explicit Subset(std::vector<int> indices);
  Subset(std::initializer_list<int> indices);

  std::span<const int> indices() const { return indices_; }
  const std::vector<int>& vector() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(int index) const;

  // Throws InputError unless every index is < ground_size.
  void check_bounds(int ground_size) const;

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  int operator[](std::size_t i) const { return indices_[i]; }

  std::string to_string() const;

  friend bool operator==(const Subset&, const Subset&) = default;
  friend auto operator<=>(const Subset&, const Subset&) = default;

 private:
  std::vector<int> indices_;
};

// Indices of {0..ground_size-1} not in `taken`, ascending.
std::vector<int> complement(const Subset& taken, int ground_size);

}  // namespace dppal
