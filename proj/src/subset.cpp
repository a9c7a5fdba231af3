#include "dppal/subset.hpp"

#include <algorithm>
#include <sstream>

#include "dppal/errors.hpp"

namespace dppal {

Subset::Subset(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw InputError("subset contains duplicate indices");
  }
  if (!indices_.empty() && indices_.front() < 0) {
    throw InputError("subset contains a negative index");
  }
}

Subset::Subset(std::initializer_list<int> indices) : Subset(std::vector<int>(indices)) {}

bool Subset::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

void Subset::check_bounds(int ground_size) const {
  if (!indices_.empty() && indices_.back() >= ground_size) {
    throw InputError("subset index " + std::to_string(indices_.back()) +
                     " out of range for ground set of size " + std::to_string(ground_size));
  }
}

std::string Subset::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) os << ',';
    os << indices_[i];
  }
  os << '}';
  return os.str();
}

std::vector<int> complement(const Subset& taken, int ground_size) {
  std::vector<int> out;
  out.reserve(ground_size - std::min<int>(ground_size, static_cast<int>(taken.size())));
  for (int i = 0; i < ground_size; ++i) {
    if (!taken.contains(i)) out.push_back(i);
  }
  return out;
}

}  // namespace dppal
