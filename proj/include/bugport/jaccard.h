#ifndef BUGPORT_JACCARD_H_
#define BUGPORT_JACCARD_H_

#include <cstddef>
#include <set>

namespace bugport {

// |a ∩ b| / |a ∪ b| over sorted sets. Two empty sets score 0.0: they carry
// no similarity evidence.
template <typename T, typename Cmp>
double Jaccard(const std::set<T, Cmp>& a, const std::set<T, Cmp>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  Cmp less = a.key_comp();
  while (ia != a.end() && ib != b.end()) {
    if (less(*ia, *ib)) {
      ++ia;
    } else if (less(*ib, *ia)) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t total = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(total);
}

}  // namespace bugport

#endif  // BUGPORT_JACCARD_H_
