#include "topicstab/ranking.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace topicstab {

double jaccard_at_depth(std::span<const int> r1, std::span<const int> r2, int d) {
    if (d < 1) throw std::invalid_argument("jaccard_at_depth: depth must be >= 1");
    const std::size_t n1 = std::min(r1.size(), static_cast<std::size_t>(d));
    const std::size_t n2 = std::min(r2.size(), static_cast<std::size_t>(d));
    if (n1 == 0 && n2 == 0) return 0.0;

    std::unordered_set<int> head1(r1.begin(), r1.begin() + n1);
    std::size_t intersection = 0;
    for (std::size_t i = 0; i < n2; ++i)
        if (head1.contains(r2[i])) ++intersection;
    const std::size_t unions = n1 + n2 - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unions);
}

double average_jaccard(std::span<const int> r1, std::span<const int> r2, int t) {
    if (t < 1) throw std::invalid_argument("average_jaccard: t must be >= 1");

    // One pass over depths, growing both heads incrementally and keeping a
    // running intersection count.
    std::unordered_set<int> set1;
    std::unordered_set<int> set2;
    set1.reserve(r1.size());
    set2.reserve(r2.size());
    std::size_t intersection = 0;
    double sum = 0.0;
    for (int d = 1; d <= t; ++d) {
        const std::size_t idx = static_cast<std::size_t>(d) - 1;
        if (idx < r1.size()) {
            set1.insert(r1[idx]);
            if (set2.contains(r1[idx])) ++intersection;
        }
        if (idx < r2.size()) {
            set2.insert(r2[idx]);
            if (set1.contains(r2[idx])) ++intersection;
        }
        const std::size_t unions = set1.size() + set2.size() - intersection;
        if (unions > 0)
            sum += static_cast<double>(intersection) / static_cast<double>(unions);
    }
    return sum / static_cast<double>(t);
}

} // namespace topicstab
