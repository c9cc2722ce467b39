#pragma once

#include <span>

namespace topicstab {

/// Jaccard overlap between the depth-d heads of two ranked lists. A list
/// shorter than d contributes all of its items; two empty heads score 0
/// (no evidence of agreement). Items within each list must be unique.
double jaccard_at_depth(std::span<const int> r1, std::span<const int> r2, int d);

/// Top-weighted agreement of two ranked lists: the mean of jaccard_at_depth
/// over depths 1..t. Early ranks enter every depth's average, so swaps near
/// the top move the score more than swaps near the tail. Symmetric, in
/// [0,1], and 1 exactly when the lists agree as sets at every depth.
double average_jaccard(std::span<const int> r1, std::span<const int> r2, int t);

} // namespace topicstab
