#pragma once

#include "geodtr/types.hpp"

#include <vector>

namespace geodtr {

/// Rows = queries (ground), cols = references (aerial), entry (i, j) the
/// L2 distance; the true reference of query i is reference i.
Mat distance_matrix(const std::vector<Vec>& ground, const std::vector<Vec>& aerial);

/// Fraction of queries whose true reference ranks within the k smallest
/// distances of its row. Ties rank the lower reference index first.
double recall_at_k(const Mat& distances, int k);

/// recall_at_k with k = ceil(pct/100 * reference count), 0 < pct <= 100.
double recall_at_percent(const Mat& distances, double pct);

struct Recalls {
  double r1 = 0, r5 = 0, r10 = 0, r1pct = 0;
};

/// The four standard retrieval metrics; k values above the reference
/// count are clamped to it.
Recalls standard_recalls(const Mat& distances);

}  // namespace geodtr
