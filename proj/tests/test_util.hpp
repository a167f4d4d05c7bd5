// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "prunekit/model.hpp"

namespace prunekit::testutil {

// Naive O(n^2) DFT magnitudes of the zero-padded sequence, one-sided with DC.
inline std::vector<double> naive_dft_magnitude(const std::vector<double>& xs) {
  std::size_t n = 1;
  while (n < xs.size()) n <<= 1;
  std::vector<double> padded(n, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) padded[i] = xs[i];
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(t) /
                           static_cast<double>(n);
      acc += padded[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    mags[k] = std::abs(acc);
  }
  return mags;
}

// Exhaustive best-split CART with exact integer-fraction score comparisons.
// Targets must be integers for exactness. Same split/tie/stop conventions as
// the spec: all features x all midpoints, weighted child SSE, ties keep the
// lowest feature index then lowest threshold, split only on strict
// improvement.
class BruteForceTree {
 public:
  BruteForceTree(const Matrix& rows, const std::vector<double>& y) : rows_(rows), y_(y) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    build(idx);
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  // SSE of a sample set as an exact fraction num/den, den = count:
  // SSE = (n * sum(y^2) - sum(y)^2) / n
  static void sse_fraction(const std::vector<std::size_t>& idx, const std::vector<double>& y,
                           long long& num, long long& den) {
    long long s = 0, s2 = 0;
    for (std::size_t i : idx) {
      const long long v = llround(y[i]);
      s += v;
      s2 += v * v;
    }
    den = static_cast<long long>(idx.size());
    num = den * s2 - s * s;
  }

  int build(const std::vector<std::size_t>& idx) {
    double mean = 0.0;
    for (std::size_t i : idx) mean += y_[i];
    mean /= static_cast<double>(idx.size());

    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, mean});
    if (idx.size() < 2) return node_id;

    long long node_num, node_den;
    sse_fraction(idx, y_, node_num, node_den);

    const std::size_t d = rows_[idx[0]].size();
    int best_feature = -1;
    double best_threshold = 0.0;
    long long best_num = 0, best_den = 1;
    bool have_best = false;

    for (std::size_t f = 0; f < d; ++f) {
      std::vector<double> values;
      for (std::size_t i : idx) values.push_back(rows_[i][f]);
      std::sort(values.begin(), values.end());
      for (std::size_t v = 1; v < values.size(); ++v) {
        if (!(values[v - 1] < values[v])) continue;
        const double threshold = values[v - 1] + 0.5 * (values[v] - values[v - 1]);
        std::vector<std::size_t> left, right;
        for (std::size_t i : idx) {
          (rows_[i][f] <= threshold ? left : right).push_back(i);
        }
        long long ln, ld, rn, rd;
        sse_fraction(left, y_, ln, ld);
        sse_fraction(right, y_, rn, rd);
        // total = ln/ld + rn/rd = (ln*rd + rn*ld) / (ld*rd)
        const long long num = ln * rd + rn * ld;
        const long long den = ld * rd;
        // strictly better than the incumbent? (exact cross-multiplication)
        if (!have_best || num * best_den < best_num * den) {
          have_best = true;
          best_num = num;
          best_den = den;
          best_feature = static_cast<int>(f);
          best_threshold = threshold;
        }
      }
    }

    // split only on strict improvement over the node SSE
    if (!have_best || !(best_num * node_den < node_num * best_den)) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (rows_[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right)
          .push_back(i);
    }
    nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    const int l = build(left);
    nodes_[static_cast<std::size_t>(node_id)].left = l;
    const int r = build(right);
    nodes_[static_cast<std::size_t>(node_id)].right = r;
    return node_id;
  }

  const Matrix& rows_;
  const std::vector<double>& y_;
  std::vector<TreeNode> nodes_;
};

inline bool same_structure(const std::vector<TreeNode>& a, const std::vector<TreeNode>& b,
                           double leaf_tol = 1e-12) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].feature != b[i].feature || a[i].left != b[i].left || a[i].right != b[i].right) {
      return false;
    }
    if (a[i].feature >= 0) {
      if (a[i].threshold != b[i].threshold) return false;
    } else if (std::abs(a[i].value - b[i].value) > leaf_tol) {
      return false;
    }
  }
  return true;
}

}  // namespace prunekit::testutil
