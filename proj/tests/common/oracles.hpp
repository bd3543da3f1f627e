#pragma once

// Independent reference computations used by the unit and acceptance tests.
// They share no code with the library beyond its public data types.

#include <algorithm>
#include <cmath>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "trollguard/targets.hpp"
#include "trollguard/vectorspace.hpp"

namespace oracle {

// Exact non-negative rational with 64-bit parts; enough for datasets of a few dozen rows.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
  }
  friend Rational operator+(Rational a, Rational b) { return make(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend Rational operator-(Rational a, Rational b) { return make(a.num * b.den - b.num * a.den, a.den * b.den); }
  friend Rational operator*(Rational a, Rational b) { return make(a.num * b.num, a.den * b.den); }
  friend Rational operator/(Rational a, Rational b) { return make(a.num * b.den, a.den * b.num); }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// n * gini(node) = (n^2 - sum c_i^2) / n, as a rational.
inline Rational weighted_gini(std::int64_t non, std::int64_t troll) {
  const std::int64_t n = non + troll;
  if (n == 0) return {0, 1};
  return Rational::make(n * n - non * non - troll * troll, n);
}

// Feature importances recomputed from scratch: each sample is routed through
// the tree's splits, node class counts are rebuilt from the routing, and the
// weighted impurity decrease is accumulated in exact arithmetic.
inline std::vector<double> brute_force_importances(const trollguard::DecisionTree& tree,
                                                   std::span<const std::vector<double>> rows,
                                                   std::span<const trollguard::Label> labels) {
  const auto& nodes = tree.nodes();
  std::vector<std::array<std::int64_t, 2>> counts(nodes.size(), {0, 0});
  for (std::size_t s = 0; s < rows.size(); ++s) {
    std::size_t at = 0;
    while (true) {
      counts[at][labels[s] == trollguard::Label::Troll ? 1 : 0]++;
      const auto& node = nodes[at];
      if (node.is_leaf()) break;
      at = rows[s][static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
  }
  std::vector<Rational> imp(tree.n_features(), Rational{0, 1});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.is_leaf()) continue;
    const auto& l = counts[static_cast<std::size_t>(node.left)];
    const auto& r = counts[static_cast<std::size_t>(node.right)];
    const Rational gain = weighted_gini(counts[i][0], counts[i][1]) - weighted_gini(l[0], l[1]) -
                          weighted_gini(r[0], r[1]);
    auto& slot = imp[static_cast<std::size_t>(node.feature)];
    slot = slot + gain;
  }
  Rational total{0, 1};
  for (const auto& v : imp) total = total + v;
  std::vector<double> out(imp.size(), 0.0);
  if (total.num == 0) return out;
  for (std::size_t f = 0; f < imp.size(); ++f) out[f] = (imp[f] / total).value();
  return out;
}

// Visits every multiset of `size` draws from `alphabet` cells (non-decreasing index sequences).
template <typename F>
void for_each_multiset(std::size_t alphabet, std::size_t size, F&& visit) {
  std::vector<std::size_t> pick(size, 0);
  while (true) {
    visit(std::span<const std::size_t>(pick));
    std::size_t i = size;
    while (i > 0 && pick[i - 1] == alphabet - 1) --i;
    if (i == 0) return;
    const std::size_t next = pick[i - 1] + 1;
    for (std::size_t j = i - 1; j < size; ++j) pick[j] = next;
  }
}

struct ImportanceSweep {
  std::size_t datasets = 0;
  std::size_t trees_checked = 0;  // trees with at most 7 nodes
  std::size_t mismatches = 0;
  double worst_error = 0.0;
  double worst_sum_error = 0.0;
};

// Enumerates labelled datasets of 4..6 samples over `features` features whose
// values range over 0..levels-1, trains a tree on each two-class dataset and
// compares its importances with the rational oracle. `train` maps
// (rows, labels) to a tree so the caller picks the trainer.
template <typename Train>
ImportanceSweep sweep_importances(std::size_t features, std::size_t levels, Train&& train,
                                  double tolerance = 1e-12) {
  std::size_t cells = 2;
  for (std::size_t f = 0; f < features; ++f) cells *= levels;
  ImportanceSweep sweep;
  for (std::size_t size = 4; size <= 6; ++size) {
    for_each_multiset(cells, size, [&](std::span<const std::size_t> pick) {
      std::vector<std::vector<double>> rows;
      std::vector<trollguard::Label> labels;
      bool any_troll = false, any_non = false;
      for (std::size_t cell : pick) {
        const bool troll = cell % 2 == 1;
        std::size_t rest = cell / 2;
        std::vector<double> row(features);
        for (std::size_t f = 0; f < features; ++f) {
          row[f] = static_cast<double>(rest % levels);
          rest /= levels;
        }
        rows.push_back(std::move(row));
        labels.push_back(troll ? trollguard::Label::Troll : trollguard::Label::NonTroll);
        (troll ? any_troll : any_non) = true;
      }
      if (!(any_troll && any_non)) return;
      ++sweep.datasets;
      const trollguard::DecisionTree tree = train(rows, labels);
      if (tree.nodes().size() > 7) return;
      ++sweep.trees_checked;
      const auto expected = brute_force_importances(tree, rows, labels);
      const auto actual = trollguard::feature_importances(tree);
      bool ok = actual.size() == expected.size();
      double sum = 0.0;
      for (std::size_t f = 0; ok && f < expected.size(); ++f) {
        const double err = std::fabs(actual[f] - expected[f]);
        sweep.worst_error = std::max(sweep.worst_error, err);
        if (err > tolerance || ((expected[f] == 0.0) != (actual[f] == 0.0))) ok = false;
        sum += actual[f];
      }
      if (tree.nodes().size() > 1) sweep.worst_sum_error = std::max(sweep.worst_sum_error, std::fabs(sum - 1.0));
      if (!ok) ++sweep.mismatches;
    });
  }
  return sweep;
}

// Pearson r straight from the covariance definition, in long double.
inline double direct_pearson(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  const auto n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double dx = x[i] - mx;
    const long double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Two-sided p-values of Pearson r under H0, from a standard statistics package.
struct PTableRow {
  int n;
  double r;
  double p;
};

inline std::vector<PTableRow> reference_p_table() {
  return {{5, 0.1, 0.8728885715695383},   {5, 0.3, 0.6238376647810728},   {5, 0.5, 0.39100221895577053},
          {5, 0.7, 0.1881204043741873},   {5, 0.9, 0.03738607346849863},  {10, 0.1, 0.78342440625},
          {10, 0.3, 0.39969146875000017}, {10, 0.5, 0.14111328125000003}, {10, 0.7, 0.024206343749999998},
          {10, 0.9, 0.00038715624999999926}, {30, 0.1, 0.5990480217807455}, {30, 0.3, 0.10724594805795437},
          {30, 0.5, 0.004899933667068092},   {30, 0.7, 1.6647910069881473e-05},
          {30, 0.9, 1.3166060700263918e-11}};
}

inline double t_from_r(double r, int n) { return r * std::sqrt((n - 2) / (1.0 - r * r)); }

// Smallest distance from s to any segment x + u (n - x), u in [0, 1], over minority pairs.
inline double segment_residual(const trollguard::SparseVector& s, std::span<const trollguard::SparseVector> minority) {
  const auto sd = s.to_dense();
  double best = INFINITY;
  for (const auto& x : minority) {
    const auto xd = x.to_dense();
    for (const auto& n : minority) {
      const auto nd = n.to_dense();
      double dd = 0.0, sx = 0.0;
      for (std::size_t i = 0; i < sd.size(); ++i) {
        dd += (nd[i] - xd[i]) * (nd[i] - xd[i]);
        sx += (sd[i] - xd[i]) * (nd[i] - xd[i]);
      }
      const double u = dd > 0 ? std::clamp(sx / dd, 0.0, 1.0) : 0.0;
      double r = 0.0;
      for (std::size_t i = 0; i < sd.size(); ++i) {
        const double p = xd[i] + u * (nd[i] - xd[i]);
        r += (sd[i] - p) * (sd[i] - p);
      }
      best = std::min(best, std::sqrt(r));
    }
  }
  return best;
}

}  // namespace oracle
