#pragma once

#include <vector>

#include "exsim/math.hpp"

namespace exsim {

// Ridge-stabilized logistic regression fit by IRLS.
class LogisticModel {
 public:
  void fit(const std::vector<std::vector<double>>& x,
           const std::vector<int>& y, double ridge = 1e-6, int max_iter = 100);
  int predict(const std::vector<double>& row) const;

 private:
  std::vector<double> coef_;  // intercept first
  std::vector<double> mean_, scale_;
};

// Bagged CART forest: Gini splits, sqrt(d) candidate features per node,
// unbounded depth.
class RandomForest {
 public:
  explicit RandomForest(int n_trees = 500) : n_trees_(n_trees) {}
  void fit(const std::vector<std::vector<double>>& x,
           const std::vector<int>& y, Rng& rng);
  int predict(const std::vector<double>& row) const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int label = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
  };
  int n_trees_;
  std::vector<Tree> trees_;

  int grow(Tree& tree, const std::vector<std::vector<double>>& x,
           const std::vector<int>& y, std::vector<int>& samples, int lo,
           int hi, int mtry, Rng& rng);
};

}  // namespace exsim
