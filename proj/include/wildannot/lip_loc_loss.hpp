#pragma once

#include <vector>

#include <Eigen/Core>

namespace wildannot {

// Row i of `anchors` is paired with row i of `candidates` (its positive).
struct LossBatch {
  Eigen::MatrixXd anchors;
  Eigen::MatrixXd candidates;
  std::vector<Eigen::Vector3d> positions;
  double non_negative_distance = 50.0;

  Eigen::Index size() const { return anchors.rows(); }
  // Throws EmptyBatch (fewer than two rows), ShapeMismatch or InvalidArgument.
  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_anchors;
  Eigen::MatrixXd grad_candidates;
};

// Contrastive cross-entropy in which candidates recorded within
// `non_negative_distance` of the anchor are dropped from the denominator.
// Per anchor: -log(exp(s_ii) / (exp(s_ii) + sum_{j negative} exp(s_ij))) with
// s_ij = a_i . c_j / temperature. The batch loss is the mean over anchors
// and the gradients are the exact partials of that mean.
LossResult lip_loc_loss(const LossBatch& batch, double temperature = 1.0);

// Negative membership: out(i, j) is true when candidate j enters anchor i's
// denominator as a negative.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> negative_mask(const LossBatch& batch);

}  // namespace wildannot
