#include "wildannot/lip_loc_loss.hpp"

#include <cmath>
#include <string>

#include "wildannot/error.hpp"

namespace wildannot {

void LossBatch::validate() const {
  if (anchors.rows() < 2) throw EmptyBatch("a loss batch needs at least two pairs");
  if (candidates.rows() != anchors.rows() || candidates.cols() != anchors.cols()) {
    throw ShapeMismatch("anchor and candidate matrices differ in shape");
  }
  if (static_cast<Eigen::Index>(positions.size()) != anchors.rows()) {
    throw ShapeMismatch("expected " + std::to_string(anchors.rows()) + " positions, got " +
                        std::to_string(positions.size()));
  }
  if (!anchors.allFinite() || !candidates.allFinite()) {
    throw InvalidArgument("loss batch contains non-finite values");
  }
  if (!(non_negative_distance >= 0.0)) {
    throw InvalidArgument("non_negative_distance must be non-negative");
  }
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> negative_mask(const LossBatch& batch) {
  const Eigen::Index b = batch.size();
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(b, b);
  const double r2 = batch.non_negative_distance * batch.non_negative_distance;
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      mask(i, j) = i != j && (batch.positions[i] - batch.positions[j]).squaredNorm() > r2;
    }
  }
  return mask;
}

LossResult lip_loc_loss(const LossBatch& batch, double temperature) {
  batch.validate();
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidArgument("temperature must be positive");
  }
  const Eigen::Index b = batch.size();
  const auto mask = negative_mask(batch);
  const Eigen::MatrixXd s = batch.anchors * batch.candidates.transpose() / temperature;

  // d(loss_i)/d(s_ij) = p_ij - [i == j] over the anchor's softmax support.
  Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(b, b);
  LossResult out;
  for (Eigen::Index i = 0; i < b; ++i) {
    double peak = s(i, i);
    for (Eigen::Index j = 0; j < b; ++j) {
      if (mask(i, j)) peak = std::max(peak, s(i, j));
    }
    double z = std::exp(s(i, i) - peak);
    for (Eigen::Index j = 0; j < b; ++j) {
      if (mask(i, j)) z += std::exp(s(i, j) - peak);
    }
    const double lse = peak + std::log(z);
    out.loss += lse - s(i, i);
    ds(i, i) = std::exp(s(i, i) - lse) - 1.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (mask(i, j)) ds(i, j) = std::exp(s(i, j) - lse);
    }
  }
  const double scale = 1.0 / (static_cast<double>(b) * temperature);
  out.loss /= static_cast<double>(b);
  out.grad_anchors = ds * batch.candidates * scale;
  out.grad_candidates = ds.transpose() * batch.anchors * scale;
  return out;
}

}  // namespace wildannot
