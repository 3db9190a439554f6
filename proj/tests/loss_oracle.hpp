#pragma once

#include <random>

#include "wildannot/lip_loc_loss.hpp"

namespace wildannot::testing {

// Direct evaluation in long double without the log-sum-exp shift.
double reference_loss(const LossBatch& batch, double temperature);

// B x D batch with positions spread so that roughly half the pairs are
// negatives.
LossBatch random_loss_batch(std::mt19937_64& rng, int b, int d);

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_abs_gradient = 0.0;
};

// Central differences of lip_loc_loss with step h over every entry of both
// matrices. Relative error is |analytic - numeric| / max(|analytic|,
// |numeric|, floor), the floor guarding entries that are zero up to
// round-off.
GradientCheck check_gradients(const LossBatch& batch, double temperature, double h = 1e-5,
                              double floor = 1e-4);

}  // namespace wildannot::testing
