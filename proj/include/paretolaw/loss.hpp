#pragma once

namespace paretolaw {

// Linear scalarization of the training objective: BCE + lambda * |DP gap|.
// The DP term is estimated per minibatch; a batch that lacks one of the
// groups contributes zero.
struct ScalarizedLoss {
  double lambda = 0.0;
};

}  // namespace paretolaw
