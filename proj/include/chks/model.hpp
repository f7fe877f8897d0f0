#pragma once

#include "chks/error.hpp"
#include "chks/potentials.hpp"

namespace chks {

struct ModelParams {
  double chi = 1.0;
  double lambda = 0.0;
  double epsilon = 0.0;  // bounded-sensitivity regularization, 0 for the limit system
  double delta_safe = 1e-6;
  AlphaSpec alpha{};

  PotentialParams potential() const { return {lambda, chi, delta_safe}; }

  void validate() const {
    potential().validate();
    alpha.validate();
    if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  }
};

}  // namespace chks
