#pragma once

#include <gtest/gtest.h>

#include <functional>
#include <vector>

#include "tfe/error.hpp"
#include "tfe/grid_profile.hpp"

namespace tfe_test {

template <class F>
tfe::Profile sample(const tfe::Grid1D& g, F f) {
  std::vector<double> u(g.n_nodes);
  for (std::size_t i = 0; i < g.n_nodes; ++i) u[i] = f(g.x(i));
  return tfe::Profile(g, u);
}

/// Kind of the tfe::Error thrown by fn; records a failure when none is.
inline tfe::ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const tfe::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return tfe::ErrorKind::io;
}

}  // namespace tfe_test
