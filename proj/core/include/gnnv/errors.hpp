#pragma once

#include <stdexcept>

namespace gnnv {

struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotEventuallyConstantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gnnv
