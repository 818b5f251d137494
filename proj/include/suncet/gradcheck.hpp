#pragma once

#include <functional>

#include "suncet/matrix.hpp"

namespace suncet {

// Central-difference check of an analytic gradient. Returns the max over
// entries of |analytic - fd| / max(|analytic|, |fd|, 1e-12). h must lie in
// [1e-7, 1e-4]; f must return finite values at every probe.
double gradcheck(const std::function<double(const Matrix&)>& f,
                 const Matrix& x, const Matrix& analytic_grad, double h);

}  // namespace suncet
