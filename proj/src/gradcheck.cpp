#include "suncet/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

#include "suncet/errors.hpp"

namespace suncet {

double gradcheck(const std::function<double(const Matrix&)>& f,
                 const Matrix& x, const Matrix& analytic_grad, double h) {
  if (h < 1e-7 || h > 1e-4) {
    throw std::invalid_argument("gradcheck: h must be in [1e-7, 1e-4]");
  }
  if (!same_shape(x, analytic_grad)) {
    throw shape_error("gradcheck: gradient " + analytic_grad.shape_str() +
                      " vs input " + x.shape_str());
  }
  Matrix probe = x;
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double orig = probe.data[k];
    probe.data[k] = orig + h;
    double fp = f(probe);
    probe.data[k] = orig - h;
    double fm = f(probe);
    probe.data[k] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw numeric_error("gradcheck: non-finite value at probe " +
                          std::to_string(k));
    }
    double fd = (fp - fm) / (2.0 * h);
    double an = analytic_grad.data[k];
    double denom = std::max({std::fabs(an), std::fabs(fd), 1e-12});
    worst = std::max(worst, std::fabs(an - fd) / denom);
  }
  return worst;
}

}  // namespace suncet
