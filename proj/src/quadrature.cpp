#include "gibbsnet/quadrature.hpp"

#include <cmath>
#include <string>

#include "gibbsnet/error.hpp"

namespace gibbsnet {

namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
};

class Simpson {
 public:
  Simpson(const std::function<double(double)>& f, int max_depth) : f_(f), max_depth_(max_depth) {}

  double eval(double x) {
    ++evaluations;
    const double v = f_(x);
    if (!std::isfinite(v)) {
      throw QuadratureError("adaptive_simpson: integrand is not finite at x = " +
                            std::to_string(x));
    }
    return v;
  }

  double refine(const Panel& p, double tol, int depth) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double delta = left + right - p.whole;
    // Depth >= 2 keeps a symmetric integrand from fooling the first estimate.
    // The second clause stops refinement once the estimate is at rounding level.
    if (depth >= 2 && (std::abs(delta) <= 15.0 * tol ||
                       std::abs(delta) <= 1e-14 * std::abs(left + right))) {
      error += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (depth >= max_depth_) {
      throw QuadratureError("adaptive_simpson: maximum depth reached on [" + std::to_string(p.a) +
                            ", " + std::to_string(p.b) + "]");
    }
    return refine({p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth + 1) +
           refine({m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth + 1);
  }

  int evaluations = 0;
  double error = 0.0;

 private:
  const std::function<double(double)>& f_;
  int max_depth_;
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, int max_depth) {
  if (!(abs_tol > 0.0)) throw QuadratureError("adaptive_simpson: tolerance must be positive");
  if (a == b) return {};
  if (a > b) {
    QuadratureResult r = adaptive_simpson(f, b, a, abs_tol, max_depth);
    r.value = -r.value;
    return r;
  }
  Simpson s(f, max_depth);
  const double fa = s.eval(a);
  const double fb = s.eval(b);
  const double fm = s.eval(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  QuadratureResult r;
  r.value = s.refine({a, b, fa, fm, fb, whole}, abs_tol, 0);
  r.error_estimate = s.error;
  r.evaluations = s.evaluations;
  return r;
}

}  // namespace gibbsnet
