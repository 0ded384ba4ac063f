#ifndef ODCSA_GRADCHECK_HPP
#define ODCSA_GRADCHECK_HPP

#include <functional>

#include "odcsa/tensor.hpp"

namespace odcsa {

// A differentiable scalar-valued map: called once with a tape to obtain the
// analytic gradient, then repeatedly without one for the central-difference
// probes. Must return a (1,1,1,1) tensor and be deterministic.
using ScalarFn = std::function<Tensor4(const Tensor4&, Tape*)>;

// Central differences (f(x+eps*e) - f(x-eps*e)) / 2eps per coordinate versus
// the tape gradient; per-coordinate relative error |a-b| / max(1e-8, |a|+|b|).
// Returns the maximum over coordinates.
double finite_diff_check(const ScalarFn& f, const Tensor4& x, double eps = 1e-5);

}  // namespace odcsa

#endif
