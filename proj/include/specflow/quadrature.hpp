#pragma once

#include <functional>

#include "specflow/types.hpp"

namespace specflow {

// Adaptive Simpson over the real line for a vector function bounded by C e^{-delta |x|}.
RVec integrate_line(const std::function<RVec(double)>& f, double C, double delta, double tol);
double integrate_line(const std::function<double(double)>& f, double C, double delta, double tol);

}  // namespace specflow
