#pragma once

#include "cutlim/distance.hpp"
#include "cutlim/kernel.hpp"
#include "cutlim/measure.hpp"

namespace cutlim {

enum class ParityClass { kEven, kOdd };

// Uniform distribution over the 2^{n-1} binary configurations of the
// given parity.
DiscreteMeasure parity_measure(int n, ParityClass parity);

// The coupling that pairs an even-parity vector with its copy flipped in
// the last coordinate.
Coupling parity_flip_coupling(int n);

// The mixture model where bit i is 1 with probability i*s/n for a common
// uniform s. Weights are exact polynomial integrals.
DiscreteMeasure iscaled_measure(int n);

// Its limit kernel kappa_{s,x}(1) = s*x on a uniform grid.
StepKernel iscaled_limit_kernel(int grid);

struct CurieWeissSpec {
  int n = 2;
  double temperature = 1.0;  // T > 0
};

// Boltzmann distribution with weights proportional to
// exp((T/n) sum_{i<j} s_i s_j), spins +-1; symbol 1 maps to spin +1.
DiscreteMeasure curie_weiss_measure(const CurieWeissSpec& spec);

// The positive solution of m = tanh(T m) for T > 1, by bisection to 1e-12.
double curie_weiss_magnetization(double temperature);

// Independent cross-check: safeguarded Newton iteration on the same fixed
// point, agreeing with the bisection root to 1e-10.
double curie_weiss_magnetization_newton(double temperature);

// Limit kernel: constant (1/2, 1/2) for T <= 1; two equal-weight row
// phases with magnetisation +-m for T > 1.
StepKernel curie_weiss_limit_kernel(double temperature);

}  // namespace cutlim
