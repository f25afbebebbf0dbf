#pragma once

// Information regularization for semi-supervised classification:
// regularized logistic regression (empirical and Gaussian-kernel
// information regularizers), the analytic 1D nonparametric solver, and
// numeric verification of the associated learning-theory quantities.

#include "dataset.hpp"
#include "density.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "logistic.hpp"
#include "nonparam1d.hpp"
#include "optimize.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "theory.hpp"
