#pragma once

// Exact computation and simulation toolkit for Rademacher-type random
// multiplicative functions: factorization tables, sampling, martingale
// decomposition, square-product set counting over GF(2), exact and Monte
// Carlo moments, and the analytic bound evaluators.

#include "rmf/bigint.hpp"
#include "rmf/bounds.hpp"
#include "rmf/dickman.hpp"
#include "rmf/errors.hpp"
#include "rmf/gf2.hpp"
#include "rmf/model.hpp"
#include "rmf/moments.hpp"
#include "rmf/montecarlo.hpp"
#include "rmf/parallel.hpp"
#include "rmf/report.hpp"
#include "rmf/rng.hpp"
#include "rmf/sieve.hpp"
#include "rmf/squaresets.hpp"
#include "rmf/stats.hpp"
#include "rmf/verify.hpp"
