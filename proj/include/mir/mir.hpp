#pragma once

#include "mir/analysis.hpp"
#include "mir/asymcov.hpp"
#include "mir/bench.hpp"
#include "mir/config.hpp"
#include "mir/error.hpp"
#include "mir/estimator.hpp"
#include "mir/gamma_table.hpp"
#include "mir/hypothesis.hpp"
#include "mir/ir.hpp"
#include "mir/lambda.hpp"
#include "mir/model.hpp"
#include "mir/rng.hpp"
#include "mir/sim.hpp"
#include "mir/theory.hpp"
#include "mir/verify.hpp"
