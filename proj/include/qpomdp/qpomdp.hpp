#pragma once

#include "qpomdp/baseline.hpp"
#include "qpomdp/benchgen.hpp"
#include "qpomdp/brute_force.hpp"
#include "qpomdp/cnf.hpp"
#include "qpomdp/driver.hpp"
#include "qpomdp/encoder.hpp"
#include "qpomdp/error.hpp"
#include "qpomdp/pomdp.hpp"
#include "qpomdp/pomdp_io.hpp"
#include "qpomdp/sat/cdcl.hpp"
#include "qpomdp/sat/external.hpp"
#include "qpomdp/sat/outcome.hpp"
#include "qpomdp/strategy.hpp"
#include "qpomdp/strategy_io.hpp"
