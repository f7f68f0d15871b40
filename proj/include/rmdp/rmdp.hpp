#pragma once
// Convenience header pulling in the whole library.

#include "rmdp/generate.hpp"
#include "rmdp/graph.hpp"
#include "rmdp/io.hpp"
#include "rmdp/learn.hpp"
#include "rmdp/model.hpp"
#include "rmdp/objective.hpp"
#include "rmdp/oracle.hpp"
#include "rmdp/prng.hpp"
#include "rmdp/solver.hpp"
#include "rmdp/types.hpp"
#include "rmdp/uncertainty.hpp"
