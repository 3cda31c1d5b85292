#pragma once

// Convenience umbrella: pulls in the whole library.

#include "sgin/core.hpp"
#include "sgin/topology.hpp"
#include "sgin/flow.hpp"
#include "sgin/mdrteg.hpp"
#include "sgin/assignment.hpp"
#include "sgin/validate.hpp"
#include "sgin/milp.hpp"
#include "sgin/exact.hpp"
#include "sgin/multipliers.hpp"
#include "sgin/dijkstra.hpp"
#include "sgin/scheduler.hpp"
#include "sgin/solver.hpp"
#include "sgin/baselines.hpp"
#include "sgin/harness.hpp"
