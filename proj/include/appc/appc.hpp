#pragma once

#include "appc/buchi.hpp"
#include "appc/error.hpp"
#include "appc/experiment.hpp"
#include "appc/graph.hpp"
#include "appc/grid.hpp"
#include "appc/ltl.hpp"
#include "appc/mean_cycle.hpp"
#include "appc/model_io.hpp"
#include "appc/offline.hpp"
#include "appc/online.hpp"
#include "appc/penalty.hpp"
#include "appc/product.hpp"
#include "appc/rational.hpp"
#include "appc/simulation.hpp"
#include "appc/synthesis.hpp"
#include "appc/transition_system.hpp"
