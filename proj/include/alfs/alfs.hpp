#pragma once

#include "alfs/admm.hpp"
#include "alfs/baselines.hpp"
#include "alfs/bench.hpp"
#include "alfs/config.hpp"
#include "alfs/dataset.hpp"
#include "alfs/error.hpp"
#include "alfs/lbfgs.hpp"
#include "alfs/parallel.hpp"
#include "alfs/prox.hpp"
#include "alfs/random.hpp"
#include "alfs/selection.hpp"
