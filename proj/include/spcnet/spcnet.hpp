#pragma once

#include "spcnet/checkpoint.hpp"
#include "spcnet/data.hpp"
#include "spcnet/experiment.hpp"
#include "spcnet/filter.hpp"
#include "spcnet/graph.hpp"
#include "spcnet/linalg.hpp"
#include "spcnet/model.hpp"
#include "spcnet/parallel.hpp"
#include "spcnet/pc_poly.hpp"
#include "spcnet/random.hpp"
#include "spcnet/robustness.hpp"
#include "spcnet/stats.hpp"
#include "spcnet/types.hpp"
