#pragma once

// Umbrella header.

#include "wetcluster/error.hpp"
#include "wetcluster/geometry.hpp"
#include "wetcluster/model.hpp"
#include "wetcluster/dry_solver.hpp"
#include "wetcluster/wetting.hpp"
#include "wetcluster/grid_set.hpp"
#include "wetcluster/crofton.hpp"
#include "wetcluster/lattice.hpp"
#include "wetcluster/measure.hpp"
#include "wetcluster/verify.hpp"
#include "wetcluster/serialize.hpp"
#include "wetcluster/svg.hpp"
