#pragma once

// Prior variation shape evolution: level-set shape alignment and recovery
// restricted to parametric deformation families, with the shape-preservability
// certificates for the harmonic (prior vibration) family.

#include "pvse/common.hpp"
#include "pvse/contour.hpp"
#include "pvse/css.hpp"
#include "pvse/energy.hpp"
#include "pvse/experiments.hpp"
#include "pvse/grid.hpp"
#include "pvse/image_io.hpp"
#include "pvse/kernels.hpp"
#include "pvse/level_set.hpp"
#include "pvse/metrics.hpp"
#include "pvse/parallel.hpp"
#include "pvse/rng.hpp"
#include "pvse/serialize.hpp"
#include "pvse/solver.hpp"
#include "pvse/stats.hpp"
#include "pvse/svg.hpp"
#include "pvse/templates.hpp"
#include "pvse/variations.hpp"
#include "pvse/warp.hpp"
