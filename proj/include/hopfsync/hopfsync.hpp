#pragma once

#include "hopfsync/bifurcation.hpp"
#include "hopfsync/config.hpp"
#include "hopfsync/csv.hpp"
#include "hopfsync/errors.hpp"
#include "hopfsync/filter.hpp"
#include "hopfsync/integrator.hpp"
#include "hopfsync/metrics.hpp"
#include "hopfsync/model.hpp"
#include "hopfsync/phase.hpp"
#include "hopfsync/rng.hpp"
#include "hopfsync/spectrum.hpp"
#include "hopfsync/sweep.hpp"
#include "hopfsync/version.hpp"
