#pragma once

// Umbrella header.

#include "skewfront/env.hpp"
#include "skewfront/errors.hpp"
#include "skewfront/exit_times.hpp"
#include "skewfront/kernel.hpp"
#include "skewfront/lyapunov.hpp"
#include "skewfront/mcsim.hpp"
#include "skewfront/mobius.hpp"
#include "skewfront/pde.hpp"
#include "skewfront/rng.hpp"
#include "skewfront/speed.hpp"
#include "skewfront/stats.hpp"
#include "skewfront/version.hpp"
