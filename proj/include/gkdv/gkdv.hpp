#pragma once
// Umbrella header.

#include "gkdv/error.hpp"
#include "gkdv/rng.hpp"
#include "gkdv/parallel.hpp"
#include "gkdv/fft.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/spacetime.hpp"
#include "gkdv/wiener.hpp"
#include "gkdv/norms.hpp"
#include "gkdv/solver.hpp"
#include "gkdv/estimates.hpp"
#include "gkdv/montecarlo.hpp"
#include "gkdv/io.hpp"
#include "gkdv/config.hpp"
#include "gkdv/commands.hpp"
