#pragma once

#include "nplcm/asymptotics.hpp"
#include "nplcm/checking.hpp"
#include "nplcm/diagnostics.hpp"
#include "nplcm/elicitation.hpp"
#include "nplcm/gibbs.hpp"
#include "nplcm/io.hpp"
#include "nplcm/matrix.hpp"
#include "nplcm/model.hpp"
#include "nplcm/parallel.hpp"
#include "nplcm/rng.hpp"
#include "nplcm/simulation.hpp"
#include "nplcm/types.hpp"
