#pragma once

#include "analysis.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "model_core.hpp"
#include "si_wave.hpp"
#include "solver.hpp"
#include "sweep.hpp"
