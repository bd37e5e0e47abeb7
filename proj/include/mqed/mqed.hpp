#pragma once

#include "mqed/config.hpp"
#include "mqed/dynamics.hpp"
#include "mqed/error.hpp"
#include "mqed/fixtures.hpp"
#include "mqed/greens.hpp"
#include "mqed/modefit.hpp"
#include "mqed/mqed_wf.hpp"
#include "mqed/runner.hpp"
#include "mqed/scenario.hpp"
#include "mqed/spectral.hpp"
#include "mqed/trace.hpp"
#include "mqed/units.hpp"
