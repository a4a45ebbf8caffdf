#pragma once

// Umbrella header for the controlled-diffusion policy toolkit.

#include "ctrldiff/assumptions.hpp"
#include "ctrldiff/control.hpp"
#include "ctrldiff/estimators.hpp"
#include "ctrldiff/experiment.hpp"
#include "ctrldiff/generator.hpp"
#include "ctrldiff/grid.hpp"
#include "ctrldiff/hjb.hpp"
#include "ctrldiff/io.hpp"
#include "ctrldiff/mollifier.hpp"
#include "ctrldiff/pairing.hpp"
#include "ctrldiff/policy.hpp"
#include "ctrldiff/problems.hpp"
#include "ctrldiff/rng.hpp"
#include "ctrldiff/sim.hpp"
#include "ctrldiff/upwind.hpp"
#include "ctrldiff/value_field.hpp"
