#pragma once

#include "admlab/error.hpp"
#include "admlab/grid_fn.hpp"
#include "admlab/measures_bv.hpp"
#include "admlab/semigroups.hpp"
#include "admlab/bracket.hpp"
#include "admlab/admissibility.hpp"
#include "admlab/variation.hpp"
#include "admlab/duality.hpp"
#include "admlab/shift_example.hpp"
#include "admlab/scenario.hpp"
