#pragma once

// Umbrella header: optimal irreversible reinsurance with capital injections.

#include "reins/params.hpp"
#include "reins/roots.hpp"
#include "reins/scalar_solvers.hpp"
#include "reins/level.hpp"
#include "reins/policy.hpp"
#include "reins/simulate.hpp"
