#pragma once

#include "sbl/behavior.hpp"
#include "sbl/csv.hpp"
#include "sbl/ilc.hpp"
#include "sbl/lifting.hpp"
#include "sbl/runner.hpp"
#include "sbl/scenario.hpp"
#include "sbl/similarity.hpp"
#include "sbl/sweep.hpp"
#include "sbl/system.hpp"
#include "sbl/transfer.hpp"
#include "sbl/types.hpp"
