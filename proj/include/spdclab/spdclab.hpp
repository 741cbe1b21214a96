#pragma once

#include "spdclab/correlator.hpp"
#include "spdclab/csv.hpp"
#include "spdclab/event_sim.hpp"
#include "spdclab/evt_io.hpp"
#include "spdclab/grid.hpp"
#include "spdclab/lab.hpp"
#include "spdclab/scenario.hpp"
#include "spdclab/smearing.hpp"
#include "spdclab/spdc_model.hpp"
