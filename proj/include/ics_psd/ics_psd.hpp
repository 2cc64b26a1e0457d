#pragma once

// Library umbrella. The CLI layer (ics_psd/cli/run.hpp) is not included here
// because it pulls in the JSON dependency.

#include "ics_psd/datagen.hpp"
#include "ics_psd/errors.hpp"
#include "ics_psd/ics.hpp"
#include "ics_psd/io/csv.hpp"
#include "ics_psd/linalg.hpp"
#include "ics_psd/plot/svg.hpp"
#include "ics_psd/random.hpp"
#include "ics_psd/scatter.hpp"
