#pragma once

// Umbrella header.

#include "cgfl/error.hpp"
#include "cgfl/spectra.hpp"
#include "cgfl/localizer.hpp"
#include "cgfl/ranking.hpp"
#include "cgfl/metrics.hpp"
#include "cgfl/ingestion.hpp"
#include "cgfl/report.hpp"
#include "cgfl/commands.hpp"
