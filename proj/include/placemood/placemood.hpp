#pragma once

#include "placemood/affect.hpp"
#include "placemood/config.hpp"
#include "placemood/csv.hpp"
#include "placemood/dbscan.hpp"
#include "placemood/error.hpp"
#include "placemood/geo.hpp"
#include "placemood/hull.hpp"
#include "placemood/ingest.hpp"
#include "placemood/pipeline.hpp"
#include "placemood/place.hpp"
#include "placemood/random.hpp"
#include "placemood/report.hpp"
#include "placemood/stats/bootstrap.hpp"
#include "placemood/stats/correlation.hpp"
#include "placemood/stats/factors.hpp"
#include "placemood/stats/kendall.hpp"
#include "placemood/stats/power_law.hpp"
#include "placemood/stats/rank.hpp"
#include "placemood/stats/regression.hpp"
#include "placemood/synth.hpp"
#include "placemood/time.hpp"
