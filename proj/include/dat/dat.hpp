#pragma once

#include "dat/anchor.hpp"
#include "dat/event_log.hpp"
#include "dat/experiment.hpp"
#include "dat/interval.hpp"
#include "dat/invariants.hpp"
#include "dat/metrics.hpp"
#include "dat/pipeline.hpp"
#include "dat/precise_matcher.hpp"
#include "dat/report.hpp"
#include "dat/sessionizer.hpp"
#include "dat/simulator.hpp"
#include "dat/stats.hpp"
#include "dat/timeline.hpp"
#include "dat/types.hpp"
