#pragma once

#include "covcheck/classifier.hpp"
#include "covcheck/error.hpp"
#include "covcheck/featureset.hpp"
#include "covcheck/generator.hpp"
#include "covcheck/linalg.hpp"
#include "covcheck/metrics.hpp"
#include "covcheck/pipeline.hpp"
#include "covcheck/report.hpp"
#include "covcheck/rng.hpp"
#include "covcheck/shift.hpp"
#include "covcheck/version.hpp"
