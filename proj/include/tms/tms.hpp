#pragma once

#include "tms/error.hpp"
#include "tms/rng.hpp"
#include "tms/sample.hpp"
#include "tms/format.hpp"
#include "tms/estimands.hpp"
#include "tms/family.hpp"
#include "tms/parallel.hpp"
#include "tms/selection.hpp"
#include "tms/bootstrap.hpp"
#include "tms/dgp.hpp"
#include "tms/experiments.hpp"
#include "tms/csv.hpp"
#include "tms/plot.hpp"
