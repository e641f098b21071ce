#pragma once

#include "wpme/errors.hpp"
#include "wpme/model.hpp"
#include "wpme/barrier_params.hpp"
#include "wpme/barriers.hpp"
#include "wpme/feasibility.hpp"
#include "wpme/verifier.hpp"
#include "wpme/solver.hpp"
#include "wpme/barenblatt.hpp"
#include "wpme/experiments.hpp"
#include "wpme/config.hpp"
#include "wpme/report_io.hpp"
