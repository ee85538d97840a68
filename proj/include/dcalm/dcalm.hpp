// Copyright (c) dcalm contributors

#pragma once

#include "dcalm/applications/recovery.hpp"
#include "dcalm/applications/weber.hpp"
#include "dcalm/core.hpp"
#include "dcalm/dca.hpp"
#include "dcalm/harness/config.hpp"
#include "dcalm/harness/experiment.hpp"
#include "dcalm/harness/output.hpp"
#include "dcalm/problem.hpp"
#include "dcalm/psalmdc.hpp"
#include "dcalm/random.hpp"
#include "dcalm/subproblem.hpp"
#include "dcalm/subsolvers/anchor_descent.hpp"
#include "dcalm/subsolvers/fista.hpp"
#include "dcalm/subsolvers/smooth_descent.hpp"
