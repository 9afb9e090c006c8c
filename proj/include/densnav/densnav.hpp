#pragma once

#include "densnav/env.hpp"
#include "densnav/params.hpp"
#include "densnav/density.hpp"
#include "densnav/planner.hpp"
#include "densnav/projected_gradient.hpp"
#include "densnav/tracker.hpp"
#include "densnav/config.hpp"
#include "densnav/io.hpp"
#include "densnav/commands.hpp"
