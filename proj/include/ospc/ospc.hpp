#pragma once

#include "ospc/error.hpp"
#include "ospc/random.hpp"
#include "ospc/numerics.hpp"
#include "ospc/channel_models.hpp"
#include "ospc/power_alloc.hpp"
#include "ospc/scheduler.hpp"
#include "ospc/mean_field.hpp"
#include "ospc/simulator.hpp"
#include "ospc/experiment.hpp"
#include "ospc/validation.hpp"
#include "ospc/commands.hpp"
