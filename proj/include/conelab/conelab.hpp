#pragma once

#include "conelab/cone.hpp"
#include "conelab/config.hpp"
#include "conelab/cross_section.hpp"
#include "conelab/errors.hpp"
#include "conelab/experiments.hpp"
#include "conelab/fields.hpp"
#include "conelab/fit.hpp"
#include "conelab/io.hpp"
#include "conelab/iteration.hpp"
#include "conelab/mode_solver.hpp"
#include "conelab/profile.hpp"
#include "conelab/report.hpp"
