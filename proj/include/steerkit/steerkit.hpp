#pragma once

#include "steerkit/closedform.hpp"
#include "steerkit/covariance.hpp"
#include "steerkit/dynamics.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/model.hpp"
#include "steerkit/montecarlo.hpp"
#include "steerkit/quadrature.hpp"
#include "steerkit/steering.hpp"
