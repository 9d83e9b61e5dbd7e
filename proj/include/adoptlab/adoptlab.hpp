#pragma once

#include "adoptlab/basins.hpp"
#include "adoptlab/config.hpp"
#include "adoptlab/dynamics.hpp"
#include "adoptlab/equilibria.hpp"
#include "adoptlab/io.hpp"
#include "adoptlab/model.hpp"
#include "adoptlab/policy.hpp"
#include "adoptlab/trust.hpp"
#include "adoptlab/verify.hpp"
