#pragma once

#include "urn/model.hpp"
#include "urn/random.hpp"
#include "urn/pi_map.hpp"
#include "urn/fixed_points.hpp"
#include "urn/example1.hpp"
#include "urn/dynamics.hpp"
#include "urn/urn_sim.hpp"
