#pragma once
// Umbrella header.

#include "stylusfx/core.hpp"
#include "stylusfx/experiments.hpp"
#include "stylusfx/motor.hpp"
#include "stylusfx/movement.hpp"
#include "stylusfx/protocol.hpp"
#include "stylusfx/rng.hpp"
#include "stylusfx/rotation.hpp"
#include "stylusfx/stats.hpp"
