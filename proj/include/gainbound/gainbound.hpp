#pragma once

// Umbrella header.

#include "gainbound/bounds.hpp"
#include "gainbound/canonical.hpp"
#include "gainbound/config.hpp"
#include "gainbound/dynamics.hpp"
#include "gainbound/errors.hpp"
#include "gainbound/experiments.hpp"
#include "gainbound/lyapunov.hpp"
#include "gainbound/matrix_exp.hpp"
#include "gainbound/montecarlo.hpp"
#include "gainbound/rng.hpp"
#include "gainbound/serialize.hpp"
#include "gainbound/version.hpp"
