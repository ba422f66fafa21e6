#pragma once

// Umbrella header.

#include "villain/errors.hpp"
#include "villain/linalg.hpp"
#include "villain/complex.hpp"
#include "villain/torus.hpp"
#include "villain/gauge.hpp"
#include "villain/renorm.hpp"
#include "villain/multiplier.hpp"
#include "villain/correlation.hpp"
#include "villain/io.hpp"
#include "villain/app.hpp"
