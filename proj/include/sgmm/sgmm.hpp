#pragma once

#include "certify.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "gaussian_tv.hpp"
#include "mixture.hpp"
#include "montecarlo.hpp"
#include "report.hpp"
#include "specfun.hpp"
#include "vector.hpp"
