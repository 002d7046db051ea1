#pragma once

// Umbrella header.

#include "dnl/audit.hpp"
#include "dnl/config.hpp"
#include "dnl/domain.hpp"
#include "dnl/energy.hpp"
#include "dnl/errors.hpp"
#include "dnl/experiments.hpp"
#include "dnl/expression.hpp"
#include "dnl/io.hpp"
#include "dnl/nonlinearity.hpp"
#include "dnl/random.hpp"
#include "dnl/report.hpp"
#include "dnl/resolvent.hpp"
#include "dnl/semigroup.hpp"
