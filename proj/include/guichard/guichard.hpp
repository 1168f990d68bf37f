#pragma once

// Everything: jets and fields, 2-metrics, Cauchy data, z-evolution, flatness checks, catalog.

#include "catalog.hpp"
#include "evolution.hpp"
#include "expr.hpp"
#include "field.hpp"
#include "flatness.hpp"
#include "initial_data.hpp"
#include "integrate.hpp"
#include "io.hpp"
#include "jet.hpp"
#include "lattice.hpp"
#include "metric2.hpp"
#include "pendulum.hpp"
