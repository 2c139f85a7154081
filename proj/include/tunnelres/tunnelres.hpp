#pragma once

#include "tunnelres/units.hpp"
#include "tunnelres/spline.hpp"
#include "tunnelres/potential_data.hpp"
#include "tunnelres/siegert.hpp"
#include "tunnelres/parallel.hpp"
#include "tunnelres/scattering.hpp"
#include "tunnelres/reference_solver.hpp"
#include "tunnelres/semiclassical.hpp"
#include "tunnelres/thermal.hpp"
#include "tunnelres/census.hpp"
#include "tunnelres/io.hpp"
#include "tunnelres/pipeline.hpp"
