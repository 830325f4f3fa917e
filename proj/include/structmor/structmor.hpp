#pragma once

#include "structmor/balancing.hpp"
#include "structmor/beam.hpp"
#include "structmor/benchmark.hpp"
#include "structmor/errors.hpp"
#include "structmor/interconnection.hpp"
#include "structmor/json_io.hpp"
#include "structmor/lyapunov.hpp"
#include "structmor/metrics.hpp"
#include "structmor/passivity.hpp"
#include "structmor/reduction.hpp"
#include "structmor/riccati.hpp"
#include "structmor/sdp.hpp"
#include "structmor/state_space.hpp"
#include "structmor/types.hpp"
