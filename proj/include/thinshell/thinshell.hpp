#pragma once

#include "thinshell/clifford.hpp"
#include "thinshell/core.hpp"
#include "thinshell/effective.hpp"
#include "thinshell/eigsolve.hpp"
#include "thinshell/geometry.hpp"
#include "thinshell/quadrature.hpp"
#include "thinshell/shell.hpp"
#include "thinshell/sweep.hpp"
#include "thinshell/transverse.hpp"
