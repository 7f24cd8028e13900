#pragma once

#include "pstar/curve.hpp"
#include "pstar/entropy_surface.hpp"
#include "pstar/errors.hpp"
#include "pstar/finite_law.hpp"
#include "pstar/free_energy.hpp"
#include "pstar/grid.hpp"
#include "pstar/rootfind.hpp"
#include "pstar/scalar.hpp"
