#pragma once

// Umbrella header: the whole library in dependency order.

#include "aks/linalg.hpp"
#include "aks/lie_algebra.hpp"
#include "aks/sl2c.hpp"
#include "aks/group.hpp"
#include "aks/random.hpp"
#include "aks/hamiltonian.hpp"
#include "aks/brackets.hpp"
#include "aks/dynamics.hpp"
#include "aks/solver.hpp"
#include "aks/io.hpp"
#include "aks/verify.hpp"
