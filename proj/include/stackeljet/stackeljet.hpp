#pragma once

// Umbrella header: exact Stackel systems attached to BKM PDEs, jet
// prolongation of their Hamiltonian flows, the finite-reduction map to
// finite-gap solutions, and the jet-approximation solvers.

#include "combinat.hpp"
#include "grading.hpp"
#include "io.hpp"
#include "jetmatch.hpp"
#include "jets.hpp"
#include "multipoly.hpp"
#include "odesim.hpp"
#include "polymatrix.hpp"
#include "ratexpr.hpp"
#include "rational.hpp"
#include "reduction.hpp"
#include "series.hpp"
#include "spectral.hpp"
#include "stackel.hpp"
#include "varreg.hpp"
