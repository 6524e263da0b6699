#ifndef PVSTAT_PVSTAT_HPP
#define PVSTAT_PVSTAT_HPP

#include "pvstat/errors.hpp"
#include "pvstat/numeric.hpp"
#include "pvstat/geometry.hpp"
#include "pvstat/hamiltonian.hpp"
#include "pvstat/sampler.hpp"
#include "pvstat/ensemble.hpp"
#include "pvstat/meanfield.hpp"

#endif // PVSTAT_PVSTAT_HPP
