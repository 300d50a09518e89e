#ifndef DRMCMC_DRMCMC_HPP
#define DRMCMC_DRMCMC_HPP

// Umbrella header: delayed-rejection MCMC engine, built-in targets,
// calibration maps, diagnostics, and the flat-file experiment layer.

#include "calibration.hpp"
#include "chain_io.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "dr_engine.hpp"
#include "logspace.hpp"
#include "oracle.hpp"
#include "point.hpp"
#include "proposal.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "targets.hpp"

#endif
