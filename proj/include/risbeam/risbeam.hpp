// Umbrella header.
#ifndef RISBEAM_RISBEAM_HPP
#define RISBEAM_RISBEAM_HPP

#include "risbeam/analysis.hpp"
#include "risbeam/bench.hpp"
#include "risbeam/channel.hpp"
#include "risbeam/config.hpp"
#include "risbeam/mse.hpp"
#include "risbeam/precoder.hpp"
#include "risbeam/ris_mm.hpp"
#include "risbeam/ris_rga.hpp"
#include "risbeam/rng.hpp"
#include "risbeam/solver.hpp"
#include "risbeam/types.hpp"

#endif  // RISBEAM_RISBEAM_HPP
