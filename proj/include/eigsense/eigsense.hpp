#pragma once

#include "eigsense/covariance.hpp"
#include "eigsense/detectors.hpp"
#include "eigsense/eig.hpp"
#include "eigsense/errors.hpp"
#include "eigsense/prewhiten.hpp"
#include "eigsense/rmt.hpp"
#include "eigsense/rng.hpp"
#include "eigsense/sample_block.hpp"
#include "eigsense/signal_gen.hpp"

#include "eigsense/harness/csv.hpp"
#include "eigsense/harness/iq_io.hpp"
#include "eigsense/harness/monte_carlo.hpp"
#include "eigsense/harness/parallel.hpp"
#include "eigsense/harness/scenario.hpp"
