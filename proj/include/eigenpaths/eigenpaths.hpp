#pragma once

#include "core.hpp"
#include "spectra.hpp"
#include "matching.hpp"
#include "tracker.hpp"
#include "pairings.hpp"
#include "twobytwo.hpp"
#include "construct.hpp"
#include "polypaths.hpp"
#include "io.hpp"
#include "svg.hpp"
