#pragma once

// Umbrella header: the whole laboratory in one include.

#include "twistlab/core.hpp"
#include "twistlab/linalg.hpp"
#include "twistlab/spaces.hpp"
#include "twistlab/quasimaps.hpp"
#include "twistlab/compat.hpp"
#include "twistlab/actions.hpp"
#include "twistlab/freetree.hpp"
#include "twistlab/nabla.hpp"
#include "twistlab/interp.hpp"
#include "twistlab/report.hpp"
#include "twistlab/config.hpp"
#include "twistlab/experiments.hpp"
#include "twistlab/acceptance.hpp"
