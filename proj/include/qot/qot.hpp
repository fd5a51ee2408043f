#pragma once

#include "qot/analytic.hpp"
#include "qot/config.hpp"
#include "qot/constants.hpp"
#include "qot/coupling.hpp"
#include "qot/errors.hpp"
#include "qot/exact_ot.hpp"
#include "qot/grid.hpp"
#include "qot/linalg.hpp"
#include "qot/plot_svg.hpp"
#include "qot/pme.hpp"
#include "qot/qot_solver.hpp"
#include "qot/rates.hpp"
#include "qot/version.hpp"
