#pragma once

#include "schottky/types.hpp"
#include "schottky/moebius.hpp"
#include "schottky/group.hpp"
#include "schottky/parallel.hpp"
#include "schottky/poincare.hpp"
#include "schottky/eichler.hpp"
#include "schottky/contour.hpp"
#include "schottky/gem.hpp"
#include "schottky/variation.hpp"
#include "schottky/config.hpp"
#include "schottky/suites.hpp"
