#pragma once

#include "germlens/config.hpp"
#include "germlens/directions.hpp"
#include "germlens/fixtures.hpp"
#include "germlens/gauge.hpp"
#include "germlens/germ.hpp"
#include "germlens/lipschitz.hpp"
#include "germlens/maps.hpp"
#include "germlens/puiseux.hpp"
#include "germlens/report.hpp"
#include "germlens/runner.hpp"
#include "germlens/seatangle.hpp"
#include "germlens/ssp.hpp"
#include "germlens/volume.hpp"
