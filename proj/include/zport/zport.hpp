#pragma once

#include "zport/errors.hpp"
#include "zport/lcr.hpp"
#include "zport/network.hpp"
#include "zport/noise.hpp"
#include "zport/reports.hpp"
#include "zport/sweep_io.hpp"
#include "zport/touchstone.hpp"
#include "zport/transfer.hpp"
