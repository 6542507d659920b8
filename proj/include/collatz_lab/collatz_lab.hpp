#pragma once

#include "collatz_lab/nat.hpp"
#include "collatz_lab/core_map.hpp"
#include "collatz_lab/trajectory.hpp"
#include "collatz_lab/report.hpp"
#include "collatz_lab/facts.hpp"
#include "collatz_lab/cycles.hpp"
#include "collatz_lab/tree.hpp"
#include "collatz_lab/json_io.hpp"
#include "collatz_lab/sweep.hpp"
