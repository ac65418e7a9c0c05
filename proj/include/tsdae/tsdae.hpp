#pragma once

#include <tsdae/error.hpp>
#include <tsdae/types.hpp>
#include <tsdae/timescale.hpp>
#include <tsdae/matexpr.hpp>
#include <tsdae/projalg.hpp>
#include <tsdae/chain.hpp>
#include <tsdae/decouple.hpp>
#include <tsdae/solver.hpp>
#include <tsdae/problem.hpp>
#include <tsdae/commands.hpp>
