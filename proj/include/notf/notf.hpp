#pragma once

#include "notf/commands.hpp"
#include "notf/cp_als.hpp"
#include "notf/errors.hpp"
#include "notf/eval.hpp"
#include "notf/io.hpp"
#include "notf/prox.hpp"
#include "notf/rng.hpp"
#include "notf/solver.hpp"
#include "notf/synth.hpp"
#include "notf/tensor.hpp"
