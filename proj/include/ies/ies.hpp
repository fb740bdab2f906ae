#pragma once

#include "ies/core.hpp"
#include "ies/dataset.hpp"
#include "ies/eval.hpp"
#include "ies/ilp.hpp"
#include "ies/logic.hpp"
#include "ies/mlp.hpp"
#include "ies/parallel.hpp"
#include "ies/planner.hpp"
#include "ies/qlearn.hpp"
#include "ies/reimagine.hpp"
#include "ies/sequencer.hpp"
