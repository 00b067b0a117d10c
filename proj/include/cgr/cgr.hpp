#pragma once

#include "cgr/concept_graph.hpp"
#include "cgr/environment.hpp"
#include "cgr/errors.hpp"
#include "cgr/features.hpp"
#include "cgr/graph_io.hpp"
#include "cgr/grid.hpp"
#include "cgr/inhibition.hpp"
#include "cgr/interpretation.hpp"
#include "cgr/learning.hpp"
#include "cgr/solver.hpp"
#include "cgr/trace.hpp"
#include "cgr/transformation.hpp"
